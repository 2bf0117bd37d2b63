#pragma once

#include <vector>

#include "trt/grid.hpp"
#include "trt/symtensor.hpp"
#include "trt/types.hpp"

namespace trt {

enum class PrimitiveKind { Ball, Ellipsoid, Gaussian };

struct PhantomPrimitive {
    PrimitiveKind kind = PrimitiveKind::Ball;
    Vec3 center = Vec3::Zero();
    /// Semi-axes for indicators, per-axis sigma for Gaussian bumps.
    Vec3 radii = Vec3::Ones();
    SymTensor amplitude;
};

struct Phantom {
    int m = 0;
    std::vector<PhantomPrimitive> primitives;
};

/// Rasterize the phantom onto the grid. Every primitive must fit inside
/// the ball B (Gaussians via their 4-sigma extent) and strictly inside
/// the grid; indicator primitives carry jump singularities on their
/// boundary surfaces.
SymTensorField make_phantom(const Phantom& phantom, const Grid3& grid, const Ball& region);

struct BoundarySample {
    Vec3 x;
    Vec3 normal; // outward unit conormal of the jump surface
    int primitive = 0;
};

/// Quasi-uniform samples of the jump surfaces with outward normals
/// (Fibonacci sphere mapped to each indicator primitive). Gaussian bumps
/// contribute none.
std::vector<BoundarySample> phantom_boundary_samples(const Phantom& phantom, int n_per_primitive);

} // namespace trt
