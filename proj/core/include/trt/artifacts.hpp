#pragma once

#include <span>
#include <vector>

#include "trt/curve.hpp"
#include "trt/grid.hpp"
#include "trt/phantom.hpp"

namespace trt {

/// One generator of predicted artifacts: the boundary covector (x, xi)
/// whose plane is tangent to the ray complex at gamma(t); singular energy
/// can flow out along the full line through gamma(t) and x.
struct ArtifactLine {
    double t = 0.0;
    Vec3 theta;  // unit direction of the line
    Vec3 x;      // originating boundary point
    Vec3 xi;     // originating conormal
    double tau = 0.0; // x = gamma(t) + tau * theta
};

struct ArtifactPrediction {
    std::vector<ArtifactLine> lines;
    std::vector<Vec3> points;       // swept samples y = gamma(t) + tau~ * theta
    std::vector<double> xi_scales;  // tau / tau~ per point (covector scale at y)
};

struct ArtifactOptions {
    /// |gamma'(t).xi|/|gamma'| below this counts as a tangential source.
    double sigma_tol = 0.05;
    /// |(x - gamma(t)).xi| tolerance for x lying on the tangent plane.
    double plane_tol = 0.05;
    /// Sweep step along artifact lines, in units of min voxel spacing.
    double step_factor = 0.5;
    /// Bracketing nodes per unit curve parameter for gamma'.xi roots.
    double samples_per_unit = 512.0;
};

/// For each boundary covector, locate curve points whose tangent is
/// orthogonal to the conormal while the boundary point lies on that
/// plane, and sweep the artifact lines through the grid.
ArtifactPrediction predict_artifacts(std::span<const BoundarySample> samples, const Curve& curve,
                                     const Grid3& grid, const ArtifactOptions& opts = {});

/// Per-voxel norm of the central-difference gradient aggregated over
/// components with multinomial weights; a numerical proxy for the
/// location and strength of singular support.
ScalarField edge_map(const SymTensorField& f);

/// Voxel masks.
using Mask = std::vector<std::uint8_t>;

Mask rasterize_mask(std::span<const Vec3> points, const Grid3& grid);
Mask dilate_mask(const Mask& mask, const Grid3& grid, int radius_voxels);
Mask mask_union(const Mask& a, const Mask& b);

/// Normalized cross-correlation Sum(ab) / sqrt(Sum(a^2) Sum(b^2)) over
/// the masked voxels (cosine form; scale-invariant).
double masked_ncc(const ScalarField& a, const ScalarField& b, const Mask& mask);

/// Fraction of sum(e^2) inside `target`, both restricted to the
/// complement of `exclude`.
double energy_fraction_within(const ScalarField& e, const Mask& target, const Mask& exclude);

} // namespace trt
