#pragma once

#include <optional>
#include <span>

#include "trt/acquisition.hpp"
#include "trt/frame.hpp"
#include "trt/grid.hpp"
#include "trt/symtensor.hpp"

namespace trt {

/// Transverse ray integrals of f along the line through curve point
/// gamma(t) with the chart direction (theta1, theta2): component i
/// contracts against omega1 (m-i) times and omega2 i times. Zero when the
/// line misses the grid.
std::vector<double> trt_line(const SymTensorField& f, const Curve& curve, double t, double theta1,
                             double theta2, double step, double ray_extent = 1e30);

/// Same integral with an explicit transverse frame (used for gauge
/// rotated measurements; the components in two frames are related by the
/// in-plane rotation representation).
std::vector<double> trt_line_frame(const SymTensorField& f, const Vec3& source, const Frame& frame,
                                   double step, double ray_extent = 1e30);

Sinogram forward(const SymTensorField& f, const AcquisitionGeometry& geom);

enum class BackprojectMode { ExactDiscrete, Geometric };

struct BackprojectStats {
    std::int64_t skipped_directions = 0;
    std::int64_t total_directions = 0;
};

/// ExactDiscrete: the transpose of the discretized forward map (adjoint
/// for plain coefficient sums); makes adjoint-dependent tests exact.
/// Geometric: per voxel, integrate the data over the curve parameter at
/// the direction of (x - gamma(t)) with bilinear direction lookup, the
/// transverse tensor pattern, and the 1/|x - gamma(t)|^2 cone-beam
/// weight. This is the formal adjoint for the dt dtheta1 dtheta2
/// sin(theta1) data measure and the multinomial-weighted field product.
SymTensorField backproject(const Sinogram& g, const Grid3& grid, BackprojectMode mode,
                           BackprojectStats* stats = nullptr);

SymTensorField normal(const SymTensorField& f, const AcquisitionGeometry& geom, BackprojectMode mode,
                      BackprojectStats* stats = nullptr);

/// Geometric-mode normal operator evaluated at isolated points, with
/// exact directions (no direction-grid snapping) and optional gauge
/// rotation of the transverse frames toward a covector xi. Used by the
/// symbol oracle, where direction-grid aliasing of oscillatory data
/// would mask the symbol.
std::vector<SymTensor> normal_at_points(const SymTensorField& f, const AcquisitionGeometry& geom,
                                        std::span<const Vec3> points,
                                        const std::optional<Vec3>& gauge_xi = std::nullopt);

} // namespace trt
