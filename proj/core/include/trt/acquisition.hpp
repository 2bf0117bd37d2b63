#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "trt/curve.hpp"
#include "trt/grid.hpp"
#include "trt/types.hpp"

namespace trt {

/// Sampling of the data manifold: curve parameter times a spherical
/// direction chart (theta1, theta2) with theta1 in (margin, pi - margin).
/// All samples are cell midpoints, so closed curves are not double
/// counted and theta2 wraps cleanly.
struct AcquisitionGeometry {
    std::shared_ptr<const Curve> curve;
    int n_t = 64;
    int n_theta1 = 48;
    int n_theta2 = 96;
    double theta_margin = 0.1;
    /// Quadrature step along rays; must not exceed half the voxel size
    /// of the field it integrates.
    double step = 0.01;
    /// Cap on the ray parameter |s|; rays are additionally clipped to the
    /// field grid.
    double ray_extent = 1e30;

    double dt() const { return curve->t_span() / n_t; }
    double t_sample(int j) const { return curve->t_begin() + (j + 0.5) * dt(); }
    double dtheta1() const { return (M_PI - 2.0 * theta_margin) / n_theta1; }
    double theta1_sample(int a) const { return theta_margin + (a + 0.5) * dtheta1(); }
    double dtheta2() const { return 2.0 * M_PI / n_theta2; }
    double theta2_sample(int b) const { return (b + 0.5) * dtheta2(); }

    std::int64_t line_count() const { return std::int64_t(n_t) * n_theta1 * n_theta2; }

    void validate(const Grid3& grid) const;
};

/// Transverse ray transform data: component i in 0..m, then curve sample,
/// then the two direction indices (matching the file layout).
class Sinogram {
  public:
    Sinogram() = default;
    Sinogram(const AcquisitionGeometry& geom, int m)
        : geom_(geom), m_(m), values_(std::size_t(m + 1) * geom.line_count(), 0.0) {}

    int order() const { return m_; }
    const AcquisitionGeometry& geometry() const { return geom_; }

    std::int64_t index(int i, int it, int a, int b) const {
        return ((std::int64_t(i) * geom_.n_t + it) * geom_.n_theta1 + a) * geom_.n_theta2 + b;
    }
    double& at(int i, int it, int a, int b) { return values_[index(i, it, a, b)]; }
    double at(int i, int it, int a, int b) const { return values_[index(i, it, a, b)]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool all_finite() const;

  private:
    AcquisitionGeometry geom_;
    int m_ = 0;
    std::vector<double> values_;
};

} // namespace trt
