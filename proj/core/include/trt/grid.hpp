#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "trt/symtensor.hpp"
#include "trt/types.hpp"

namespace trt {

/// Axis-aligned voxel grid. `origin` is the center of voxel (0,0,0);
/// the outer box extends half a voxel beyond the first/last centers.
struct Grid3 {
    Eigen::Vector3i n = Eigen::Vector3i::Zero();
    Vec3 spacing = Vec3::Ones();
    Vec3 origin = Vec3::Zero();

    /// Grid whose outer box is exactly [lo, hi] with the given counts.
    static Grid3 box(const Vec3& lo, const Vec3& hi, const Eigen::Vector3i& counts);

    std::int64_t voxel_count() const { return std::int64_t(n[0]) * n[1] * n[2]; }

    std::int64_t voxel_index(int ix, int iy, int iz) const {
        return ix + std::int64_t(n[0]) * (iy + std::int64_t(n[1]) * iz);
    }

    Vec3 voxel_center(int ix, int iy, int iz) const {
        return origin + Vec3(ix * spacing[0], iy * spacing[1], iz * spacing[2]);
    }

    Vec3 outer_lo() const { return origin - 0.5 * spacing; }
    Vec3 outer_hi() const {
        return origin + Vec3((n[0] - 0.5) * spacing[0], (n[1] - 0.5) * spacing[1], (n[2] - 0.5) * spacing[2]);
    }

    double min_spacing() const { return spacing.minCoeff(); }
    double diameter() const { return (outer_hi() - outer_lo()).norm(); }

    bool same_shape(const Grid3& o) const {
        return n == o.n && (spacing - o.spacing).norm() == 0.0 && (origin - o.origin).norm() == 0.0;
    }

    /// Clip the line p + s*dir (unit dir) to the outer box. Returns false
    /// if the line misses the box; otherwise s0 < s1 bound the overlap.
    bool clip_line(const Vec3& p, const Vec3& dir, double& s0, double& s1) const;
};

class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(const Grid3& g) : grid_(g), data_(g.voxel_count(), 0.0) {}

    const Grid3& grid() const { return grid_; }
    double& operator[](std::int64_t i) { return data_[i]; }
    double operator[](std::int64_t i) const { return data_[i]; }
    double& at(int ix, int iy, int iz) { return data_[grid_.voxel_index(ix, iy, iz)]; }
    double at(int ix, int iy, int iz) const { return data_[grid_.voxel_index(ix, iy, iz)]; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

  private:
    Grid3 grid_;
    std::vector<double> data_;
};

/// Grid of symmetric m-tensor coefficients. Storage is voxel-major with
/// the dim_sym(m) components of one voxel contiguous, matching the field
/// file layout.
class SymTensorField {
  public:
    SymTensorField() : m_(0), ncomp_(1) {}
    SymTensorField(const Grid3& g, int m)
        : grid_(g), m_(m), ncomp_(dim_sym(m)), data_(g.voxel_count() * ncomp_, 0.0) {}

    const Grid3& grid() const { return grid_; }
    int order() const { return m_; }
    int components() const { return ncomp_; }

    double* voxel(std::int64_t vox) { return data_.data() + vox * ncomp_; }
    const double* voxel(std::int64_t vox) const { return data_.data() + vox * ncomp_; }
    double* voxel(int ix, int iy, int iz) { return voxel(grid_.voxel_index(ix, iy, iz)); }
    const double* voxel(int ix, int iy, int iz) const { return voxel(grid_.voxel_index(ix, iy, iz)); }

    SymTensor tensor_at(std::int64_t vox) const;
    void set_tensor(std::int64_t vox, const SymTensor& t);

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    /// Trilinear interpolation of all components at a physical point;
    /// the field is zero outside the grid. `out` must hold components().
    void interpolate(const Vec3& x, double* out) const;

    bool all_finite() const;

    SymTensorField& operator+=(const SymTensorField& rhs);
    SymTensorField& operator-=(const SymTensorField& rhs);
    SymTensorField& operator*=(double s);

  private:
    Grid3 grid_;
    int m_;
    int ncomp_;
    std::vector<double> data_;
};

/// Componentwise weighted L2 inner product (multinomial weights, voxel
/// volume included).
double field_inner(const SymTensorField& a, const SymTensorField& b);
double field_norm(const SymTensorField& a);

} // namespace trt
