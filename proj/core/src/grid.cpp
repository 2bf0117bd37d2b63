#include "trt/grid.hpp"

#include <cmath>

namespace trt {

Grid3 Grid3::box(const Vec3& lo, const Vec3& hi, const Eigen::Vector3i& counts) {
    Grid3 g;
    g.n = counts;
    for (int a = 0; a < 3; ++a) {
        if (counts[a] <= 0) throw NumericalError("grid counts must be positive");
        g.spacing[a] = (hi[a] - lo[a]) / counts[a];
        g.origin[a] = lo[a] + 0.5 * g.spacing[a];
    }
    return g;
}

bool Grid3::clip_line(const Vec3& p, const Vec3& dir, double& s0, double& s1) const {
    const Vec3 lo = outer_lo(), hi = outer_hi();
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (std::abs(dir[a]) < 1e-300) {
            if (p[a] < lo[a] || p[a] > hi[a]) return false;
            continue;
        }
        double ta = (lo[a] - p[a]) / dir[a];
        double tb = (hi[a] - p[a]) / dir[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 >= t1) return false;
    }
    s0 = t0;
    s1 = t1;
    return s0 < s1;
}

SymTensor SymTensorField::tensor_at(std::int64_t vox) const {
    SymTensor t(m_);
    const double* p = voxel(vox);
    for (int c = 0; c < ncomp_; ++c) t[c] = p[c];
    return t;
}

void SymTensorField::set_tensor(std::int64_t vox, const SymTensor& t) {
    if (t.order() != m_) throw NumericalError("field/tensor order mismatch");
    double* p = voxel(vox);
    for (int c = 0; c < ncomp_; ++c) p[c] = t[c];
}

void SymTensorField::interpolate(const Vec3& x, double* out) const {
    for (int c = 0; c < ncomp_; ++c) out[c] = 0.0;
    const double ux = (x[0] - grid_.origin[0]) / grid_.spacing[0];
    const double uy = (x[1] - grid_.origin[1]) / grid_.spacing[1];
    const double uz = (x[2] - grid_.origin[2]) / grid_.spacing[2];
    const int ix = static_cast<int>(std::floor(ux));
    const int iy = static_cast<int>(std::floor(uy));
    const int iz = static_cast<int>(std::floor(uz));
    if (ix < -1 || ix >= grid_.n[0] || iy < -1 || iy >= grid_.n[1] || iz < -1 || iz >= grid_.n[2]) return;
    const double fx = ux - ix, fy = uy - iy, fz = uz - iz;
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    const double wz[2] = {1.0 - fz, fz};
    for (int dz = 0; dz < 2; ++dz) {
        const int z = iz + dz;
        if (z < 0 || z >= grid_.n[2]) continue;
        for (int dy = 0; dy < 2; ++dy) {
            const int y = iy + dy;
            if (y < 0 || y >= grid_.n[1]) continue;
            const double wzy = wz[dz] * wy[dy];
            for (int dx = 0; dx < 2; ++dx) {
                const int xx = ix + dx;
                if (xx < 0 || xx >= grid_.n[0]) continue;
                const double w = wzy * wx[dx];
                if (w == 0.0) continue;
                const double* p = voxel(xx, y, z);
                for (int c = 0; c < ncomp_; ++c) out[c] += w * p[c];
            }
        }
    }
}

bool SymTensorField::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

SymTensorField& SymTensorField::operator+=(const SymTensorField& rhs) {
    if (!grid_.same_shape(rhs.grid_) || m_ != rhs.m_) throw NumericalError("field shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

SymTensorField& SymTensorField::operator-=(const SymTensorField& rhs) {
    if (!grid_.same_shape(rhs.grid_) || m_ != rhs.m_) throw NumericalError("field shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

SymTensorField& SymTensorField::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double field_inner(const SymTensorField& a, const SymTensorField& b) {
    if (!a.grid().same_shape(b.grid()) || a.order() != b.order())
        throw NumericalError("field shape mismatch");
    const auto& mult = SymIndexTable::get(a.order()).multiplicities();
    const int nc = a.components();
    double acc = 0.0;
    const std::int64_t nvox = a.grid().voxel_count();
    for (std::int64_t v = 0; v < nvox; ++v) {
        const double* pa = a.voxel(v);
        const double* pb = b.voxel(v);
        for (int c = 0; c < nc; ++c) acc += mult[c] * pa[c] * pb[c];
    }
    return acc * a.grid().spacing.prod();
}

double field_norm(const SymTensorField& a) { return std::sqrt(field_inner(a, a)); }

} // namespace trt
