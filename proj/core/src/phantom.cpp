#include "trt/phantom.hpp"

#include <cmath>

namespace trt {

namespace {

double primitive_value(const PhantomPrimitive& p, const Vec3& x) {
    const Vec3 d = x - p.center;
    const double q = (d.array() / p.radii.array()).matrix().squaredNorm();
    switch (p.kind) {
        case PrimitiveKind::Ball:
        case PrimitiveKind::Ellipsoid:
            return q <= 1.0 ? 1.0 : 0.0;
        case PrimitiveKind::Gaussian:
            return std::exp(-0.5 * q);
    }
    return 0.0;
}

double primitive_extent(const PhantomPrimitive& p) {
    const double rmax = p.radii.maxCoeff();
    return p.kind == PrimitiveKind::Gaussian ? 4.0 * rmax : rmax;
}

} // namespace

SymTensorField make_phantom(const Phantom& phantom, const Grid3& grid, const Ball& region) {
    const int nc = dim_sym(phantom.m);
    for (const auto& p : phantom.primitives) {
        if (p.amplitude.order() != phantom.m)
            throw ConfigError("phantom: primitive amplitude order does not match the phantom order");
        if (p.radii.minCoeff() <= 0.0) throw ConfigError("phantom: radii must be positive");
        const double ext = primitive_extent(p);
        if ((p.center - region.center).norm() + ext > region.radius)
            throw ConfigError("phantom: primitive escapes the visibility ball");
        const Vec3 lo = grid.outer_lo(), hi = grid.outer_hi();
        for (int a = 0; a < 3; ++a)
            if (p.center[a] - ext <= lo[a] + grid.spacing[a] || p.center[a] + ext >= hi[a] - grid.spacing[a])
                throw ConfigError("phantom: primitive support is not strictly inside the grid");
    }

    SymTensorField out(grid, phantom.m);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int iz = 0; iz < grid.n[2]; ++iz) {
        for (int iy = 0; iy < grid.n[1]; ++iy) {
            for (int ix = 0; ix < grid.n[0]; ++ix) {
                const Vec3 x = grid.voxel_center(ix, iy, iz);
                double* vox = out.voxel(ix, iy, iz);
                for (const auto& p : phantom.primitives) {
                    const double v = primitive_value(p, x);
                    if (v == 0.0) continue;
                    for (int c = 0; c < nc; ++c) vox[c] += v * p.amplitude[c];
                }
            }
        }
    }
    return out;
}

std::vector<BoundarySample> phantom_boundary_samples(const Phantom& phantom, int n_per_primitive) {
    std::vector<BoundarySample> out;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (std::size_t pi = 0; pi < phantom.primitives.size(); ++pi) {
        const auto& p = phantom.primitives[pi];
        if (p.kind == PrimitiveKind::Gaussian) continue;
        for (int i = 0; i < n_per_primitive; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / n_per_primitive;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = golden * i;
            const Vec3 u(r * std::cos(phi), r * std::sin(phi), z);
            BoundarySample s;
            s.x = p.center + (u.array() * p.radii.array()).matrix();
            // Outward normal of the ellipsoid: gradient of the level set.
            const Vec3 g = (u.array() / p.radii.array()).matrix();
            s.normal = g.normalized();
            s.primitive = static_cast<int>(pi);
            out.push_back(s);
        }
    }
    return out;
}

} // namespace trt
