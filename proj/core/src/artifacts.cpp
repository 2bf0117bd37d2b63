#include "trt/artifacts.hpp"

#include <cmath>

namespace trt {

ArtifactPrediction predict_artifacts(std::span<const BoundarySample> samples, const Curve& curve,
                                     const Grid3& grid, const ArtifactOptions& opts) {
    ArtifactPrediction out;
    const double span = curve.t_span();
    const int n = std::max(32, static_cast<int>(opts.samples_per_unit * span));
    const double dt = span / n;

    // gamma'(t).xi roots are searched per sample; precompute tangents.
    std::vector<Vec3> tangents(n + 1);
    std::vector<double> speed(n + 1);
    for (int i = 0; i <= n; ++i) {
        const Vec3 d = curve.derivative(curve.t_begin() + i * dt);
        tangents[i] = d;
        speed[i] = d.norm();
    }
    const double sweep_step = opts.step_factor * grid.min_spacing();

    for (const auto& s : samples) {
        const Vec3 xi = s.normal.normalized();
        double prev = tangents[0].dot(xi);
        for (int i = 0; i < n; ++i) {
            const double cur = tangents[i + 1].dot(xi);
            const bool sign_change = (prev < 0.0) != (cur < 0.0);
            const bool small = std::abs(prev) < opts.sigma_tol * speed[i];
            if (sign_change || small) {
                // Refine the root of g(t) = gamma'(t).xi by bisection when
                // bracketed, otherwise keep the node.
                double t = curve.t_begin() + i * dt;
                if (sign_change) {
                    double a = t, b = t + dt, ga = prev;
                    for (int it = 0; it < 40; ++it) {
                        const double mid = 0.5 * (a + b);
                        const double gm = curve.derivative(mid).dot(xi);
                        if ((ga < 0.0) != (gm < 0.0)) {
                            b = mid;
                        } else {
                            a = mid;
                            ga = gm;
                        }
                    }
                    t = 0.5 * (a + b);
                }
                const Vec3 gam = curve.position(t);
                const Vec3 d = s.x - gam;
                if (std::abs(d.dot(xi)) < opts.plane_tol && d.norm() > 1e-9) {
                    ArtifactLine line;
                    line.t = t;
                    line.x = s.x;
                    line.xi = xi;
                    line.tau = d.norm();
                    line.theta = d / line.tau;
                    double s0, s1;
                    if (grid.clip_line(gam, line.theta, s0, s1)) {
                        const int nsweep = std::max(1, static_cast<int>(std::ceil((s1 - s0) / sweep_step)));
                        for (int q = 0; q <= nsweep; ++q) {
                            const double tau_t = s0 + (s1 - s0) * q / nsweep;
                            if (std::abs(tau_t) < 1e-12) continue;
                            out.points.push_back(gam + tau_t * line.theta);
                            out.xi_scales.push_back(line.tau / tau_t);
                        }
                    }
                    out.lines.push_back(line);
                    // One generator per sign change is enough; skip ahead
                    // past this root neighbourhood.
                    i += 2;
                }
            }
            prev = cur;
        }
    }
    return out;
}

ScalarField edge_map(const SymTensorField& f) {
    const Grid3& g = f.grid();
    ScalarField out(g);
    const auto& mult = SymIndexTable::get(f.order()).multiplicities();
    const int nc = f.components();

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int iz = 0; iz < g.n[2]; ++iz) {
        for (int iy = 0; iy < g.n[1]; ++iy) {
            for (int ix = 0; ix < g.n[0]; ++ix) {
                double acc = 0.0;
                for (int c = 0; c < nc; ++c) {
                    Vec3 grad = Vec3::Zero();
                    // Central differences; the field is treated as zero
                    // outside the grid.
                    const auto val = [&](int x, int y, int z) -> double {
                        if (x < 0 || y < 0 || z < 0 || x >= g.n[0] || y >= g.n[1] || z >= g.n[2]) return 0.0;
                        return f.voxel(x, y, z)[c];
                    };
                    grad[0] = (val(ix + 1, iy, iz) - val(ix - 1, iy, iz)) / (2.0 * g.spacing[0]);
                    grad[1] = (val(ix, iy + 1, iz) - val(ix, iy - 1, iz)) / (2.0 * g.spacing[1]);
                    grad[2] = (val(ix, iy, iz + 1) - val(ix, iy, iz - 1)) / (2.0 * g.spacing[2]);
                    acc += mult[c] * grad.squaredNorm();
                }
                out.at(ix, iy, iz) = std::sqrt(acc);
            }
        }
    }
    return out;
}

Mask rasterize_mask(std::span<const Vec3> points, const Grid3& grid) {
    Mask mask(grid.voxel_count(), 0);
    for (const Vec3& p : points) {
        const int ix = static_cast<int>(std::lround((p[0] - grid.origin[0]) / grid.spacing[0]));
        const int iy = static_cast<int>(std::lround((p[1] - grid.origin[1]) / grid.spacing[1]));
        const int iz = static_cast<int>(std::lround((p[2] - grid.origin[2]) / grid.spacing[2]));
        if (ix < 0 || iy < 0 || iz < 0 || ix >= grid.n[0] || iy >= grid.n[1] || iz >= grid.n[2]) continue;
        mask[grid.voxel_index(ix, iy, iz)] = 1;
    }
    return mask;
}

Mask dilate_mask(const Mask& mask, const Grid3& grid, int radius_voxels) {
    if (radius_voxels <= 0) return mask;
    Mask out(mask.size(), 0);
    const int r = radius_voxels;
    const int r2 = radius_voxels * radius_voxels;
    std::vector<Eigen::Vector3i> offsets;
    for (int dz = -r; dz <= r; ++dz)
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx)
                if (dx * dx + dy * dy + dz * dz <= r2) offsets.push_back({dx, dy, dz});

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int iz = 0; iz < grid.n[2]; ++iz) {
        for (int iy = 0; iy < grid.n[1]; ++iy) {
            for (int ix = 0; ix < grid.n[0]; ++ix) {
                bool hit = false;
                for (const auto& o : offsets) {
                    const int x = ix + o[0], y = iy + o[1], z = iz + o[2];
                    if (x < 0 || y < 0 || z < 0 || x >= grid.n[0] || y >= grid.n[1] || z >= grid.n[2]) continue;
                    if (mask[grid.voxel_index(x, y, z)]) {
                        hit = true;
                        break;
                    }
                }
                if (hit) out[grid.voxel_index(ix, iy, iz)] = 1;
            }
        }
    }
    return out;
}

Mask mask_union(const Mask& a, const Mask& b) {
    Mask out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] | b[i];
    return out;
}

double masked_ncc(const ScalarField& a, const ScalarField& b, const Mask& mask) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

double energy_fraction_within(const ScalarField& e, const Mask& target, const Mask& exclude) {
    double inside = 0.0, total = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (exclude[i]) continue;
        const double e2 = e[i] * e[i];
        total += e2;
        if (target[i]) inside += e2;
    }
    return total > 0.0 ? inside / total : 1.0;
}

} // namespace trt
