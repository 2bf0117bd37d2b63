#include "trt/transform.hpp"

#include <array>
#include <cmath>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace trt {

namespace {

constexpr int kMaxOrder = 8;

/// Allocation-free evaluation of the transverse patterns
/// omega1^(.(m-i)) (.) omega2^(.i) for i = 0..m. Power tables and the
/// product contraction are prebuilt per order as index plans.
class PatternPlan {
  public:
    static const PatternPlan& get(int m) {
        if (m < 0 || m > kMaxOrder) throw NumericalError("tensor order out of supported range");
        static std::array<const PatternPlan*, kMaxOrder + 1> plans{};
        static std::mutex mutex;
        std::lock_guard<std::mutex> lock(mutex);
        if (!plans[m]) plans[m] = new PatternPlan(m);
        return *plans[m];
    }

    int order() const { return m_; }
    int ncomp() const { return ncomp_; }

    /// out must hold (m+1) * dim_sym(m) doubles; row i is pattern i
    /// (unweighted components).
    void fill(const Vec3& w1, const Vec3& w2, double* out) const {
        double pw1[kPowBuf], pw2[kPowBuf];
        fill_powers(w1, pw1);
        fill_powers(w2, pw2);
        for (int i = 0; i <= m_; ++i) {
            double* row = out + std::size_t(i) * ncomp_;
            for (int c = 0; c < ncomp_; ++c) row[c] = 0.0;
            for (const Term& t : terms_[i]) row[t.out] += t.coeff * pw1[t.a] * pw2[t.b];
        }
    }

  private:
    struct Term {
        std::int16_t out, a, b;
        double coeff;
    };
    struct PowStep {
        std::int16_t dst, src;
        std::int8_t coord;
    };
    static constexpr int kPowBuf = 140; // sum of dim_sym(p), p <= kMaxOrder

    explicit PatternPlan(int m) : m_(m), ncomp_(dim_sym(m)) {
        pow_offset_.resize(m + 1);
        int off = 0;
        for (int p = 0; p <= m; ++p) {
            pow_offset_[p] = off;
            off += dim_sym(p);
        }
        // Incremental power recurrence: v^p component (a,b,c) equals
        // v[coord] times a v^(p-1) component.
        for (int p = 1; p <= m; ++p) {
            const auto& tp = SymIndexTable::get(p);
            for (int r = 0; r < tp.size(); ++r) {
                MultiIndex idx = tp.index(r);
                PowStep step;
                step.dst = static_cast<std::int16_t>(pow_offset_[p] + r);
                if (idx.a > 0) {
                    step.coord = 0;
                    --idx.a;
                } else if (idx.b > 0) {
                    step.coord = 1;
                    --idx.b;
                } else {
                    step.coord = 2;
                    --idx.c;
                }
                step.src = static_cast<std::int16_t>(pow_offset_[p - 1] + idx.rank());
                pow_steps_.push_back(step);
            }
        }
        // Product plan per component i: (w1^(m-i) (.) w2^i)_J
        //   = 1/mult(J) * sum_{A+B=J} mult(A) mult(B) w1^A w2^B.
        terms_.resize(m + 1);
        const auto& tm = SymIndexTable::get(m);
        for (int i = 0; i <= m; ++i) {
            const int p = m - i, q = i;
            const auto& ta = SymIndexTable::get(p);
            const auto& tb = SymIndexTable::get(q);
            for (int ra = 0; ra < ta.size(); ++ra) {
                const MultiIndex A = ta.index(ra);
                for (int rb = 0; rb < tb.size(); ++rb) {
                    const MultiIndex B = tb.index(rb);
                    const MultiIndex J{A.a + B.a, A.b + B.b, A.c + B.c};
                    Term t;
                    t.out = static_cast<std::int16_t>(J.rank());
                    t.a = static_cast<std::int16_t>(pow_offset_[p] + ra);
                    t.b = static_cast<std::int16_t>(pow_offset_[q] + rb);
                    t.coeff = ta.multiplicity(ra) * tb.multiplicity(rb) / tm.multiplicity(t.out);
                    terms_[i].push_back(t);
                }
            }
        }
    }

    void fill_powers(const Vec3& v, double* buf) const {
        buf[0] = 1.0;
        const double vv[3] = {v[0], v[1], v[2]};
        for (const PowStep& s : pow_steps_) buf[s.dst] = vv[int(s.coord)] * buf[s.src];
    }

    int m_, ncomp_;
    std::vector<int> pow_offset_;
    std::vector<PowStep> pow_steps_;
    std::vector<std::vector<Term>> terms_;
};

struct TrilinearStencil {
    std::int64_t vox[8];
    double w[8];
    int n = 0;
};

inline void trilinear_stencil(const Grid3& g, const Vec3& x, TrilinearStencil& st) {
    st.n = 0;
    const double ux = (x[0] - g.origin[0]) / g.spacing[0];
    const double uy = (x[1] - g.origin[1]) / g.spacing[1];
    const double uz = (x[2] - g.origin[2]) / g.spacing[2];
    const int ix = static_cast<int>(std::floor(ux));
    const int iy = static_cast<int>(std::floor(uy));
    const int iz = static_cast<int>(std::floor(uz));
    const double fx = ux - ix, fy = uy - iy, fz = uz - iz;
    const double wx[2] = {1.0 - fx, fx};
    const double wy[2] = {1.0 - fy, fy};
    const double wz[2] = {1.0 - fz, fz};
    for (int dz = 0; dz < 2; ++dz) {
        const int z = iz + dz;
        if (z < 0 || z >= g.n[2]) continue;
        for (int dy = 0; dy < 2; ++dy) {
            const int y = iy + dy;
            if (y < 0 || y >= g.n[1]) continue;
            for (int dx = 0; dx < 2; ++dx) {
                const int xx = ix + dx;
                if (xx < 0 || xx >= g.n[0]) continue;
                const double w = wx[dx] * wy[dy] * wz[dz];
                if (w == 0.0) continue;
                st.vox[st.n] = g.voxel_index(xx, y, z);
                st.w[st.n] = w;
                ++st.n;
            }
        }
    }
}

/// Midpoint-rule traversal of the line p0 + s*dir clipped to the grid
/// and |s| <= cap. fn(point, ds) is called per sample.
template <class F>
inline void for_each_line_sample(const Grid3& grid, const Vec3& p0, const Vec3& dir, double step, double cap,
                                 F&& fn) {
    double s0, s1;
    if (!grid.clip_line(p0, dir, s0, s1)) return;
    s0 = std::max(s0, -cap);
    s1 = std::min(s1, cap);
    if (!(s0 < s1)) return;
    const int ns = std::max(1, static_cast<int>(std::ceil((s1 - s0) / step)));
    const double ds = (s1 - s0) / ns;
    for (int q = 0; q < ns; ++q) {
        const double s = s0 + (q + 0.5) * ds;
        fn(Vec3(p0 + s * dir), ds);
    }
}

/// Patterns with the multinomial weights folded in; the transverse ray
/// integrand is then a plain dot product with interpolated coefficients.
void weighted_patterns(const PatternPlan& plan, const Frame& frame, std::vector<double>& buf) {
    const int m = plan.order(), nc = plan.ncomp();
    buf.resize(std::size_t(m + 1) * nc);
    plan.fill(frame.omega1, frame.omega2, buf.data());
    const auto& mult = SymIndexTable::get(m).multiplicities();
    for (int i = 0; i <= m; ++i)
        for (int c = 0; c < nc; ++c) buf[std::size_t(i) * nc + c] *= mult[c];
}

std::vector<double> integrate_line(const SymTensorField& f, const Vec3& source, const Vec3& omega,
                                   const double* wpat, int m, double step, double cap) {
    const int nc = f.components();
    std::vector<double> vals(m + 1, 0.0);
    double comps[64];
    for_each_line_sample(f.grid(), source, omega, step, cap, [&](const Vec3& x, double ds) {
        f.interpolate(x, comps);
        for (int i = 0; i <= m; ++i) {
            const double* w = wpat + std::size_t(i) * nc;
            double acc = 0.0;
            for (int c = 0; c < nc; ++c) acc += w[c] * comps[c];
            vals[i] += acc * ds;
        }
    });
    return vals;
}

} // namespace

void AcquisitionGeometry::validate(const Grid3& grid) const {
    if (!curve) throw ConfigError("acquisition: no curve");
    if (n_t <= 0 || n_theta1 <= 0 || n_theta2 <= 0) throw ConfigError("acquisition: counts must be positive");
    if (!(theta_margin > 0.0) || theta_margin >= M_PI / 2)
        throw ConfigError("acquisition: theta_margin must be in (0, pi/2)");
    if (!(step > 0.0)) throw ConfigError("acquisition: step must be positive");
    if (grid.voxel_count() > 0 && step > 0.5 * grid.min_spacing() + 1e-15)
        throw ConfigError("acquisition: step must be at most half the voxel spacing");
}

bool Sinogram::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::vector<double> trt_line(const SymTensorField& f, const Curve& curve, double t, double theta1,
                             double theta2, double step, double ray_extent) {
    const Frame frame = frame_from_angles(theta1, theta2);
    return trt_line_frame(f, curve.position(t), frame, step, ray_extent);
}

std::vector<double> trt_line_frame(const SymTensorField& f, const Vec3& source, const Frame& frame,
                                   double step, double ray_extent) {
    const int m = f.order();
    const PatternPlan& plan = PatternPlan::get(m);
    std::vector<double> wpat;
    weighted_patterns(plan, frame, wpat);
    return integrate_line(f, source, frame.omega, wpat.data(), m, step, ray_extent);
}

Sinogram forward(const SymTensorField& f, const AcquisitionGeometry& geom) {
    geom.validate(f.grid());
    const int m = f.order();
    const int nc = f.components();
    const PatternPlan& plan = PatternPlan::get(m);
    Sinogram sino(geom, m);

    // Direction-dependent data shared across all curve samples.
    const std::int64_t ndir = std::int64_t(geom.n_theta1) * geom.n_theta2;
    std::vector<Vec3> omegas(ndir);
    std::vector<double> wpats(ndir * (m + 1) * nc);
    {
        std::vector<double> buf;
        for (int a = 0; a < geom.n_theta1; ++a) {
            for (int b = 0; b < geom.n_theta2; ++b) {
                const Frame fr = frame_from_angles(geom.theta1_sample(a), geom.theta2_sample(b));
                const std::int64_t d = std::int64_t(a) * geom.n_theta2 + b;
                omegas[d] = fr.omega;
                weighted_patterns(plan, fr, buf);
                std::copy(buf.begin(), buf.end(), wpats.begin() + d * (m + 1) * nc);
            }
        }
    }

    std::vector<Vec3> sources(geom.n_t);
    for (int j = 0; j < geom.n_t; ++j) sources[j] = geom.curve->position(geom.t_sample(j));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (int j = 0; j < geom.n_t; ++j) {
        for (std::int64_t d = 0; d < ndir; ++d) {
            const int a = static_cast<int>(d / geom.n_theta2);
            const int b = static_cast<int>(d % geom.n_theta2);
            const std::vector<double> vals = integrate_line(f, sources[j], omegas[d],
                                                            wpats.data() + d * (m + 1) * nc, m, geom.step,
                                                            geom.ray_extent);
            for (int i = 0; i <= m; ++i) sino.at(i, j, a, b) = vals[i];
        }
    }
    return sino;
}

namespace {

SymTensorField backproject_exact(const Sinogram& g, const Grid3& grid) {
    const AcquisitionGeometry& geom = g.geometry();
    const int m = g.order();
    const int nc = dim_sym(m);
    const PatternPlan& plan = PatternPlan::get(m);

    const std::int64_t ndir = std::int64_t(geom.n_theta1) * geom.n_theta2;
    std::vector<double> wpats(ndir * (m + 1) * nc);
    {
        std::vector<double> buf;
        for (std::int64_t d = 0; d < ndir; ++d) {
            const int a = static_cast<int>(d / geom.n_theta2);
            const int b = static_cast<int>(d % geom.n_theta2);
            const Frame fr = frame_from_angles(geom.theta1_sample(a), geom.theta2_sample(b));
            weighted_patterns(plan, fr, buf);
            std::copy(buf.begin(), buf.end(), wpats.begin() + d * (m + 1) * nc);
        }
    }
    std::vector<Vec3> sources(geom.n_t);
    for (int j = 0; j < geom.n_t; ++j) sources[j] = geom.curve->position(geom.t_sample(j));
    std::vector<Vec3> omegas(ndir);
    for (std::int64_t d = 0; d < ndir; ++d)
        omegas[d] = frame_from_angles(geom.theta1_sample(int(d / geom.n_theta2)),
                                      geom.theta2_sample(int(d % geom.n_theta2)))
                        .omega;

    // Fixed chunking of the line index space keeps the accumulation
    // order independent of the thread count.
    const std::int64_t nlines = geom.line_count();
    const int nchunks = static_cast<int>(std::min<std::int64_t>(64, std::max<std::int64_t>(1, nlines)));
    std::vector<SymTensorField> partial(nchunks);
    for (int c = 0; c < nchunks; ++c) partial[c] = SymTensorField(grid, m);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (int c = 0; c < nchunks; ++c) {
        SymTensorField& acc = partial[c];
        const std::int64_t lo = nlines * c / nchunks;
        const std::int64_t hi = nlines * (c + 1) / nchunks;
        TrilinearStencil st;
        std::vector<double> gi(m + 1);
        for (std::int64_t l = lo; l < hi; ++l) {
            const int b = static_cast<int>(l % geom.n_theta2);
            const int a = static_cast<int>((l / geom.n_theta2) % geom.n_theta1);
            const int j = static_cast<int>(l / ndir);
            bool any = false;
            for (int i = 0; i <= m; ++i) {
                gi[i] = g.at(i, j, a, b);
                any = any || gi[i] != 0.0;
            }
            if (!any) continue;
            const std::int64_t d = std::int64_t(a) * geom.n_theta2 + b;
            const double* wp = wpats.data() + d * (m + 1) * nc;
            for_each_line_sample(grid, sources[j], omegas[d], geom.step, geom.ray_extent,
                                 [&](const Vec3& x, double ds) {
                                     trilinear_stencil(grid, x, st);
                                     for (int s = 0; s < st.n; ++s) {
                                         double* vox = acc.voxel(st.vox[s]);
                                         const double w = st.w[s] * ds;
                                         for (int i = 0; i <= m; ++i) {
                                             const double giw = gi[i] * w;
                                             const double* pat = wp + std::size_t(i) * nc;
                                             for (int cc = 0; cc < nc; ++cc) vox[cc] += giw * pat[cc];
                                         }
                                     }
                                 });
        }
    }
    SymTensorField out(grid, m);
    for (int c = 0; c < nchunks; ++c) out += partial[c];
    return out;
}

SymTensorField backproject_geometric(const Sinogram& g, const Grid3& grid, BackprojectStats* stats) {
    const AcquisitionGeometry& geom = g.geometry();
    const int m = g.order();
    const int nc = dim_sym(m);
    const PatternPlan& plan = PatternPlan::get(m);
    const double dt = geom.dt();
    const double th1_lo = geom.theta_margin, th1_hi = M_PI - geom.theta_margin;
    const double dth1 = geom.dtheta1(), dth2 = geom.dtheta2();

    std::vector<Vec3> sources(geom.n_t);
    for (int j = 0; j < geom.n_t; ++j) sources[j] = geom.curve->position(geom.t_sample(j));

    SymTensorField out(grid, m);
    std::int64_t skipped = 0, total = 0;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : skipped, total)
#endif
    for (int iz = 0; iz < grid.n[2]; ++iz) {
        double pat[9 * 45];
        double gi[9];
        for (int iy = 0; iy < grid.n[1]; ++iy) {
            for (int ix = 0; ix < grid.n[0]; ++ix) {
                const Vec3 x = grid.voxel_center(ix, iy, iz);
                double* vox = out.voxel(ix, iy, iz);
                for (int j = 0; j < geom.n_t; ++j) {
                    ++total;
                    const Vec3 v = x - sources[j];
                    const double r2 = v.squaredNorm();
                    const double r = std::sqrt(r2);
                    if (r < 1e-12) {
                        ++skipped;
                        continue;
                    }
                    const Vec3 omega = v / r;
                    double th1, th2;
                    direction_to_angles(omega, th1, th2);
                    if (th1 < th1_lo || th1 > th1_hi) {
                        ++skipped;
                        continue;
                    }
                    // Bilinear data lookup: clamp theta1 at the chart edge,
                    // wrap theta2.
                    double u1 = (th1 - th1_lo) / dth1 - 0.5;
                    u1 = std::clamp(u1, 0.0, double(geom.n_theta1 - 1));
                    const int a0 = std::min(static_cast<int>(u1), geom.n_theta1 - 2 >= 0 ? geom.n_theta1 - 2 : 0);
                    const double f1 = u1 - a0;
                    double u2 = th2 / dth2 - 0.5;
                    int b0 = static_cast<int>(std::floor(u2));
                    const double f2 = u2 - b0;
                    b0 = ((b0 % geom.n_theta2) + geom.n_theta2) % geom.n_theta2;
                    const int b1 = (b0 + 1) % geom.n_theta2;
                    const int a1 = std::min(a0 + 1, geom.n_theta1 - 1);
                    const double w00 = (1.0 - f1) * (1.0 - f2), w01 = (1.0 - f1) * f2;
                    const double w10 = f1 * (1.0 - f2), w11 = f1 * f2;

                    const Frame fr = frame_from_angles(th1, th2);
                    plan.fill(fr.omega1, fr.omega2, pat);
                    const double scale = dt / r2;
                    for (int i = 0; i <= m; ++i)
                        gi[i] = w00 * g.at(i, j, a0, b0) + w01 * g.at(i, j, a0, b1) +
                                w10 * g.at(i, j, a1, b0) + w11 * g.at(i, j, a1, b1);
                    for (int i = 0; i <= m; ++i) {
                        const double giw = gi[i] * scale;
                        if (giw == 0.0) continue;
                        const double* p = pat + std::size_t(i) * nc;
                        for (int cc = 0; cc < nc; ++cc) vox[cc] += giw * p[cc];
                    }
                }
            }
        }
    }
    if (stats) {
        stats->skipped_directions = skipped;
        stats->total_directions = total;
    }
    return out;
}

} // namespace

SymTensorField backproject(const Sinogram& g, const Grid3& grid, BackprojectMode mode, BackprojectStats* stats) {
    if (grid.voxel_count() <= 0) throw NumericalError("backproject: empty grid");
    if (mode == BackprojectMode::ExactDiscrete) return backproject_exact(g, grid);
    return backproject_geometric(g, grid, stats);
}

SymTensorField normal(const SymTensorField& f, const AcquisitionGeometry& geom, BackprojectMode mode,
                      BackprojectStats* stats) {
    return backproject(forward(f, geom), f.grid(), mode, stats);
}

std::vector<SymTensor> normal_at_points(const SymTensorField& f, const AcquisitionGeometry& geom,
                                        std::span<const Vec3> points, const std::optional<Vec3>& gauge_xi) {
    geom.validate(f.grid());
    const int m = f.order();
    const int nc = f.components();
    const PatternPlan& plan = PatternPlan::get(m);
    const double dt = geom.dt();
    const double th1_lo = geom.theta_margin, th1_hi = M_PI - geom.theta_margin;

    std::vector<Vec3> sources(geom.n_t);
    for (int j = 0; j < geom.n_t; ++j) sources[j] = geom.curve->position(geom.t_sample(j));

    std::vector<SymTensor> out(points.size(), SymTensor(m));
    for (std::size_t p = 0; p < points.size(); ++p) {
        const Vec3 x = points[p];
        // Fixed chunking over curve samples for a thread-count
        // independent summation order.
        const int nchunks = 16;
        std::vector<Eigen::VectorXd> partial(nchunks, Eigen::VectorXd::Zero(nc));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
        for (int c = 0; c < nchunks; ++c) {
            double pat[9 * 45];
            std::vector<double> wpat;
            Eigen::VectorXd& acc = partial[c];
            const int lo = geom.n_t * c / nchunks;
            const int hi = geom.n_t * (c + 1) / nchunks;
            for (int j = lo; j < hi; ++j) {
                const Vec3 v = x - sources[j];
                const double r = v.norm();
                if (r < 1e-12) continue;
                const Vec3 omega = v / r;
                double th1, th2;
                direction_to_angles(omega, th1, th2);
                if (th1 < th1_lo || th1 > th1_hi) continue;
                const Frame fr = gauge_xi ? rotated_frame(omega, *gauge_xi)
                                          : frame_from_angles(th1, th2);
                weighted_patterns(plan, fr, wpat);
                const std::vector<double> vals =
                    integrate_line(f, sources[j], fr.omega, wpat.data(), m, geom.step, geom.ray_extent);
                plan.fill(fr.omega1, fr.omega2, pat);
                const double scale = dt / (r * r);
                for (int i = 0; i <= m; ++i) {
                    const double giw = vals[i] * scale;
                    for (int cc = 0; cc < nc; ++cc) acc[cc] += giw * pat[std::size_t(i) * nc + cc];
                }
            }
        }
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(nc);
        for (int c = 0; c < nchunks; ++c) sum += partial[c];
        out[p] = SymTensor(m, sum);
    }
    return out;
}

} // namespace trt
