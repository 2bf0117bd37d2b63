#include "trt/parametrix.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace trt {

namespace {

std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

class ConstantPatch : public PatchMultiplier {
  public:
    ConstantPatch(const Eigen::MatrixXd& m, double pw) : matrix_(m), pw_(pw) {}
    Eigen::MatrixXd eval(const Vec3& xi) const override {
        if (pw_ == 0.0) return matrix_;
        const double r = xi.norm();
        return std::pow(r, pw_) * matrix_;
    }

  private:
    Eigen::MatrixXd matrix_;
    double pw_;
};

/// Direction table over the spherical chart with bilinear lookup
/// (theta2 wraps, theta1 clamps at a small polar margin).
class TablePatch : public PatchMultiplier {
  public:
    TablePatch(const SymbolEvaluator& evaluator, const Vec3& center, int n1, int n2, double calibration) {
        n1_ = n1;
        n2_ = n2;
        margin_ = 0.5 * M_PI / n1;
        const int nc = dim_sym(evaluator.order());
        nc_ = nc;
        table_.resize(std::size_t(n1) * n2);
        bool any = false;
        for (int a = 0; a < n1; ++a) {
            const double th1 = margin_ + (M_PI - 2.0 * margin_) * (a + 0.5) / n1;
            for (int b = 0; b < n2; ++b) {
                const double th2 = 2.0 * M_PI * (b + 0.5) / n2;
                const Vec3 dir(std::cos(th1), std::sin(th1) * std::cos(th2), std::sin(th1) * std::sin(th2));
                Eigen::MatrixXd m = calibration * evaluator.multiplier_matrix(center, dir);
                any = any || m.cwiseAbs().maxCoeff() > 0.0;
                table_[std::size_t(a) * n2 + b] = std::move(m);
            }
        }
        empty_ = !any;
    }

    bool empty() const { return empty_; }

    Eigen::MatrixXd eval(const Vec3& xi) const override {
        const double r = xi.norm();
        if (r == 0.0 || empty_) return Eigen::MatrixXd::Zero(nc_, nc_);
        const Vec3 d = xi / r;
        double th1, th2;
        direction_to_angles(d, th1, th2);
        const double dth1 = (M_PI - 2.0 * margin_) / n1_;
        const double dth2 = 2.0 * M_PI / n2_;
        double u1 = (th1 - margin_) / dth1 - 0.5;
        u1 = std::clamp(u1, 0.0, double(n1_ - 1));
        const int a0 = std::min(static_cast<int>(u1), std::max(n1_ - 2, 0));
        const int a1 = std::min(a0 + 1, n1_ - 1);
        const double f1 = u1 - a0;
        double u2 = th2 / dth2 - 0.5;
        int b0 = static_cast<int>(std::floor(u2));
        const double f2 = u2 - b0;
        b0 = ((b0 % n2_) + n2_) % n2_;
        const int b1 = (b0 + 1) % n2_;
        Eigen::MatrixXd m = (1.0 - f1) * (1.0 - f2) * table_[std::size_t(a0) * n2_ + b0] +
                            (1.0 - f1) * f2 * table_[std::size_t(a0) * n2_ + b1] +
                            f1 * (1.0 - f2) * table_[std::size_t(a1) * n2_ + b0] +
                            f1 * f2 * table_[std::size_t(a1) * n2_ + b1];
        m *= r;
        return m;
    }

  private:
    std::vector<Eigen::MatrixXd> table_;
    int n1_ = 0, n2_ = 0, nc_ = 0;
    double margin_ = 0.0;
    bool empty_ = false;
};

} // namespace

ConstantMultiplier::ConstantMultiplier(Eigen::MatrixXd matrix, double radial_power, int m)
    : matrix_(std::move(matrix)), radial_power_(radial_power), m_(m) {
    if (matrix_.rows() != dim_sym(m) || matrix_.cols() != dim_sym(m))
        throw NumericalError("ConstantMultiplier: matrix size does not match the tensor order");
}

std::unique_ptr<PatchMultiplier> ConstantMultiplier::at(const Vec3&) const {
    return std::make_unique<ConstantPatch>(matrix_, radial_power_);
}

ParametrixMultiplier::ParametrixMultiplier(const SymbolEvaluator& evaluator, int table_n1, int table_n2,
                                           double calibration)
    : evaluator_(&evaluator), n1_(table_n1), n2_(table_n2), calibration_(calibration) {
    if (table_n1 < 4 || table_n2 < 8) throw ConfigError("parametrix: direction table too small");
}

int ParametrixMultiplier::order() const { return evaluator_->order(); }

std::unique_ptr<PatchMultiplier> ParametrixMultiplier::at(const Vec3& center) const {
    return std::make_unique<TablePatch>(*evaluator_, center, n1_, n2_, calibration_);
}

SymTensorField apply_parametrix(const SymTensorField& g, const MultiplierField& multiplier,
                                const PatchConfig& patching, ParametrixStats* stats) {
    const Grid3& grid = g.grid();
    const int m = g.order();
    if (multiplier.order() != m) throw NumericalError("apply_parametrix: multiplier order mismatch");
    const int nc = g.components();
    const int P = patching.patch;
    if (P < 4 || P % 2 != 0) throw ConfigError("patching: patch must be even and at least 4");
    const int hop = P / 2;
    for (int a = 0; a < 3; ++a) {
        if (grid.n[a] % hop != 0 || grid.n[a] < P)
            throw ConfigError("patching: grid dimensions must be multiples of patch/2 and at least patch");
    }
    if (patching.pad_factor < 1 || patching.pad_factor > 4) throw ConfigError("patching: pad_factor in 1..4");
    const int N = P * patching.pad_factor; // FFT edge
    const std::int64_t nreal = std::int64_t(N) * N * N;
    const std::int64_t ncplx = std::int64_t(N) * N * (N / 2 + 1);

    // sqrt-Hann analysis and synthesis windows: their product sums to 1
    // over the hop lattice.
    std::vector<double> win(P);
    for (int i = 0; i < P; ++i) win[i] = std::sqrt(0.5 * (1.0 - std::cos(2.0 * M_PI * i / P)));

    // Patch origins: one ring of half-overhang on each side completes the
    // partition of unity on the whole grid.
    std::vector<Eigen::Vector3i> origins;
    for (int oz = -hop; oz + hop <= grid.n[2]; oz += hop)
        for (int oy = -hop; oy + hop <= grid.n[1]; oy += hop)
            for (int ox = -hop; ox + hop <= grid.n[0]; ox += hop) origins.push_back({ox, oy, oz});

    // Shared FFTW plans; executed on per-thread buffers via the
    // new-array interface.
    fftw_plan plan_fwd, plan_bwd;
    double* proto_r;
    fftw_complex* proto_c;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        proto_r = fftw_alloc_real(nreal);
        proto_c = fftw_alloc_complex(ncplx);
        plan_fwd = fftw_plan_dft_r2c_3d(N, N, N, proto_r, proto_c, FFTW_ESTIMATE);
        plan_bwd = fftw_plan_dft_c2r_3d(N, N, N, proto_c, proto_r, FFTW_ESTIMATE);
    }

    const int nchunks = 8; // fixed accumulation layout, thread-count independent
    std::vector<SymTensorField> partial(nchunks);
    for (int c = 0; c < nchunks; ++c) partial[c] = SymTensorField(grid, m);
    const int npatch = static_cast<int>(origins.size());
    int zero_patches = 0;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : zero_patches)
#endif
    for (int chunk = 0; chunk < nchunks; ++chunk) {
        std::vector<double*> re(nc);
        std::vector<fftw_complex*> sp(nc);
        for (int c = 0; c < nc; ++c) {
            re[c] = fftw_alloc_real(nreal);
            sp[c] = fftw_alloc_complex(ncplx);
        }
        std::vector<Eigen::VectorXd> vre(ncplx ? 1 : 0);
        Eigen::VectorXd vr(nc), vi(nc);
        SymTensorField& acc = partial[chunk];

        const int lo = npatch * chunk / nchunks;
        const int hi = npatch * (chunk + 1) / nchunks;
        for (int pi = lo; pi < hi; ++pi) {
            const Eigen::Vector3i o = origins[pi];
            const Vec3 center = grid.origin + Vec3((o[0] + hop - 0.5) * grid.spacing[0],
                                                   (o[1] + hop - 0.5) * grid.spacing[1],
                                                   (o[2] + hop - 0.5) * grid.spacing[2]);
            const auto patch_mult = multiplier.at(center);

            // Windowed analysis into the zero-padded cube.
            for (int c = 0; c < nc; ++c) std::fill(re[c], re[c] + nreal, 0.0);
            bool any = false;
            for (int k = 0; k < P; ++k) {
                const int gz = o[2] + k;
                if (gz < 0 || gz >= grid.n[2]) continue;
                for (int j = 0; j < P; ++j) {
                    const int gy = o[1] + j;
                    if (gy < 0 || gy >= grid.n[1]) continue;
                    for (int i = 0; i < P; ++i) {
                        const int gx = o[0] + i;
                        if (gx < 0 || gx >= grid.n[0]) continue;
                        const double w = win[i] * win[j] * win[k];
                        const double* vox = g.voxel(gx, gy, gz);
                        const std::int64_t idx = (std::int64_t(k) * N + j) * N + i;
                        for (int c = 0; c < nc; ++c) {
                            re[c][idx] = w * vox[c];
                            any = any || vox[c] != 0.0;
                        }
                    }
                }
            }
            if (!any) continue;

            for (int c = 0; c < nc; ++c) fftw_execute_dft_r2c(plan_fwd, re[c], sp[c]);

            // Per-bin component mixing.
            bool mult_nonzero = false;
            for (int kz = 0; kz < N; ++kz) {
                const int fz = kz <= N / 2 ? kz : kz - N;
                for (int ky = 0; ky < N; ++ky) {
                    const int fy = ky <= N / 2 ? ky : ky - N;
                    for (int kx = 0; kx <= N / 2; ++kx) {
                        const std::int64_t idx = (std::int64_t(kz) * N + ky) * (N / 2 + 1) + kx;
                        const Vec3 xi(2.0 * M_PI * kx / (N * grid.spacing[0]),
                                      2.0 * M_PI * fy / (N * grid.spacing[1]),
                                      2.0 * M_PI * fz / (N * grid.spacing[2]));
                        if (kx == 0 && fy == 0 && fz == 0) {
                            for (int c = 0; c < nc; ++c) sp[c][idx][0] = sp[c][idx][1] = 0.0;
                            continue;
                        }
                        const Eigen::MatrixXd mm = patch_mult->eval(xi);
                        if (mm.cwiseAbs().maxCoeff() == 0.0) {
                            for (int c = 0; c < nc; ++c) sp[c][idx][0] = sp[c][idx][1] = 0.0;
                            continue;
                        }
                        mult_nonzero = true;
                        for (int c = 0; c < nc; ++c) {
                            vr[c] = sp[c][idx][0];
                            vi[c] = sp[c][idx][1];
                        }
                        const Eigen::VectorXd outr = mm * vr;
                        const Eigen::VectorXd outi = mm * vi;
                        for (int c = 0; c < nc; ++c) {
                            sp[c][idx][0] = outr[c];
                            sp[c][idx][1] = outi[c];
                        }
                    }
                }
            }
            if (!mult_nonzero) {
                ++zero_patches;
                continue;
            }

            for (int c = 0; c < nc; ++c) fftw_execute_dft_c2r(plan_bwd, sp[c], re[c]);
            const double norm = 1.0 / double(nreal);

            // Windowed synthesis and overlap-add (padding tail discarded).
            for (int k = 0; k < P; ++k) {
                const int gz = o[2] + k;
                if (gz < 0 || gz >= grid.n[2]) continue;
                for (int j = 0; j < P; ++j) {
                    const int gy = o[1] + j;
                    if (gy < 0 || gy >= grid.n[1]) continue;
                    for (int i = 0; i < P; ++i) {
                        const int gx = o[0] + i;
                        if (gx < 0 || gx >= grid.n[0]) continue;
                        const double w = win[i] * win[j] * win[k] * norm;
                        double* vox = acc.voxel(gx, gy, gz);
                        const std::int64_t idx = (std::int64_t(k) * N + j) * N + i;
                        for (int c = 0; c < nc; ++c) vox[c] += w * re[c][idx];
                    }
                }
            }
        }
        for (int c = 0; c < nc; ++c) {
            fftw_free(re[c]);
            fftw_free(sp[c]);
        }
    }

    SymTensorField out(grid, m);
    for (int c = 0; c < nchunks; ++c) out += partial[c];

    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan_fwd);
        fftw_destroy_plan(plan_bwd);
        fftw_free(proto_r);
        fftw_free(proto_c);
    }
    if (stats) {
        stats->patches = npatch;
        stats->zero_patches = zero_patches;
    }
    return out;
}

ReconstructionResult reconstruct(const SymTensorField& f, const AcquisitionGeometry& geom,
                                 const ReconOptions& opts) {
    ReconstructionResult result;
    const Sinogram sino = forward(f, geom);
    const SymTensorField nf = backproject(sino, f.grid(), opts.mode, &result.backprojection);
    SymbolEvaluator evaluator(*geom.curve, f.order(), opts.symbol);
    ParametrixMultiplier mult(evaluator, opts.table_n1, opts.table_n2, opts.calibration);
    result.recon = apply_parametrix(nf, mult, opts.patching, &result.patching);
    result.calibration_used = opts.calibration;
    return result;
}

double fit_calibration(const SymTensorField& reference, const SymTensorField& recon, const Ball& region) {
    if (!reference.grid().same_shape(recon.grid()) || reference.order() != recon.order())
        throw NumericalError("fit_calibration: field shape mismatch");
    const Grid3& g = reference.grid();
    const auto& mult = SymIndexTable::get(reference.order()).multiplicities();
    const int nc = reference.components();
    double num = 0.0, den = 0.0;
    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix) {
                if (!region.contains(g.voxel_center(ix, iy, iz))) continue;
                const double* a = reference.voxel(ix, iy, iz);
                const double* b = recon.voxel(ix, iy, iz);
                for (int c = 0; c < nc; ++c) {
                    num += mult[c] * a[c] * b[c];
                    den += mult[c] * b[c] * b[c];
                }
            }
    if (den <= 0.0) throw NumericalError("fit_calibration: reconstruction is zero on the region");
    return num / den;
}

} // namespace trt
