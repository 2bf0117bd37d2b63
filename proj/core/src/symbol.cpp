#include "trt/symbol.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace trt {

namespace {

int svd_rank(const Eigen::MatrixXd& a, double rel_tol) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] <= 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i) r += (s[i] > rel_tol * s[0]);
    return r;
}

Eigen::VectorXd factor_column(int m, int p, const Frame& frame) {
    const SymTensor tensor = sym_product(sym_power(frame.omega1, p), sym_power(frame.omega2, m - p));
    const auto& sqrt_mult = SymIndexTable::get(m).sqrt_multiplicities();
    return tensor.coeffs().cwiseProduct(sqrt_mult);
}

void eigen_meta(SymbolMatrix& sm, double rank_tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sm.entries);
    sm.eigenvalues = eig.eigenvalues().reverse();
    const double lmax = sm.eigenvalues.size() ? sm.eigenvalues[0] : 0.0;
    const double lmin = sm.eigenvalues.size() ? sm.eigenvalues[sm.eigenvalues.size() - 1] : 0.0;
    sm.condition = (lmin > rank_tol * std::abs(lmax) && lmax > 0.0)
                       ? lmax / lmin
                       : std::numeric_limits<double>::infinity();
}

} // namespace

int SymbolMatrix::rank(double rel_tol) const {
    if (eigenvalues.size() == 0) return 0;
    const double lmax = std::abs(eigenvalues[0]);
    if (lmax == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < eigenvalues.size(); ++i) r += (std::abs(eigenvalues[i]) > rel_tol * lmax);
    return r;
}

Eigen::MatrixXd build_U(int m, int p, std::span<const Frame> frames, std::span<const double> weights) {
    if (p < 0 || p > m) throw NumericalError("build_U: p out of range");
    if (frames.size() != weights.size()) throw NumericalError("build_U: frames/weights size mismatch");
    Eigen::MatrixXd u(dim_sym(m), frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k)
        u.col(k) = std::sqrt(weights[k]) * factor_column(m, p, frames[k]);
    return u;
}

SymbolEvaluator::SymbolEvaluator(const Curve& curve, int m, SymbolOptions opts)
    : curve_(&curve), m_(m), opts_(opts), classifier_(curve, m, opts.visibility) {}

SymbolMatrix SymbolEvaluator::principal(const Vec3& x, const Vec3& xi, FactorMatrix* factor) const {
    const double xin = xi.norm();
    if (!(xin > 0.0)) throw NumericalError("principal symbol: xi must be nonzero");
    const Vec3 xi_hat = xi / xin;

    SymbolMatrix out;
    out.at = Covector{x, xi};
    const int n = dim_sym(m_);

    const IntersectionResult isect = classifier_.intersector().intersect(x, xi_hat);
    if (isect.degenerate_arc)
        throw NumericalError("principal symbol: plane contains a curve arc (degenerate)");
    if (isect.points.empty()) {
        out.entries = Eigen::MatrixXd::Zero(n, n);
        out.eigenvalues = Eigen::VectorXd::Zero(n);
        out.invisible = true;
        return out;
    }
    for (const auto& p : isect.points)
        if (p.kind != IntersectionKind::Transversal)
            throw NumericalError("principal symbol: tangential intersection, symbol is singular here");

    const int k = static_cast<int>(isect.points.size());
    out.k = k;

    std::vector<Frame> frames(k);
    std::vector<double> weights(k);
    for (int i = 0; i < k; ++i) {
        const double t = isect.points[i].t;
        const Vec3 gam = curve_->position(t);
        const Vec3 d = x - gam;
        const double r = d.norm();
        if (r < 1e-12) throw NumericalError("principal symbol: x lies on the curve");
        const Vec3 omega = d / r;
        if (opts_.gauge == FrameGauge::Adapted) {
            frames[i] = adapted_frame(omega, xi_hat, 1e-6);
        } else {
            double t1, t2;
            direction_to_angles(omega, t1, t2);
            frames[i] = frame_from_angles(t1, t2);
        }
        const double sigma_raw = std::abs(curve_->derivative(t).dot(xi_hat));
        weights[i] = 2.0 * M_PI / (xin * sigma_raw * r);
    }

    Eigen::MatrixXd P(n, (m_ + 1) * k);
    std::vector<FactorColumn> cols;
    cols.reserve((m_ + 1) * k);
    int col = 0;
    for (int p = m_; p >= 0; --p) {
        for (int i = 0; i < k; ++i) {
            P.col(col) = std::sqrt(weights[i]) * factor_column(m_, p, frames[i]);
            cols.push_back(FactorColumn{isect.points[i].t, p});
            ++col;
        }
    }
    out.entries = P * P.transpose();
    eigen_meta(out, opts_.rank_tol);
    if (factor) {
        factor->P = std::move(P);
        factor->cols = std::move(cols);
    }
    return out;
}

SymbolMatrix SymbolEvaluator::pseudoinverse(const SymbolMatrix& a) const {
    SymbolMatrix out;
    out.at = a.at;
    out.k = a.k;
    const int n = static_cast<int>(a.entries.rows());
    if (a.invisible || a.entries.cwiseAbs().maxCoeff() == 0.0) {
        out.entries = Eigen::MatrixXd::Zero(n, n);
        out.eigenvalues = Eigen::VectorXd::Zero(n);
        out.invisible = true;
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.entries);
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const double lmax = lam[n - 1];
    const double cut = lmax / opts_.cond_cap;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) inv[i] = lam[i] > cut ? 1.0 / lam[i] : 0.0;
    out.entries = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    eigen_meta(out, opts_.rank_tol);
    out.invisible = false;
    return out;
}

double SymbolEvaluator::taper(const VisibilityReport& rep) const {
    if (rep.cls != CovectorClass::XiDelta) return 0.0;
    const double s = rep.min_abs_sigma;
    if (s <= opts_.taper_lo) return 0.0;
    if (s >= opts_.taper_hi) return 1.0;
    const double u = (s - opts_.taper_lo) / (opts_.taper_hi - opts_.taper_lo);
    return 0.5 * (1.0 - std::cos(M_PI * u));
}

double SymbolEvaluator::taper(const Vec3& x, const Vec3& xi) const {
    return taper(classifier_.classify(x, xi));
}

SymbolMatrix SymbolEvaluator::cutoff(const VisibilityReport& rep, const SymbolMatrix& b0) const {
    SymbolMatrix out = b0;
    const double w = taper(rep);
    out.entries *= w;
    out.eigenvalues *= w;
    if (w == 0.0) out.invisible = true;
    return out;
}

Eigen::MatrixXd SymbolEvaluator::multiplier_matrix(const Vec3& x, const Vec3& xi_hat) const {
    const int n = dim_sym(m_);
    const VisibilityReport rep = classifier_.classify(x, xi_hat);
    const double w = taper(rep);
    if (w == 0.0) return Eigen::MatrixXd::Zero(n, n);
    SymbolMatrix a;
    try {
        a = principal(x, xi_hat);
    } catch (const NumericalError&) {
        return Eigen::MatrixXd::Zero(n, n);
    }
    if (a.invisible) return Eigen::MatrixXd::Zero(n, n);
    return w * pseudoinverse(a).entries;
}

RankCheckReport rank_check(int m, int trials, std::uint64_t seed, const SymbolOptions& opts, int k) {
    RankCheckReport rep;
    rep.m = m;
    rep.k = k > 0 ? k : m + 1;
    rep.trials = trials;
    const int n = dim_sym(m);
    rep.expected_p_rank = std::min(n, (m + 1) * rep.k - (rep.k * (rep.k - 1)) / 2);
    // With k >= m+1 independent directions the factor has full rank n;
    // the k < m+1 case is probed against rank < n only.
    if (rep.k >= m + 1) rep.expected_p_rank = n;
    rep.expected_u_rank.resize(m + 1);
    for (int p = 0; p <= m; ++p) rep.expected_u_rank[p] = std::min(rep.k, p + 1);

    const double li_tol = opts.visibility.li_tol;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(seed, static_cast<std::uint64_t>(trial));
        const Vec3 xi_hat = rng.unit_vector();
        Vec3 e1 = xi_hat.cross(std::abs(xi_hat[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).normalized();
        Vec3 e2 = xi_hat.cross(e1);

        std::vector<double> phis;
        int guard = 0;
        while (static_cast<int>(phis.size()) < rep.k) {
            const double phi = rng.uniform(0.0, M_PI);
            bool ok = true;
            for (double other : phis)
                if (std::abs(std::sin(phi - other)) <= li_tol) ok = false;
            if (ok) {
                phis.push_back(phi);
            } else {
                ++rep.resamples;
                if (++guard > 1000) throw NumericalError("rank_check: cannot draw independent directions");
            }
        }

        std::vector<Frame> frames(rep.k);
        std::vector<double> weights(rep.k);
        for (int i = 0; i < rep.k; ++i) {
            Frame f;
            f.omega2 = xi_hat;
            f.omega1 = std::cos(phis[i]) * e1 + std::sin(phis[i]) * e2;
            f.omega = f.omega1.cross(f.omega2);
            frames[i] = f;
            weights[i] = rng.uniform(0.5, 2.0);
        }

        Eigen::MatrixXd P(n, (m + 1) * rep.k);
        for (int p = m; p >= 0; --p) {
            const Eigen::MatrixXd u = build_U(m, p, frames, weights);
            const int got = svd_rank(u, opts.rank_tol);
            if (got != rep.expected_u_rank[p]) {
                rep.failures.push_back({trial, p, got, rep.expected_u_rank[p]});
                rep.all_pass = false;
            }
            P.block(0, (m - p) * rep.k, n, rep.k) = u;
        }
        const int got_p = svd_rank(P, opts.rank_tol);
        const bool ok = (rep.k >= m + 1) ? (got_p == n) : (got_p < n);
        if (!ok) {
            rep.failures.push_back({trial, -1, got_p, rep.expected_p_rank});
            rep.all_pass = false;
        }
    }
    return rep;
}

double ProbeWindow::value(const Vec3& x) const {
    const double r = (x - center).norm();
    if (r <= plateau_radius) return 1.0;
    if (r >= outer_radius) return 0.0;
    const double u = (r - plateau_radius) / (outer_radius - plateau_radius);
    // C^3 smoothstep (septic), keeps the window spectrum decaying fast.
    const double u2 = u * u;
    const double s = u2 * u2 * (35.0 - 84.0 * u + 70.0 * u2 - 20.0 * u2 * u);
    return 1.0 - s;
}

ProbeResult oscillatory_probe(const Vec3& x0, const Vec3& xi_hat_in, std::span<const double> lambdas, int m,
                              const AcquisitionGeometry& geom, const Grid3& grid, const ProbeWindow& window,
                              const SymbolOptions& opts) {
    const Vec3 xi_hat = xi_hat_in.normalized();
    const double nyquist = M_PI / grid.min_spacing();
    for (double lam : lambdas)
        if (!(lam > 0.0) || lam >= nyquist)
            throw NumericalError("oscillatory_probe: lambda outside (0, grid Nyquist)");
    if ((window.center - x0).norm() > 1e-12)
        throw NumericalError("oscillatory_probe: window must be centered at the probe point");
    const Vec3 lo = grid.outer_lo(), hi = grid.outer_hi();
    for (int a = 0; a < 3; ++a)
        if (x0[a] - window.outer_radius < lo[a] || x0[a] + window.outer_radius > hi[a])
            throw NumericalError("oscillatory_probe: window support exceeds the grid");

    SymbolEvaluator evaluator(*geom.curve, m, opts);
    ProbeResult result;
    result.at = Covector{x0, xi_hat};
    result.m = m;
    result.reference = evaluator.principal(x0, xi_hat).entries;

    const int nc = dim_sym(m);
    const auto& sqrt_mult = SymIndexTable::get(m).sqrt_multiplicities();
    const std::int64_t nvox = grid.voxel_count();

    // Window and phase rasterizations shared across basis components.
    std::vector<double> wcos(nvox), wsin(nvox);
    SymTensorField f(grid, m);
    const std::array<Vec3, 1> pts = {x0};

    for (double lam : lambdas) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::int64_t v = 0; v < nvox; ++v) {
            const int ix = static_cast<int>(v % grid.n[0]);
            const int iy = static_cast<int>((v / grid.n[0]) % grid.n[1]);
            const int iz = static_cast<int>(v / (std::int64_t(grid.n[0]) * grid.n[1]));
            const Vec3 x = grid.voxel_center(ix, iy, iz);
            const double w = window.value(x);
            const double phase = lam * xi_hat.dot(x);
            wcos[v] = w * std::cos(phase);
            wsin[v] = w * std::sin(phase);
        }

        ProbeMeasurement meas;
        meas.lambda = lam;
        meas.measured.resize(nc, nc);
        const double c0 = std::cos(lam * xi_hat.dot(x0));
        const double s0 = std::sin(lam * xi_hat.dot(x0));

        for (int L = 0; L < nc; ++L) {
            std::fill(f.data().begin(), f.data().end(), 0.0);
            for (std::int64_t v = 0; v < nvox; ++v) f.voxel(v)[L] = wcos[v];
            const SymTensor nc_t = normal_at_points(f, geom, pts, xi_hat)[0];
            for (std::int64_t v = 0; v < nvox; ++v) f.voxel(v)[L] = wsin[v];
            const SymTensor ns_t = normal_at_points(f, geom, pts, xi_hat)[0];
            for (int J = 0; J < nc; ++J) {
                const double raw = c0 * nc_t[J] + s0 * ns_t[J];
                meas.measured(J, L) = raw * sqrt_mult[J] / sqrt_mult[L];
            }
        }
        meas.scaled = lam * meas.measured;
        result.measurements.push_back(std::move(meas));
    }
    return result;
}

} // namespace trt
