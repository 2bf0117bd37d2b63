#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "trt/frame.hpp"
#include "trt/transform.hpp"
#include "trt/visibility.hpp"

namespace trt {

/// Frame convention for the symbol assembly. Adapted: omega2 = xi_hat,
/// omega1 = xi_hat x omega(t_k) — the canonical per-covector gauge in
/// which the factor blocks take their standard form. Chart: the global
/// spherical frames of the acquisition at each intersection direction —
/// the gauge in which the sinogram components are actually measured, and
/// therefore the symbol of the assembled normal operator. The two differ
/// only for m >= 2 (per-point gauge rotation); ranks and definiteness
/// agree.
enum class FrameGauge { Adapted, Chart };

struct SymbolOptions {
    /// Singular values below rank_tol * sigma_max count as zero.
    double rank_tol = 1e-8;
    /// Eigenvalues below lambda_max / cond_cap are truncated in the
    /// pseudoinverse.
    double cond_cap = 1e6;
    /// Raised-cosine taper in min_k |sigma|: zero below taper_lo, one
    /// above taper_hi.
    double taper_lo = 0.02;
    double taper_hi = 0.10;
    FrameGauge gauge = FrameGauge::Adapted;
    VisibilityOptions visibility;
};

struct SymbolMatrix {
    Eigen::MatrixXd entries;
    Eigen::VectorXd eigenvalues; // descending
    double condition = std::numeric_limits<double>::infinity();
    Covector at;
    int k = 0;            // number of intersection points
    bool invisible = false;

    int rank(double rel_tol = 1e-8) const;
};

struct FactorColumn {
    double t = 0.0; // intersection parameter
    int p = 0;      // block index: omega1 power
};

/// P = (U_m ... U_0) with sqrt-multiplicity row scaling and sqrt-weight
/// column scaling, so A0 = P P^t.
struct FactorMatrix {
    Eigen::MatrixXd P;
    std::vector<FactorColumn> cols;
};

/// Factor block U_p: column k is sqrt(w_k) times the sqrt-multiplicity
/// scaled components of omega1(t_k)^(.p) (.) omega2(t_k)^(.(m-p)).
/// Frames must share omega2 = xi_hat in the adapted gauge.
Eigen::MatrixXd build_U(int m, int p, std::span<const Frame> frames, std::span<const double> weights);

/// Principal symbol of the restricted normal operator and its
/// factorization, pseudoinverse and visibility cutoff at a covector.
class SymbolEvaluator {
  public:
    SymbolEvaluator(const Curve& curve, int m, SymbolOptions opts = {});

    /// A0(x, xi) assembled as P P^t over the plane-curve intersections.
    /// Throws NumericalError on tangential/degenerate intersections (the
    /// symbol is singular there); returns a flagged zero matrix when the
    /// plane misses the curve.
    SymbolMatrix principal(const Vec3& x, const Vec3& xi, FactorMatrix* factor = nullptr) const;

    /// Truncated spectral inverse: reciprocal eigenvalues above
    /// lambda_max / cond_cap, zero below.
    SymbolMatrix pseudoinverse(const SymbolMatrix& a) const;

    /// Smooth visibility taper: 1 deep inside the transversal set, 0
    /// outside it (raised cosine in the margin min_k |sigma|).
    double taper(const VisibilityReport& rep) const;
    double taper(const Vec3& x, const Vec3& xi) const;

    /// b0 = taper * B0, the cut-off parametrix symbol at |xi| = 1.
    /// Returns a zero matrix wherever the covector is not well visible.
    Eigen::MatrixXd multiplier_matrix(const Vec3& x, const Vec3& xi_hat) const;

    SymbolMatrix cutoff(const VisibilityReport& rep, const SymbolMatrix& b0) const;

    const VisibilityClassifier& classifier() const { return classifier_; }
    const SymbolOptions& options() const { return opts_; }
    int order() const { return m_; }
    const Curve& curve() const { return *curve_; }

  private:
    const Curve* curve_;
    int m_;
    SymbolOptions opts_;
    VisibilityClassifier classifier_;
};

struct RankCheckReport {
    int m = 0;
    int k = 0;         // frames per trial
    int trials = 0;
    int resamples = 0; // rejected nearly-dependent direction draws
    bool all_pass = true;
    struct Failure {
        int trial;
        int p; // -1 means the full factor matrix P
        int got, expected;
    };
    std::vector<Failure> failures;
    std::vector<int> expected_u_rank; // per p
    int expected_p_rank = 0;
};

/// Randomized verification of the factor ranks: with k = m+1 pairwise
/// independent in-plane directions, rank(U_p) = p+1 and
/// rank(P) = (m+1)(m+2)/2. Pass k < m+1 to probe the incomplete-data
/// case (P then cannot reach full rank).
RankCheckReport rank_check(int m, int trials, std::uint64_t seed, const SymbolOptions& opts = {}, int k = -1);

/// Smooth plateau window: 1 inside plateau_radius, 0 outside
/// outer_radius, C^3 polynomial step between.
struct ProbeWindow {
    Vec3 center = Vec3::Zero();
    double plateau_radius = 0.3;
    double outer_radius = 0.6;

    double value(const Vec3& x) const;
};

struct ProbeMeasurement {
    double lambda = 0.0;
    /// Measured response matrix in the symmetric (sqrt-multiplicity)
    /// presentation; column L is the response at x0 to the oscillatory
    /// probe along basis tensor L.
    Eigen::MatrixXd measured;
    /// lambda * measured — comparable with the unit-frequency symbol.
    Eigen::MatrixXd scaled;
};

struct ProbeResult {
    Covector at;
    int m = 0;
    Eigen::MatrixXd reference; // A0(x0, xi_hat) at |xi| = 1
    std::vector<ProbeMeasurement> measurements;
};

/// Numerical oracle for the principal symbol: applies the discretized
/// normal operator (point evaluation, adapted gauge) to windowed cosine
/// probes cos(lambda x.xi) e_L and extracts the response amplitude via
/// the cos/sin quadrature pair. lambda * M(lambda) converges to the
/// unit-frequency symbol as lambda grows.
ProbeResult oscillatory_probe(const Vec3& x0, const Vec3& xi_hat, std::span<const double> lambdas, int m,
                              const AcquisitionGeometry& geom, const Grid3& grid, const ProbeWindow& window,
                              const SymbolOptions& opts = {});

} // namespace trt
