#pragma once

#include <vector>

#include "trt/curve.hpp"
#include "trt/types.hpp"

namespace trt {

enum class IntersectionKind { Transversal, Tangential, Degenerate };

struct PlaneIntersection {
    double t = 0.0;
    IntersectionKind kind = IntersectionKind::Transversal;
    /// gamma'(t).xi_hat / |gamma'(t)|; the symbol degenerates as this -> 0.
    double sigma = 0.0;
    /// gamma''(t).xi_hat, recorded for tangential points.
    double tangency_strength = 0.0;
    /// |(gamma(t)-x).xi_hat| after refinement.
    double plane_residual = 0.0;
};

struct IntersectionResult {
    std::vector<PlaneIntersection> points;
    /// True when the plane contains a whole arc of the curve; the point
    /// list is meaningless in that case.
    bool degenerate_arc = false;

    int count(IntersectionKind k) const {
        int c = 0;
        for (const auto& p : points) c += (p.kind == k);
        return c;
    }
    bool all_transversal() const {
        return !degenerate_arc && !points.empty() && count(IntersectionKind::Transversal) == static_cast<int>(points.size());
    }
    double min_abs_sigma() const {
        double s = std::numeric_limits<double>::infinity();
        for (const auto& p : points) s = std::min(s, std::abs(p.sigma));
        return s;
    }
};

struct IntersectOptions {
    /// Bracketing nodes per unit of curve parameter.
    double samples_per_unit = 2048.0;
    int bisection_iters = 60;
    /// Transversal iff |gamma'.xi_hat|/|gamma'| exceeds this.
    double tangent_tol = 1e-6;
    /// Tangential (vs degenerate) iff |gamma''.xi_hat|/|gamma''| exceeds this.
    double curvature_tol = 1e-8;
    /// Accept a refined root when |h| is below this times the scene scale.
    double residual_rel_tol = 1e-9;
};

/// Finds and classifies the intersections of planes with a fixed curve.
/// Holds a precomputed sample table of the curve, so constructing one
/// once and reusing it across many plane queries is cheap.
class PlaneIntersector {
  public:
    explicit PlaneIntersector(const Curve& curve, IntersectOptions opts = {});

    /// All roots of h(t) = (gamma(t) - x) . xi_hat on the curve domain.
    IntersectionResult intersect(const Vec3& x, const Vec3& xi) const;

    const Curve& curve() const { return *curve_; }
    const IntersectOptions& options() const { return opts_; }
    double node_spacing() const { return dt_; }

  private:
    double refine_bracket(double ta, double tb, double ha, double hb, const Vec3& x, const Vec3& xi_hat) const;
    bool refine_touch(double ta, double tb, const Vec3& x, const Vec3& xi_hat, double& t_out) const;
    PlaneIntersection classify(double t, const Vec3& x, const Vec3& xi_hat) const;

    const Curve* curve_;
    IntersectOptions opts_;
    int n_nodes_;
    double dt_;
    std::vector<Vec3> nodes_;
    double scale_; // curve extent, used for residual tolerances
};

/// gamma'(t) . xi_hat / |gamma'(t)|: zero exactly over the degeneracy
/// set where the ray complex projections drop rank. Invariant under
/// positive scaling of xi.
double sigma_condition(double t, const Vec3& xi, const Curve& curve);

/// One flowout pair of the artifact Lagrangian: x = gamma(t) + tau*theta
/// paired with y = gamma(t) + tau_tilde*theta; the covector at y is the
/// one at x scaled by tau/tau_tilde.
struct FlowoutPair {
    Vec3 x, y;
    double tau = 0.0, tau_tilde = 0.0;
    double xi_scale = 1.0; // tau / tau_tilde
};

/// Sample the flowout of the line through gamma(t) with direction theta
/// over all ordered pairs (tau_i, tau_j) from a uniform grid on
/// [tau_min, tau_max] with zeros skipped. Also reports the covector
/// direction xi = unit(gamma'(t) x theta) shared by the pairs.
std::vector<FlowoutPair> lambda_points(const Curve& curve, double t, const Vec3& theta, double tau_min,
                                       double tau_max, int n_tau, Vec3* xi_dir = nullptr);

} // namespace trt
