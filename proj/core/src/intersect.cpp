#include "trt/intersect.hpp"

#include <algorithm>
#include <cmath>

namespace trt {

PlaneIntersector::PlaneIntersector(const Curve& curve, IntersectOptions opts) : curve_(&curve), opts_(opts) {
    const double span = curve.t_span();
    n_nodes_ = std::max(16, static_cast<int>(std::ceil(opts_.samples_per_unit * span)));
    dt_ = span / n_nodes_;
    nodes_.resize(n_nodes_ + 1);
    double scale = 0.0;
    for (int i = 0; i <= n_nodes_; ++i) {
        nodes_[i] = curve.position(curve.t_begin() + i * dt_);
        scale = std::max(scale, nodes_[i].norm());
    }
    scale_ = std::max(scale, 1e-6);
}

double PlaneIntersector::refine_bracket(double ta, double tb, double ha, double hb, const Vec3& x,
                                        const Vec3& xi_hat) const {
    auto h = [&](double t) { return (curve_->position(t) - x).dot(xi_hat); };
    for (int i = 0; i < opts_.bisection_iters; ++i) {
        const double tm = 0.5 * (ta + tb);
        const double hm = h(tm);
        if (hm == 0.0) return tm;
        if ((ha < 0.0) != (hm < 0.0)) {
            tb = tm;
            hb = hm;
        } else {
            ta = tm;
            ha = hm;
        }
    }
    // Newton polish from the bracket midpoint, guarded to stay inside.
    double t = 0.5 * (ta + tb);
    for (int i = 0; i < 4; ++i) {
        const double hp = curve_->derivative(t).dot(xi_hat);
        if (std::abs(hp) < 1e-300) break;
        const double step = h(t) / hp;
        const double tn = t - step;
        if (tn < ta || tn > tb) break;
        t = tn;
    }
    return t;
}

bool PlaneIntersector::refine_touch(double ta, double tb, const Vec3& x, const Vec3& xi_hat, double& t_out) const {
    // Tangential roots: h touches zero without changing sign, so locate
    // the zero of h' = gamma'.xi_hat and accept if |h| there is small.
    auto hp = [&](double t) { return curve_->derivative(t).dot(xi_hat); };
    double a = ta, b = tb;
    double ha = hp(a), hb = hp(b);
    if ((ha < 0.0) == (hb < 0.0)) return false;
    for (int i = 0; i < opts_.bisection_iters; ++i) {
        const double m = 0.5 * (a + b);
        const double hm = hp(m);
        if (hm == 0.0) {
            a = b = m;
            break;
        }
        if ((ha < 0.0) != (hm < 0.0)) {
            b = m;
            hb = hm;
        } else {
            a = m;
            ha = hm;
        }
    }
    t_out = 0.5 * (a + b);
    const double resid = std::abs((curve_->position(t_out) - x).dot(xi_hat));
    return resid < opts_.residual_rel_tol * std::max(scale_, x.norm());
}

PlaneIntersection PlaneIntersector::classify(double t, const Vec3& x, const Vec3& xi_hat) const {
    PlaneIntersection p;
    p.t = t;
    const Vec3 d1 = curve_->derivative(t);
    const Vec3 d2 = curve_->second_derivative(t);
    p.sigma = d1.dot(xi_hat) / d1.norm();
    p.plane_residual = std::abs((curve_->position(t) - x).dot(xi_hat));
    if (std::abs(p.sigma) > opts_.tangent_tol) {
        p.kind = IntersectionKind::Transversal;
    } else {
        p.tangency_strength = d2.dot(xi_hat);
        const double d2n = d2.norm();
        p.kind = (d2n > 0.0 && std::abs(p.tangency_strength) / d2n > opts_.curvature_tol)
                     ? IntersectionKind::Tangential
                     : IntersectionKind::Degenerate;
    }
    return p;
}

IntersectionResult PlaneIntersector::intersect(const Vec3& x, const Vec3& xi) const {
    const double xin = xi.norm();
    if (!(xin > 0.0)) throw NumericalError("plane_curve_intersections: xi must be nonzero");
    const Vec3 xi_hat = xi / xin;

    IntersectionResult out;
    const double t0 = curve_->t_begin();
    const double scene = std::max(scale_, x.norm());
    const double arc_tol = 1e-11 * scene;

    std::vector<double> h(n_nodes_ + 1);
    int zero_run = 0, max_zero_run = 0;
    for (int i = 0; i <= n_nodes_; ++i) {
        h[i] = (nodes_[i] - x).dot(xi_hat);
        if (std::abs(h[i]) < arc_tol) {
            ++zero_run;
            max_zero_run = std::max(max_zero_run, zero_run);
        } else {
            zero_run = 0;
        }
    }
    if (max_zero_run >= std::max(4, n_nodes_ / 1024)) {
        out.degenerate_arc = true;
        return out;
    }

    std::vector<double> roots;
    // Sign-change brackets.
    for (int i = 0; i < n_nodes_; ++i) {
        if (h[i] == 0.0) {
            roots.push_back(t0 + i * dt_);
            continue;
        }
        if ((h[i] < 0.0) != (h[i + 1] < 0.0))
            roots.push_back(refine_bracket(t0 + i * dt_, t0 + (i + 1) * dt_, h[i], h[i + 1], x, xi_hat));
    }
    if (h[n_nodes_] == 0.0) roots.push_back(t0 + n_nodes_ * dt_);

    // Touching roots at local minima of |h| (no sign change).
    for (int i = 1; i < n_nodes_; ++i) {
        const double ai = std::abs(h[i]);
        if (ai >= std::abs(h[i - 1]) || ai > std::abs(h[i + 1])) continue;
        if ((h[i - 1] < 0.0) != (h[i + 1] < 0.0)) continue; // handled by brackets
        // Candidate threshold from the local curvature of h.
        const double hdd = std::abs(h[i - 1] - 2.0 * h[i] + h[i + 1]);
        if (ai > 4.0 * hdd + arc_tol) continue;
        double t_root;
        if (refine_touch(t0 + (i - 1) * dt_, t0 + (i + 1) * dt_, x, xi_hat, t_root)) roots.push_back(t_root);
    }

    std::sort(roots.begin(), roots.end());
    // Merge duplicates closer than half a node spacing; for closed curves
    // the seam t_begin ~ t_end names one point twice.
    std::vector<double> merged;
    for (double r : roots) {
        if (!merged.empty() && r - merged.back() < 0.5 * dt_) continue;
        merged.push_back(r);
    }
    if (curve_->closed() && merged.size() > 1 &&
        (curve_->t_span() - (merged.back() - merged.front())) < 0.5 * dt_)
        merged.pop_back();

    for (double r : merged) out.points.push_back(classify(r, x, xi_hat));
    return out;
}

double sigma_condition(double t, const Vec3& xi, const Curve& curve) {
    const double xin = xi.norm();
    if (!(xin > 0.0)) throw NumericalError("sigma_condition: xi must be nonzero");
    const Vec3 d1 = curve.derivative(t);
    return d1.dot(xi) / (d1.norm() * xin);
}

std::vector<FlowoutPair> lambda_points(const Curve& curve, double t, const Vec3& theta, double tau_min,
                                       double tau_max, int n_tau, Vec3* xi_dir) {
    const Vec3 d1 = curve.derivative(t);
    const Vec3 cross = d1.cross(theta);
    if (cross.norm() < 1e-12 * d1.norm() * theta.norm())
        throw NumericalError("lambda_points: theta parallel to the curve tangent leaves xi undetermined");
    if (xi_dir) *xi_dir = cross.normalized();

    const Vec3 base = curve.position(t);
    const Vec3 th = theta.normalized();
    std::vector<double> taus;
    for (int i = 0; i < n_tau; ++i) {
        const double tau = tau_min + (tau_max - tau_min) * (n_tau == 1 ? 0.5 : double(i) / (n_tau - 1));
        if (std::abs(tau) < 1e-12) continue;
        taus.push_back(tau);
    }
    std::vector<FlowoutPair> out;
    out.reserve(taus.size() * taus.size());
    for (double tau : taus) {
        for (double tt : taus) {
            FlowoutPair p;
            p.tau = tau;
            p.tau_tilde = tt;
            p.x = base + tau * th;
            p.y = base + tt * th;
            p.xi_scale = tau / tt;
            out.push_back(p);
        }
    }
    return out;
}

} // namespace trt
