#include "trt/visibility.hpp"

#include <bit>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace trt {

const char* to_string(CovectorClass c) {
    switch (c) {
        case CovectorClass::XiDelta: return "xi_delta";
        case CovectorClass::XiLambda: return "xi_lambda";
        case CovectorClass::Invisible: return "invisible";
        case CovectorClass::Degenerate: return "degenerate";
    }
    return "?";
}

namespace {

// Exact maximum clique on <= 32 vertices (intersection counts are small).
void grow_clique(std::uint32_t cand, int size, const std::vector<std::uint32_t>& adj, int& best) {
    if (size + std::popcount(cand) <= best) return;
    if (cand == 0) {
        best = std::max(best, size);
        return;
    }
    const int v = std::countr_zero(cand);
    const std::uint32_t rest = cand & ~(1u << v);
    grow_clique(rest & adj[v], size + 1, adj, best);
    grow_clique(rest, size, adj, best);
}

} // namespace

VisibilityClassifier::VisibilityClassifier(const Curve& curve, int m, VisibilityOptions opts)
    : curve_(&curve), m_(m), opts_(opts), intersector_(curve, opts.intersect) {}

KTReport VisibilityClassifier::kt_check(const Vec3& x, const Vec3& xi) const {
    KTReport rep;
    rep.plane = Covector{x, xi};
    const IntersectionResult isect = intersector_.intersect(x, xi);
    if (isect.degenerate_arc) {
        rep.degenerate = true;
        return rep;
    }
    for (const auto& p : isect.points) {
        const Vec3 d = x - curve_->position(p.t);
        const double dn = d.norm();
        if (dn < 1e-12) continue; // x sits on the curve; direction undefined
        rep.points.push_back(p.t);
        rep.directions.push_back(d / dn);
    }
    const int k = static_cast<int>(rep.directions.size());
    if (k == 0) return rep;
    if (k > 32) {
        rep.degenerate = true; // outside the design envelope; treat as unusable
        return rep;
    }
    std::vector<std::uint32_t> adj(k, 0);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const double s = rep.directions[i].cross(rep.directions[j]).norm();
            if (s > opts_.li_tol) {
                adj[i] |= 1u << j;
                adj[j] |= 1u << i;
            }
        }
    int best = 1;
    grow_clique((k == 32) ? ~0u : ((1u << k) - 1u), 0, adj, best);
    rep.order_satisfied = best - 1;

    // Smallest pairwise line angle within one maximal independent subset:
    // report the global minimum over independent pairs as a conservative
    // summary (used only for diagnostics).
    double min_sin = 1.0;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (adj[i] & (1u << j))
                min_sin = std::min(min_sin, rep.directions[i].cross(rep.directions[j]).norm());
    rep.pairwise_min_angle = std::asin(std::clamp(min_sin, 0.0, 1.0));
    return rep;
}

VisibilityReport VisibilityClassifier::classify(const Vec3& x, const Vec3& xi) const {
    VisibilityReport rep;
    rep.covector = Covector{x, xi};
    rep.intersections = intersector_.intersect(x, xi);
    if (rep.intersections.degenerate_arc) {
        rep.cls = CovectorClass::Degenerate;
        return rep;
    }
    if (rep.intersections.points.empty()) {
        rep.cls = CovectorClass::Invisible;
        rep.min_abs_sigma = std::numeric_limits<double>::infinity();
        return rep;
    }
    rep.min_abs_sigma = rep.intersections.min_abs_sigma();

    const KTReport kt = kt_check(x, xi);
    rep.kt_order = kt.order_satisfied;
    if (kt.degenerate) {
        rep.cls = CovectorClass::Degenerate;
        return rep;
    }
    if (rep.kt_order < m_) {
        rep.cls = CovectorClass::Invisible;
        return rep;
    }
    int n_tangential = 0;
    for (const auto& p : rep.intersections.points) {
        if (p.kind == IntersectionKind::Degenerate) {
            rep.cls = CovectorClass::Degenerate;
            return rep;
        }
        n_tangential += (p.kind == IntersectionKind::Tangential);
    }
    rep.cls = n_tangential == 0 ? CovectorClass::XiDelta : CovectorClass::XiLambda;
    return rep;
}

AtlasSummary visibility_atlas(const Ball& ball, const Curve& curve, int m, int n_samples, std::uint64_t seed,
                              VisibilityOptions opts, int max_examples) {
    if (n_samples <= 0) throw NumericalError("visibility_atlas: n_samples must be positive");
    VisibilityClassifier classifier(curve, m, opts);

    struct SampleOut {
        std::uint8_t cls;
        std::uint8_t kt_ge_m;
        std::uint16_t n_isect;
        float min_sigma;
        std::int16_t kt_order;
    };
    std::vector<SampleOut> results(n_samples);
    std::vector<Covector> covs(n_samples);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
    for (int i = 0; i < n_samples; ++i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        const Vec3 x = rng.in_ball(ball);
        const Vec3 xi = rng.unit_vector();
        covs[i] = Covector{x, xi};
        const VisibilityReport rep = classifier.classify(x, xi);
        SampleOut s;
        s.cls = static_cast<std::uint8_t>(rep.cls);
        s.kt_ge_m = rep.kt_order >= m;
        s.n_isect = static_cast<std::uint16_t>(rep.intersections.points.size());
        s.min_sigma = static_cast<float>(rep.min_abs_sigma);
        s.kt_order = static_cast<std::int16_t>(rep.kt_order);
        results[i] = s;
    }

    AtlasSummary summary;
    summary.n_samples = n_samples;
    std::int64_t kt_ok = 0;
    for (int i = 0; i < n_samples; ++i) {
        const auto& s = results[i];
        ++summary.counts[s.cls];
        kt_ok += s.kt_ge_m;
        summary.max_intersections = std::max(summary.max_intersections, int(s.n_isect));
        auto& ex = summary.examples[s.cls];
        if (static_cast<int>(ex.size()) < max_examples)
            ex.push_back(AtlasExample{covs[i], s.min_sigma, s.kt_order});
    }
    summary.kt_fraction = double(kt_ok) / n_samples;
    return summary;
}

} // namespace trt
