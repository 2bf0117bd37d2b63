#pragma once

#include <array>
#include <vector>

#include "trt/intersect.hpp"
#include "trt/types.hpp"

namespace trt {

struct VisibilityOptions {
    /// Pairwise linear independence threshold on |sin(angle)| between
    /// direction vectors.
    double li_tol = 1e-4;
    /// A covector is "well visible" (deep inside the transversal set)
    /// when every intersection has |sigma| above this factor times the
    /// tangency tolerance.
    double margin_factor = 10.0;
    IntersectOptions intersect;
};

struct KTReport {
    Covector plane;
    std::vector<double> points;     // curve parameters of the intersections
    std::vector<Vec3> directions;   // unit vectors from x to the curve points
    /// Largest n such that some (n+1)-subset of directions is pairwise
    /// independent; -1 when no usable point exists.
    int order_satisfied = -1;
    /// Minimum line angle within the selected independent subset.
    double pairwise_min_angle = 0.0;
    bool degenerate = false;

    bool satisfied(int m) const { return !degenerate && order_satisfied >= m; }
};

enum class CovectorClass { XiDelta = 0, XiLambda = 1, Invisible = 2, Degenerate = 3 };

const char* to_string(CovectorClass c);

struct VisibilityReport {
    Covector covector;
    CovectorClass cls = CovectorClass::Invisible;
    IntersectionResult intersections;
    int kt_order = -1;
    /// min_k |gamma'(t_k).xi_hat| / |gamma'|, the margin to the symbol
    /// degeneracy; infinity when there is no intersection.
    double min_abs_sigma = 0.0;
};

/// Classifies covectors against a fixed curve and tensor order.
class VisibilityClassifier {
  public:
    VisibilityClassifier(const Curve& curve, int m, VisibilityOptions opts = {});

    KTReport kt_check(const Vec3& x, const Vec3& xi) const;
    VisibilityReport classify(const Vec3& x, const Vec3& xi) const;

    /// Strict-interior visibility: transversal with margin.
    bool well_visible(const VisibilityReport& r) const {
        return r.cls == CovectorClass::XiDelta &&
               r.min_abs_sigma > opts_.margin_factor * opts_.intersect.tangent_tol;
    }

    int order() const { return m_; }
    const VisibilityOptions& options() const { return opts_; }
    const PlaneIntersector& intersector() const { return intersector_; }
    const Curve& curve() const { return *curve_; }

  private:
    const Curve* curve_;
    int m_;
    VisibilityOptions opts_;
    PlaneIntersector intersector_;
};

struct AtlasExample {
    Covector covector;
    double min_abs_sigma = 0.0;
    int kt_order = -1;
};

struct AtlasSummary {
    int n_samples = 0;
    std::array<std::int64_t, 4> counts{};          // indexed by CovectorClass
    std::array<std::vector<AtlasExample>, 4> examples;
    int max_intersections = 0;                      // observed bound for this run
    double kt_fraction = 0.0;                       // fraction with kt_order >= m

    double fraction(CovectorClass c) const {
        return n_samples ? double(counts[static_cast<int>(c)]) / n_samples : 0.0;
    }
};

/// Monte-Carlo classification of covectors (x uniform in B, xi uniform on
/// the sphere). Deterministic for a fixed seed independent of threading.
AtlasSummary visibility_atlas(const Ball& ball, const Curve& curve, int m, int n_samples,
                              std::uint64_t seed, VisibilityOptions opts = {}, int max_examples = 16);

} // namespace trt
