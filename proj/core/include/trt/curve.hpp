#pragma once

#include <memory>
#include <string>
#include <vector>

#include "trt/types.hpp"

namespace trt {

/// Smooth regular source curve gamma : [t_begin, t_end] -> R^3.
class Curve {
  public:
    virtual ~Curve() = default;

    virtual Vec3 position(double t) const = 0;
    virtual Vec3 derivative(double t) const = 0;
    virtual Vec3 second_derivative(double t) const = 0;

    double t_begin() const { return t0_; }
    double t_end() const { return t1_; }
    double t_span() const { return t1_ - t0_; }
    bool closed() const { return closed_; }
    virtual std::string describe() const = 0;

  protected:
    Curve(double t0, double t1, bool closed) : t0_(t0), t1_(t1), closed_(closed) {}
    double t0_, t1_;
    bool closed_;
};

/// Helix around an axis through `center`: radius r, axial speed `pitch`
/// (length per radian), `turns` full revolutions. axis must be a unit
/// vector; u,v complete it to an orthonormal triple.
class Helix : public Curve {
  public:
    Helix(double radius, double pitch, double turns, const Vec3& center = Vec3::Zero(),
          const Vec3& axis = Vec3::UnitX(), double phase = 0.0);

    Vec3 position(double t) const override;
    Vec3 derivative(double t) const override;
    Vec3 second_derivative(double t) const override;
    std::string describe() const override;

  private:
    double r_, pitch_, phase_;
    Vec3 center_, axis_, u_, v_;
};

/// Circle of radius r in the plane spanned by (u, v) through `center`.
class CircleCurve : public Curve {
  public:
    explicit CircleCurve(double radius, const Vec3& center = Vec3::Zero(), const Vec3& axis = Vec3::UnitZ());

    Vec3 position(double t) const override;
    Vec3 derivative(double t) const override;
    Vec3 second_derivative(double t) const override;
    std::string describe() const override;

  private:
    double r_;
    Vec3 center_, axis_, u_, v_;
};

/// Closed "tennis ball seam" curve on a cylinder: radial circle plus an
/// axial cos(2t) oscillation. Planes in general position meet it in
/// several points, which makes it a useful complete-data alternative to
/// the helix.
class SaddleCurve : public Curve {
  public:
    SaddleCurve(double radius, double height, const Vec3& center = Vec3::Zero(), const Vec3& axis = Vec3::UnitX());

    Vec3 position(double t) const override;
    Vec3 derivative(double t) const override;
    Vec3 second_derivative(double t) const override;
    std::string describe() const override;

  private:
    double r_, h_;
    Vec3 center_, axis_, u_, v_;
};

/// Natural cubic spline through samples (t_i, x_i); C^2, so the second
/// derivative needed for tangency classification is continuous.
class PolylineCurve : public Curve {
  public:
    PolylineCurve(std::vector<double> ts, std::vector<Vec3> points);

    /// Parse a plain-text file with one "t x y z" quadruple per line.
    /// '#' starts a comment.
    static PolylineCurve from_file(const std::string& path);

    Vec3 position(double t) const override;
    Vec3 derivative(double t) const override;
    Vec3 second_derivative(double t) const override;
    std::string describe() const override;

  private:
    int segment(double t) const;
    std::vector<double> ts_;
    std::vector<Vec3> pts_;
    std::vector<Vec3> m2_; // spline second derivatives at the knots
};

struct CurveValidation {
    double min_speed = 0.0;          // min |gamma'| over samples
    double min_pair_distance = 0.0;  // min distance between well-separated samples
    bool regular = false;
    bool injective = false;
};

/// Sampling checks for regularity (|gamma'| > 0) and absence of
/// self-intersections.
CurveValidation validate_curve(const Curve& curve, int samples = 4096, double min_speed_tol = 1e-9,
                               double separation_tol = 1e-7);

} // namespace trt
