#include "trt/curve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace trt {

namespace {

// Complete a unit axis to an orthonormal triple (axis, u, v).
void axis_frame(const Vec3& axis, Vec3& u, Vec3& v) {
    Vec3 helper = std::abs(axis[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    u = axis.cross(helper).normalized();
    v = axis.cross(u);
}

std::string vec_str(const Vec3& v) {
    std::ostringstream os;
    os << "[" << v[0] << "," << v[1] << "," << v[2] << "]";
    return os.str();
}

} // namespace

Helix::Helix(double radius, double pitch, double turns, const Vec3& center, const Vec3& axis, double phase)
    : Curve(0.0, 2.0 * M_PI * turns, false), r_(radius), pitch_(pitch), phase_(phase), center_(center),
      axis_(axis.normalized()) {
    if (radius <= 0.0 || turns <= 0.0) throw NumericalError("helix: radius and turns must be positive");
    axis_frame(axis_, u_, v_);
}

Vec3 Helix::position(double t) const {
    const double tm = t - 0.5 * (t0_ + t1_);
    return center_ + pitch_ * tm * axis_ + r_ * (std::cos(t + phase_) * u_ + std::sin(t + phase_) * v_);
}

Vec3 Helix::derivative(double t) const {
    return pitch_ * axis_ + r_ * (-std::sin(t + phase_) * u_ + std::cos(t + phase_) * v_);
}

Vec3 Helix::second_derivative(double t) const {
    return r_ * (-std::cos(t + phase_) * u_ - std::sin(t + phase_) * v_);
}

std::string Helix::describe() const {
    std::ostringstream os;
    os << "helix r=" << r_ << " pitch=" << pitch_ << " span=" << t_span() << " center=" << vec_str(center_)
       << " axis=" << vec_str(axis_);
    return os.str();
}

CircleCurve::CircleCurve(double radius, const Vec3& center, const Vec3& axis)
    : Curve(0.0, 2.0 * M_PI, true), r_(radius), center_(center), axis_(axis.normalized()) {
    if (radius <= 0.0) throw NumericalError("circle: radius must be positive");
    axis_frame(axis_, u_, v_);
}

Vec3 CircleCurve::position(double t) const { return center_ + r_ * (std::cos(t) * u_ + std::sin(t) * v_); }
Vec3 CircleCurve::derivative(double t) const { return r_ * (-std::sin(t) * u_ + std::cos(t) * v_); }
Vec3 CircleCurve::second_derivative(double t) const { return r_ * (-std::cos(t) * u_ - std::sin(t) * v_); }

std::string CircleCurve::describe() const {
    std::ostringstream os;
    os << "circle r=" << r_ << " center=" << vec_str(center_) << " axis=" << vec_str(axis_);
    return os.str();
}

SaddleCurve::SaddleCurve(double radius, double height, const Vec3& center, const Vec3& axis)
    : Curve(0.0, 2.0 * M_PI, true), r_(radius), h_(height), center_(center), axis_(axis.normalized()) {
    if (radius <= 0.0) throw NumericalError("saddle: radius must be positive");
    axis_frame(axis_, u_, v_);
}

Vec3 SaddleCurve::position(double t) const {
    return center_ + h_ * std::cos(2.0 * t) * axis_ + r_ * (std::cos(t) * u_ + std::sin(t) * v_);
}

Vec3 SaddleCurve::derivative(double t) const {
    return -2.0 * h_ * std::sin(2.0 * t) * axis_ + r_ * (-std::sin(t) * u_ + std::cos(t) * v_);
}

Vec3 SaddleCurve::second_derivative(double t) const {
    return -4.0 * h_ * std::cos(2.0 * t) * axis_ + r_ * (-std::cos(t) * u_ - std::sin(t) * v_);
}

std::string SaddleCurve::describe() const {
    std::ostringstream os;
    os << "saddle r=" << r_ << " height=" << h_ << " center=" << vec_str(center_) << " axis=" << vec_str(axis_);
    return os.str();
}

PolylineCurve::PolylineCurve(std::vector<double> ts, std::vector<Vec3> points)
    : Curve(ts.empty() ? 0.0 : ts.front(), ts.empty() ? 0.0 : ts.back(), false), ts_(std::move(ts)),
      pts_(std::move(points)) {
    const int n = static_cast<int>(ts_.size());
    if (n < 3 || pts_.size() != ts_.size())
        throw NumericalError("polyline curve: need at least 3 samples with matching t values");
    for (int i = 1; i < n; ++i)
        if (!(ts_[i] > ts_[i - 1])) throw NumericalError("polyline curve: t values must be strictly increasing");

    // Natural cubic spline: tridiagonal solve for knot second derivatives.
    m2_.assign(n, Vec3::Zero());
    std::vector<double> diag(n, 0.0), off(n, 0.0);
    std::vector<Vec3> rhs(n, Vec3::Zero());
    for (int i = 1; i + 1 < n; ++i) {
        const double hl = ts_[i] - ts_[i - 1];
        const double hr = ts_[i + 1] - ts_[i];
        diag[i] = (hl + hr) / 3.0;
        off[i] = hr / 6.0;
        rhs[i] = (pts_[i + 1] - pts_[i]) / hr - (pts_[i] - pts_[i - 1]) / hl;
    }
    // Thomas algorithm on rows 1..n-2 (natural boundary: m2 = 0 at ends).
    for (int i = 2; i + 1 < n; ++i) {
        const double hl = ts_[i] - ts_[i - 1];
        const double w = (hl / 6.0) / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (int i = n - 2; i >= 1; --i) {
        Vec3 acc = rhs[i];
        if (i + 1 < n - 1) acc -= off[i] * m2_[i + 1];
        m2_[i] = acc / diag[i];
    }
}

PolylineCurve PolylineCurve::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open curve file: " + path);
    std::vector<double> ts;
    std::vector<Vec3> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double t, x, y, z;
        if (!(ls >> t)) continue; // blank/comment line
        if (!(ls >> x >> y >> z))
            throw IoError("curve file " + path + ": line " + std::to_string(lineno) +
                          ": expected 't x y z'");
        ts.push_back(t);
        pts.push_back(Vec3(x, y, z));
    }
    return PolylineCurve(std::move(ts), std::move(pts));
}

int PolylineCurve::segment(double t) const {
    const int n = static_cast<int>(ts_.size());
    auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    int i = static_cast<int>(it - ts_.begin()) - 1;
    return std::clamp(i, 0, n - 2);
}

Vec3 PolylineCurve::position(double t) const {
    const int i = segment(t);
    const double h = ts_[i + 1] - ts_[i];
    const double A = (ts_[i + 1] - t) / h, B = (t - ts_[i]) / h;
    return A * pts_[i] + B * pts_[i + 1] +
           ((A * A * A - A) * m2_[i] + (B * B * B - B) * m2_[i + 1]) * h * h / 6.0;
}

Vec3 PolylineCurve::derivative(double t) const {
    const int i = segment(t);
    const double h = ts_[i + 1] - ts_[i];
    const double A = (ts_[i + 1] - t) / h, B = (t - ts_[i]) / h;
    return (pts_[i + 1] - pts_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m2_[i] +
           (3.0 * B * B - 1.0) / 6.0 * h * m2_[i + 1];
}

Vec3 PolylineCurve::second_derivative(double t) const {
    const int i = segment(t);
    const double h = ts_[i + 1] - ts_[i];
    const double A = (ts_[i + 1] - t) / h, B = (t - ts_[i]) / h;
    return A * m2_[i] + B * m2_[i + 1];
}

std::string PolylineCurve::describe() const {
    std::ostringstream os;
    os << "polyline knots=" << ts_.size() << " t=[" << t_begin() << "," << t_end() << "]";
    return os.str();
}

CurveValidation validate_curve(const Curve& curve, int samples, double min_speed_tol, double separation_tol) {
    CurveValidation out;
    const double span = curve.t_span();
    std::vector<Vec3> pts(samples);
    double min_speed = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double t = curve.t_begin() + span * (i + 0.5) / samples;
        pts[i] = curve.position(t);
        min_speed = std::min(min_speed, curve.derivative(t).norm());
    }
    // Self-intersection scan: pairs separated by at least a few sample
    // steps in parameter (with wrap-around for closed curves).
    const int window = std::max(4, samples / 512);
    double min_pair = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        for (int j = i + window; j < samples; ++j) {
            if (curve.closed() && (samples - (j - i)) < window) continue;
            min_pair = std::min(min_pair, (pts[i] - pts[j]).squaredNorm());
        }
    }
    out.min_speed = min_speed;
    out.min_pair_distance = std::sqrt(min_pair);
    out.regular = min_speed > min_speed_tol;
    out.injective = out.min_pair_distance > separation_tol;
    return out;
}

} // namespace trt
