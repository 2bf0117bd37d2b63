#include "trt/frame.hpp"

#include <cmath>

namespace trt {

double Frame::orthonormality_defect() const {
    double d = 0.0;
    d = std::max(d, std::abs(omega.norm() - 1.0));
    d = std::max(d, std::abs(omega1.norm() - 1.0));
    d = std::max(d, std::abs(omega2.norm() - 1.0));
    d = std::max(d, std::abs(omega.dot(omega1)));
    d = std::max(d, std::abs(omega.dot(omega2)));
    d = std::max(d, std::abs(omega1.dot(omega2)));
    return d;
}

Frame frame_from_angles(double theta1, double theta2, double pole_tol) {
    const double s1 = std::sin(theta1);
    if (!(s1 > pole_tol))
        throw NumericalError("frame_from_angles: theta1 too close to a chart pole; "
                             "rotate the chart or move the direction grid margin");
    const double c1 = std::cos(theta1);
    const double s2 = std::sin(theta2), c2 = std::cos(theta2);
    Frame f;
    f.omega = Vec3(c1, s1 * c2, s1 * s2);
    f.omega1 = Vec3(-s1, c1 * c2, c1 * s2);
    f.omega2 = Vec3(0.0, -s2, c2);
    return f;
}

void direction_to_angles(const Vec3& omega, double& theta1, double& theta2) {
    theta1 = std::acos(std::clamp(omega[0], -1.0, 1.0));
    theta2 = std::atan2(omega[2], omega[1]);
    if (theta2 < 0.0) theta2 += 2.0 * M_PI;
}

Frame adapted_frame(const Vec3& omega, const Vec3& xi_hat, double perp_tol) {
    if (std::abs(omega.dot(xi_hat)) > perp_tol)
        throw NumericalError("adapted_frame: omega is not perpendicular to xi");
    Frame f;
    f.omega = omega;
    f.omega2 = xi_hat;
    f.omega1 = xi_hat.cross(omega);
    return f;
}

Frame rotated_frame(const Vec3& omega, const Vec3& xi, double parallel_tol) {
    const Vec3 transverse = xi - xi.dot(omega) * omega;
    const double norm = transverse.norm();
    if (norm <= parallel_tol * xi.norm()) {
        double t1, t2;
        direction_to_angles(omega, t1, t2);
        return frame_from_angles(t1, t2);
    }
    Frame f;
    f.omega = omega;
    f.omega2 = transverse / norm;
    f.omega1 = f.omega2.cross(omega);
    return f;
}

} // namespace trt
