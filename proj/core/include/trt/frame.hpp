#pragma once

#include "trt/types.hpp"

namespace trt {

/// Orthonormal right-handed triple attached to a line direction omega;
/// omega1 and omega2 span the transverse plane. Satisfies
/// omega x omega1 = omega2.
struct Frame {
    Vec3 omega;
    Vec3 omega1;
    Vec3 omega2;

    double orthonormality_defect() const;
};

/// Spherical chart with poles on the x1 axis:
///   omega  = ( cos t1,  sin t1 cos t2,  sin t1 sin t2)
///   omega1 = (-sin t1,  cos t1 cos t2,  cos t1 sin t2)
///   omega2 = ( 0,      -sin t2,         cos t2)
/// theta1 must stay away from the poles 0 and pi.
Frame frame_from_angles(double theta1, double theta2, double pole_tol = 1e-12);

/// Inverse chart: angles (theta1 in [0,pi], theta2 in [0,2pi)) of a unit
/// direction.
void direction_to_angles(const Vec3& omega, double& theta1, double& theta2);

/// Frame adapted to a covector: omega2 = xi_hat, omega1 = xi_hat x omega.
/// Requires omega (unit) perpendicular to xi_hat (unit).
Frame adapted_frame(const Vec3& omega, const Vec3& xi_hat, double perp_tol = 1e-9);

/// Frame at direction omega whose omega2 axis is aligned with the
/// projection of xi onto the transverse plane of omega. Falls back to the
/// spherical chart when xi is (nearly) parallel to omega. This realizes
/// gauge rotation of transverse measurements toward a covector of
/// interest; on directions perpendicular to xi it coincides with
/// adapted_frame.
Frame rotated_frame(const Vec3& omega, const Vec3& xi, double parallel_tol = 1e-9);

} // namespace trt
