#include "pgo/quat.hpp"

#include "pgo/errors.hpp"
#include "pgo/sym_eigen.hpp"

namespace pgo {

namespace {

constexpr double kMinNormalizableNorm = 1e-15;

}  // namespace

UnitQuaternion qnormalize(const Quaternion& q) { return UnitQuaternion(q); }

UnitQuaternion::UnitQuaternion(const Quaternion& q) {
    const double n = qnorm(q);
    if (!(n > kMinNormalizableNorm) || !std::isfinite(n))
        throw DegenerateInput("cannot normalize quaternion with norm " + std::to_string(n));
    q_ = q * (1.0 / n);
}

Mat3 to_rotation_matrix(const UnitQuaternion& uq) {
    const Quaternion& q = uq.quat();
    const Vec3 v = q.imag();
    const Mat3 s = skew(v);
    return v * v.transpose() + q.w * q.w * Mat3::Identity() + 2.0 * q.w * s + s * s;
}

UnitQuaternion from_rotation_matrix(const Mat3& r) {
    if (!r.allFinite()) throw NumericalError("from_rotation_matrix: non-finite input");

    // tr(R^T R(q)) = q^T K q for unit q = (w, x, y, z).
    Mat4 k;
    k(0, 0) = r(0, 0) + r(1, 1) + r(2, 2);
    k(1, 1) = r(0, 0) - r(1, 1) - r(2, 2);
    k(2, 2) = -r(0, 0) + r(1, 1) - r(2, 2);
    k(3, 3) = -r(0, 0) - r(1, 1) + r(2, 2);
    k(0, 1) = k(1, 0) = r(2, 1) - r(1, 2);
    k(0, 2) = k(2, 0) = r(0, 2) - r(2, 0);
    k(0, 3) = k(3, 0) = r(1, 0) - r(0, 1);
    k(1, 2) = k(2, 1) = r(0, 1) + r(1, 0);
    k(1, 3) = k(3, 1) = r(0, 2) + r(2, 0);
    k(2, 3) = k(3, 2) = r(1, 2) + r(2, 1);

    const auto eig = symmetric_eigen<4>(k);
    return UnitQuaternion::from_vec(eig.vectors.col(3)).canonical();
}

}  // namespace pgo
