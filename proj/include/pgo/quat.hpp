#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace pgo {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/*
 * Quaternion q = w + x i + y j + z k, stored scalar-first.
 *
 * The 4-vector view (w, x, y, z) is the one used by the matrix forms
 * M(a) and W(a): a * b = M(a) b = W(b) a.
 */
struct Quaternion {
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}

    static Quaternion from_vec(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }
    // Vector quaternion [0, t].
    static Quaternion pure(const Vec3& t) { return {0.0, t(0), t(1), t(2)}; }
    static constexpr Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

    Vec4 vec() const { return {w, x, y, z}; }
    Vec3 imag() const { return {x, y, z}; }

    bool is_vector(double tol = 1e-12) const { return std::abs(w) <= tol; }
    bool is_finite() const {
        return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }

    Quaternion operator+(const Quaternion& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
    Quaternion operator-(const Quaternion& o) const { return {w - o.w, x - o.x, y - o.y, z - o.z}; }
    Quaternion operator-() const { return {-w, -x, -y, -z}; }
    Quaternion operator*(double s) const { return {w * s, x * s, y * s, z * s}; }
};

// Hamilton product [p0 q0 - p.q, p0 q + q0 p + p x q].
inline Quaternion qmul(const Quaternion& p, const Quaternion& q) {
    return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
            p.w * q.x + q.w * p.x + p.y * q.z - p.z * q.y,
            p.w * q.y + q.w * p.y + p.z * q.x - p.x * q.z,
            p.w * q.z + q.w * p.z + p.x * q.y - p.y * q.x};
}

inline Quaternion qconj(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

inline double qdot(const Quaternion& a, const Quaternion& b) {
    return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double qnorm(const Quaternion& q) { return std::sqrt(qdot(q, q)); }

class UnitQuaternion;

// Projection onto the unit sphere; throws DegenerateInput when |q| <= 1e-15.
UnitQuaternion qnormalize(const Quaternion& q);

/*
 * Element of the unit 3-sphere. Construction always normalizes, so a
 * UnitQuaternion is unit to rounding. The sign is never canonicalized
 * implicitly; use canonical() where the w >= 0 representative is wanted.
 */
class UnitQuaternion {
public:
    UnitQuaternion() : q_(Quaternion::identity()) {}
    explicit UnitQuaternion(const Quaternion& q);
    UnitQuaternion(double w, double x, double y, double z) : UnitQuaternion(Quaternion{w, x, y, z}) {}

    static UnitQuaternion identity() { return {}; }
    static UnitQuaternion from_vec(const Vec4& v) { return UnitQuaternion(Quaternion::from_vec(v)); }

    const Quaternion& quat() const { return q_; }
    operator const Quaternion&() const { return q_; }  // NOLINT(google-explicit-constructor)

    double w() const { return q_.w; }
    double x() const { return q_.x; }
    double y() const { return q_.y; }
    double z() const { return q_.z; }
    Vec4 vec() const { return q_.vec(); }

    UnitQuaternion conj() const { return UnitQuaternion(qconj(q_), Trusted{}); }
    UnitQuaternion canonical() const {
        return q_.w < 0.0 ? UnitQuaternion(-q_, Trusted{}) : *this;
    }
    UnitQuaternion operator-() const { return UnitQuaternion(-q_, Trusted{}); }

    // Product of two unit quaternions, renormalized to absorb rounding.
    friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
        return UnitQuaternion(qmul(a.q_, b.q_));
    }

private:
    struct Trusted {};
    UnitQuaternion(const Quaternion& q, Trusted) : q_(q) {}

    Quaternion q_;
};

// Left multiplication matrix: a * b = M(a) b.
inline Mat4 mat_M(const Quaternion& a) {
    Mat4 m;
    m << a.w, -a.x, -a.y, -a.z,
         a.x,  a.w, -a.z,  a.y,
         a.y,  a.z,  a.w, -a.x,
         a.z, -a.y,  a.x,  a.w;
    return m;
}

// Right multiplication matrix: a * b = W(b) a.
inline Mat4 mat_W(const Quaternion& a) {
    Mat4 m;
    m << a.w, -a.x, -a.y, -a.z,
         a.x,  a.w,  a.z, -a.y,
         a.y, -a.z,  a.w,  a.x,
         a.z,  a.y, -a.x,  a.w;
    return m;
}

// diag(1, -1, -1, -1): D vec(q) = vec(q*).
inline Mat4 mat_D() { return Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal(); }

inline Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v(2), v(1),
         v(2), 0.0, -v(0),
         -v(1), v(0), 0.0;
    return m;
}

// Imaginary part of q [0, t] q*.
inline Vec3 rotate_vec(const UnitQuaternion& q, const Vec3& t) {
    return qmul(qmul(q, Quaternion::pure(t)), qconj(q)).imag();
}

// R = q q^T + q0^2 I + 2 q0 [q]x + [q]x^2 with q the vector part.
Mat3 to_rotation_matrix(const UnitQuaternion& q);

/*
 * Unit quaternion (w >= 0) whose rotation is nearest to R in the Frobenius
 * sense, from the dominant eigenvector of the 4x4 Davenport matrix. For an
 * exact rotation this inverts to_rotation_matrix; for a noisy or relaxed
 * matrix it is the nearest-rotation projection. Throws NumericalError on
 * non-finite input.
 */
UnitQuaternion from_rotation_matrix(const Mat3& r);

// (I - x x^T) v: component of v tangent to the sphere at x.
inline Vec4 sphere_tangent_project(const UnitQuaternion& x, const Vec4& v) {
    const Vec4 xv = x.vec();
    return v - xv * xv.dot(v);
}

// Geodesic rotation angle between two unit quaternions, in radians.
inline double rotation_angle_between(const UnitQuaternion& a, const UnitQuaternion& b) {
    const double d = std::min(1.0, std::abs(qdot(a, b)));
    return 2.0 * std::acos(d);
}

}  // namespace pgo
