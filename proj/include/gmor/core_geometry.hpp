// Rigid-transform arithmetic, screw (Chasles) decomposition, noise
// thresholds and error metrics shared by the whole registration stack.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace gmor {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double px, double py, double pz) : x(px), y(py), z(pz) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    constexpr double squared_norm() const { return dot(*this); }
    Vec3 normalized() const {
        const double n = norm();
        if (n == 0.0) throw std::invalid_argument("Vec3::normalized: zero vector");
        return {x / n, y / n, z / n};
    }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Vec2 {
    double x = 0.0, y = 0.0;
    constexpr Vec2() = default;
    constexpr Vec2(double px, double py) : x(px), y(py) {}
    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

/// 3x3 rotation matrix, row-major storage.
struct Rot3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
    double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }

    static constexpr Rot3 identity() { return Rot3{}; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Rot3 operator*(const Rot3& o) const {
        Rot3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Rot3 transpose() const {
        Rot3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    double trace() const { return m[0] + m[4] + m[8]; }
    double determinant() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
    // mᵀm = I and det = +1, both within tol.
    bool is_orthonormal(double tol = 1e-9) const {
        const Rot3 g = transpose() * (*this);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double want = (i == j) ? 1.0 : 0.0;
                if (std::abs(g(i, j) - want) > tol) return false;
            }
        return std::abs(determinant() - 1.0) <= tol;
    }
};

struct RigidTransform {
    Rot3 rotation;
    Vec3 translation;

    Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
    static RigidTransform identity() { return {}; }
};

/// Screw parameters of a rigid motion: rotate by `angle` about the line
/// (center, axis) while translating `axial_distance` along the axis.
/// `center` is the origin's projection onto the axis, so center·axis = 0.
struct ScrewParams {
    Vec3 axis;
    double angle = 0.0;
    double axial_distance = 0.0;
    Vec3 center;
};

struct NoiseThresholds {
    double sigma = 0.0;
    double xi3 = 0.0;  // 3D inlier threshold
    double xi1 = 0.0;  // axial (1D) threshold
    double xi2 = 0.0;  // planar (2D) threshold
};

// 95% chi-square quantiles for 1..3 degrees of freedom. Pinned constants;
// the test suite re-derives them through an inverse-CDF oracle.
inline constexpr double kChiSq1_95 = 3.841458820694124;
inline constexpr double kChiSq2_95 = 5.991464547107979;
inline constexpr double kChiSq3_95 = 7.814727903251179;

inline constexpr double kPi = 3.14159265358979323846;

// Rotation angles below this are treated as pure translations: the screw
// center (cot(theta/2) term) is numerically meaningless there.
inline constexpr double kDegenerateAngle = 1e-6;

inline NoiseThresholds noise_thresholds(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("noise_thresholds: sigma must be > 0");
    NoiseThresholds t;
    t.sigma = sigma;
    t.xi3 = sigma * std::sqrt(2.0 * kChiSq3_95);
    t.xi1 = sigma * std::sqrt(2.0 * kChiSq1_95);
    t.xi2 = sigma * std::sqrt(2.0 * kChiSq2_95);
    return t;
}

/// Inverse of noise_thresholds for the 3D threshold: the sigma whose xi3 is `xi`.
inline double sigma_from_xi(double xi) {
    if (!(xi > 0.0)) throw std::invalid_argument("sigma_from_xi: xi must be > 0");
    return xi / std::sqrt(2.0 * kChiSq3_95);
}

inline Rot3 rodrigues(const Vec3& axis, double angle) {
    if (std::abs(axis.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("rodrigues: axis must be unit length");
    const double c = std::cos(angle), s = std::sin(angle), k = 1.0 - c;
    const double x = axis.x, y = axis.y, z = axis.z;
    Rot3 r;
    r(0, 0) = c + k * x * x;     r(0, 1) = k * x * y - s * z; r(0, 2) = k * x * z + s * y;
    r(1, 0) = k * y * x + s * z; r(1, 1) = c + k * y * y;     r(1, 2) = k * y * z - s * x;
    r(2, 0) = k * z * x - s * y; r(2, 1) = k * z * y + s * x; r(2, 2) = c + k * z * z;
    return r;
}

namespace detail {

// Shepperd-style rotation-to-quaternion conversion; stable for all angles.
inline std::array<double, 4> quaternion_from_rotation(const Rot3& r) {
    std::array<double, 4> q{};  // (w, x, y, z)
    const double tr = r.trace();
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        q[0] = 0.25 * s;
        q[1] = (r(2, 1) - r(1, 2)) / s;
        q[2] = (r(0, 2) - r(2, 0)) / s;
        q[3] = (r(1, 0) - r(0, 1)) / s;
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
        double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
        q[0] = (r(2, 1) - r(1, 2)) / s;
        q[1] = 0.25 * s;
        q[2] = (r(0, 1) + r(1, 0)) / s;
        q[3] = (r(0, 2) + r(2, 0)) / s;
    } else if (r(1, 1) > r(2, 2)) {
        double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
        q[0] = (r(0, 2) - r(2, 0)) / s;
        q[1] = (r(0, 1) + r(1, 0)) / s;
        q[2] = 0.25 * s;
        q[3] = (r(1, 2) + r(2, 1)) / s;
    } else {
        double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
        q[0] = (r(1, 0) - r(0, 1)) / s;
        q[1] = (r(0, 2) + r(2, 0)) / s;
        q[2] = (r(1, 2) + r(2, 1)) / s;
        q[3] = 0.25 * s;
    }
    double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    for (auto& v : q) v /= n;
    return q;
}

// Flip so the largest-magnitude axis component is positive; angle and axial
// distance flip with it. Keeps decompositions and top-k dedup deterministic.
inline void canonicalize_axis(Vec3& axis, double& angle, double& distance) {
    double best = std::abs(axis.x);
    double comp = axis.x;
    if (std::abs(axis.y) > best) { best = std::abs(axis.y); comp = axis.y; }
    if (std::abs(axis.z) > best) { comp = axis.z; }
    if (comp < 0.0) {
        axis = -axis;
        angle = -angle;
        distance = -distance;
        if (angle <= -kPi) angle += 2.0 * kPi;  // keep angle in (-pi, pi]
    }
}

}  // namespace detail

/// Extracts the screw parameters of T. Empty when the rotation angle is
/// below the degenerate cutoff (treat T as a pure translation).
inline std::optional<ScrewParams> chasles_decompose(const RigidTransform& T) {
    const auto q = detail::quaternion_from_rotation(T.rotation);
    const double vnorm = std::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    double angle = 2.0 * std::atan2(vnorm, q[0]);  // in [0, 2pi)
    if (angle > kPi) angle -= 2.0 * kPi;
    if (std::abs(angle) <= kDegenerateAngle || vnorm == 0.0) return std::nullopt;

    Vec3 axis{q[1] / vnorm, q[2] / vnorm, q[3] / vnorm};
    double distance = axis.dot(T.translation);
    detail::canonicalize_axis(axis, angle, distance);

    // C = 1/2 (I - rr^T + r_x cot(theta/2)) t  — the origin projected onto the axis.
    const Vec3& t = T.translation;
    const double cot_half = std::cos(angle / 2.0) / std::sin(angle / 2.0);
    const Vec3 c = 0.5 * ((t - axis * axis.dot(t)) + axis.cross(t) * cot_half);

    return ScrewParams{axis, angle, distance, c};
}

/// Rebuilds the rigid transform from stage outputs: rotation angle about
/// `axis`, translation `axial_distance` along it, and the rotation-center
/// coordinates in the (e1, e2) plane basis.
inline RigidTransform screw_recompose(const Vec3& axis, double angle, double axial_distance,
                                      const Vec2& center2d, const Vec3& e1, const Vec3& e2) {
    const double tol = 1e-9;
    if (std::abs(e1.norm() - 1.0) > tol || std::abs(e2.norm() - 1.0) > tol ||
        std::abs(axis.norm() - 1.0) > tol || std::abs(e1.dot(e2)) > tol ||
        std::abs(e1.dot(axis)) > tol || std::abs(e2.dot(axis)) > tol ||
        std::abs(e1.cross(e2).dot(axis) - 1.0) > tol)
        throw std::invalid_argument("screw_recompose: basis (e1, e2, axis) must be orthonormal right-handed");

    const Rot3 r = rodrigues(axis, angle);
    const Vec3 c3 = e1 * center2d.x + e2 * center2d.y;
    const Vec3 t = axis * axial_distance + (c3 - r * c3);
    return RigidTransform{r, t};
}

/// Chordal rotation error in degrees and Euclidean translation error.
inline std::pair<double, double> registration_errors(const RigidTransform& est,
                                                     const RigidTransform& gt) {
    const Rot3 rel = est.rotation.transpose() * gt.rotation;
    double c = 0.5 * (rel.trace() - 1.0);
    c = std::min(1.0, std::max(-1.0, c));
    const double re = std::acos(c) * 180.0 / kPi;
    const double te = (est.translation - gt.translation).norm();
    return {re, te};
}

/// Deterministic orthonormal right-handed basis of the plane perpendicular
/// to `axis`: e1 = normalize(axis × a) with a the standard basis vector of
/// smallest |axis·a| (ties x before y before z), e2 = axis × e1.
inline std::pair<Vec3, Vec3> plane_basis(const Vec3& axis) {
    const double ax = std::abs(axis.x), ay = std::abs(axis.y), az = std::abs(axis.z);
    Vec3 a{1, 0, 0};
    if (ay < ax || az < ax) a = (ay <= az) ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
    const Vec3 e1 = axis.cross(a).normalized();
    const Vec3 e2 = axis.cross(e1);
    return {e1, e2};
}

}  // namespace gmor
