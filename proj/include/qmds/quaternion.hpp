#pragma once

/**
 * @file quaternion.hpp
 * @brief Hamilton quaternions q = w + x i + y j + z k.
 *
 * i² = j² = k² = ijk = -1, so ij = k, jk = i, ki = j and the products
 * anticommute. Multiplication by a real scalar commutes.
 */

#include <cmath>
#include <span>
#include <vector>

#include "qmds/errors.hpp"

namespace qmds {

struct Quaternion {
    double w = 0.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Quaternion() = default;
    constexpr Quaternion(double w_, double x_ = 0.0, double y_ = 0.0, double z_ = 0.0)
        : w(w_), x(x_), y(y_), z(z_) {}

    static constexpr Quaternion i() { return {0.0, 1.0, 0.0, 0.0}; }
    static constexpr Quaternion j() { return {0.0, 0.0, 1.0, 0.0}; }
    static constexpr Quaternion k() { return {0.0, 0.0, 0.0, 1.0}; }

    constexpr bool operator==(const Quaternion&) const = default;

    constexpr Quaternion operator-() const { return {-w, -x, -y, -z}; }

    constexpr Quaternion& operator+=(const Quaternion& o) {
        w += o.w; x += o.x; y += o.y; z += o.z;
        return *this;
    }
    constexpr Quaternion& operator-=(const Quaternion& o) {
        w -= o.w; x -= o.x; y -= o.y; z -= o.z;
        return *this;
    }
    constexpr Quaternion& operator*=(double s) {
        w *= s; x *= s; y *= s; z *= s;
        return *this;
    }
    constexpr Quaternion& operator/=(double s) {
        w /= s; x /= s; y /= s; z /= s;
        return *this;
    }

    constexpr double norm_squared() const { return w * w + x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm_squared()); }
    constexpr Quaternion conj() const { return {w, -x, -y, -z}; }

    /// q⁻¹ = q* / ‖q‖². Throws ZeroQuaternion for q = 0.
    Quaternion inverse() const {
        const double n2 = norm_squared();
        if (n2 == 0.0) {
            throw Error(ErrorCode::ZeroQuaternion, "reciprocal of the zero quaternion");
        }
        return {w / n2, -x / n2, -y / n2, -z / n2};
    }
};

constexpr Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
constexpr Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
constexpr Quaternion operator*(Quaternion a, double s) { return a *= s; }
constexpr Quaternion operator*(double s, Quaternion a) { return a *= s; }
constexpr Quaternion operator/(Quaternion a, double s) { return a /= s; }

// Hamilton product.
constexpr Quaternion operator*(const Quaternion& p, const Quaternion& q) {
    return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
            p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
            p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
            p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

constexpr Quaternion conj(const Quaternion& q) { return q.conj(); }
inline double norm(const Quaternion& q) { return q.norm(); }

/// Real inner product ⟨p, q⟩ = Re(p q*) on H viewed as R⁴.
constexpr double dot(const Quaternion& p, const Quaternion& q) {
    return p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z;
}

struct ConjNormInv {
    Quaternion conjugate;
    double norm;
    Quaternion reciprocal;
};

inline ConjNormInv conj_norm_inv(const Quaternion& q) {
    return {q.conj(), q.norm(), q.inverse()};
}

using QuaternionVector = std::vector<Quaternion>;

inline double norm_squared(std::span<const Quaternion> v) {
    double s = 0.0;
    for (const auto& q : v) s += q.norm_squared();
    return s;
}

inline double norm(std::span<const Quaternion> v) { return std::sqrt(norm_squared(v)); }

/// v^H w = Σ conj(v_m) w_m.
inline Quaternion inner(std::span<const Quaternion> v, std::span<const Quaternion> w) {
    if (v.size() != w.size()) {
        throw Error(ErrorCode::DimensionMismatch, "inner: vector lengths differ");
    }
    Quaternion s;
    for (std::size_t m = 0; m < v.size(); ++m) s += v[m].conj() * w[m];
    return s;
}

/// Entrywise right multiplication v g.
inline QuaternionVector right_multiply(std::span<const Quaternion> v, const Quaternion& g) {
    QuaternionVector out(v.size());
    for (std::size_t m = 0; m < v.size(); ++m) out[m] = v[m] * g;
    return out;
}

}  // namespace qmds
