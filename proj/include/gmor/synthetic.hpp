// Synthetic benchmark instances: cube-normalized random sources, a uniform
// random rigid motion, per-dimension Gaussian noise and sphere outliers.
#pragma once

#include "gmor/core_geometry.hpp"
#include "gmor/correspondence.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace gmor {

struct SyntheticConfig {
    long n = 1000;
    double outlier_ratio = 0.0;
    double sigma = 0.01;
    std::uint64_t seed = 0;
    double sphere_diameter = 10.0;
    bool normalize_cube = true;
    bool z_axis_only = false;  // rotation restricted to the z axis
};

struct SyntheticInstance {
    std::vector<WeightedCorrespondence> corr;
    RigidTransform truth;
};

namespace detail {

// mt19937_64 as the bit source, with hand-rolled variate transforms so the
// streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform01(); } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return mag * std::cos(2.0 * kPi * u2);
    }

    Vec3 in_sphere(double radius) {
        for (;;) {
            const Vec3 v{uniform(-radius, radius), uniform(-radius, radius),
                         uniform(-radius, radius)};
            if (v.squared_norm() <= radius * radius) return v;
        }
    }

    Vec3 unit_vector() {
        for (;;) {
            const Vec3 v{gaussian(), gaussian(), gaussian()};
            const double n = v.norm();
            if (n > 1e-12) return v * (1.0 / n);
        }
    }

    Rot3 rotation() {
        // uniform quaternion from four gaussians
        for (;;) {
            const double w = gaussian(), x = gaussian(), y = gaussian(), z = gaussian();
            const double n = std::sqrt(w * w + x * x + y * y + z * z);
            if (n <= 1e-12) continue;
            const double qw = w / n, qx = x / n, qy = y / n, qz = z / n;
            Rot3 r;
            r(0, 0) = 1 - 2 * (qy * qy + qz * qz); r(0, 1) = 2 * (qx * qy - qw * qz); r(0, 2) = 2 * (qx * qz + qw * qy);
            r(1, 0) = 2 * (qx * qy + qw * qz); r(1, 1) = 1 - 2 * (qx * qx + qz * qz); r(1, 2) = 2 * (qy * qz - qw * qx);
            r(2, 0) = 2 * (qx * qz - qw * qy); r(2, 1) = 2 * (qy * qz + qw * qx); r(2, 2) = 1 - 2 * (qx * qx + qy * qy);
            return r;
        }
    }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace detail

inline SyntheticInstance generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.n < 3) throw std::invalid_argument("generate_synthetic: n must be >= 3");
    if (!(cfg.outlier_ratio >= 0.0 && cfg.outlier_ratio < 1.0))
        throw std::invalid_argument("generate_synthetic: outlier_ratio must be in [0, 1)");
    if (!(cfg.sigma >= 0.0)) throw std::invalid_argument("generate_synthetic: sigma must be >= 0");
    if (!(cfg.sphere_diameter > 0.0))
        throw std::invalid_argument("generate_synthetic: sphere_diameter must be > 0");

    detail::Rng rng(cfg.seed);
    const double radius = cfg.sphere_diameter * 0.5;

    std::vector<Vec3> src(static_cast<std::size_t>(cfg.n));
    for (auto& p : src) p = rng.in_sphere(radius);

    if (cfg.normalize_cube) {
        Vec3 lo = src.front(), hi = src.front();
        for (const auto& p : src) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
        auto rescale = [](double v, double a, double b) {
            return b > a ? 2.0 * (v - a) / (b - a) - 1.0 : 0.0;
        };
        for (auto& p : src)
            p = {rescale(p.x, lo.x, hi.x), rescale(p.y, lo.y, hi.y), rescale(p.z, lo.z, hi.z)};
    }

    SyntheticInstance out;
    out.truth.rotation = cfg.z_axis_only
                             ? rodrigues({0, 0, 1}, rng.uniform(-kPi, kPi))
                             : rng.rotation();
    out.truth.translation = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};

    out.corr.reserve(src.size());
    for (const auto& p : src) {
        Vec3 q = out.truth * p;
        if (cfg.sigma > 0.0)
            q += Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()} * cfg.sigma;
        if (rng.uniform01() < cfg.outlier_ratio) q = rng.in_sphere(radius);
        out.corr.push_back(make_correspondence(p, q));
    }
    return out;
}

}  // namespace gmor
