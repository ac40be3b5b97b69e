// Post-refinement: weighted rigid alignment (Horn's quaternion method) under
// Tukey's biweight kernel with MAD-based scale annealing.
#pragma once

#include "gmor/core_geometry.hpp"
#include "gmor/symmetric_eigen.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gmor {

struct IRLSConfig {
    double annealing_lambda = 0.5;
    int max_iterations = 5;
    std::optional<double> initial_mu;  // defaults to the xi passed to irls_refine
};

/// Tukey's biweight: (1 - e^2/c^2)^2 for e < c, else 0.
inline double tukey_weight(double residual, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("tukey_weight: scale must be > 0");
    if (residual >= scale) return 0.0;
    const double r = residual / scale;
    const double t = 1.0 - r * r;
    return t * t;
}

/// Weighted least-squares rigid alignment q ~ R p + t. Proper rotation is
/// guaranteed (quaternion parameterization). Empty for collinear input.
inline std::optional<RigidTransform> kabsch_weighted(const std::vector<Vec3>& p,
                                                     const std::vector<Vec3>& q,
                                                     const std::vector<double>& w) {
    if (p.size() != q.size() || p.size() != w.size())
        throw std::invalid_argument("kabsch_weighted: size mismatch");
    if (p.size() < 3) throw std::invalid_argument("kabsch_weighted: need at least 3 points");

    double wsum = 0.0;
    Vec3 pc, qc;
    for (std::size_t i = 0; i < p.size(); ++i) {
        wsum += w[i];
        pc += p[i] * w[i];
        qc += q[i] * w[i];
    }
    if (!(wsum > 0.0)) throw std::invalid_argument("kabsch_weighted: nonpositive total weight");
    pc = pc * (1.0 / wsum);
    qc = qc * (1.0 / wsum);

    // cross-covariance H and the source-side covariance (rank check)
    std::array<double, 9> h{};
    std::array<double, 9> cov{};
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec3 a = p[i] - pc, b = q[i] - qc;
        const double wi = w[i];
        h[0] += wi * a.x * b.x; h[1] += wi * a.x * b.y; h[2] += wi * a.x * b.z;
        h[3] += wi * a.y * b.x; h[4] += wi * a.y * b.y; h[5] += wi * a.y * b.z;
        h[6] += wi * a.z * b.x; h[7] += wi * a.z * b.y; h[8] += wi * a.z * b.z;
        cov[0] += wi * a.x * a.x; cov[1] += wi * a.x * a.y; cov[2] += wi * a.x * a.z;
        cov[4] += wi * a.y * a.y; cov[5] += wi * a.y * a.z; cov[8] += wi * a.z * a.z;
    }
    cov[3] = cov[1]; cov[6] = cov[2]; cov[7] = cov[5];
    const auto spread = detail::jacobi_eigen<3>(cov);
    if (spread.values[1] <= 1e-12 * std::max(spread.values[2], 1e-300)) return std::nullopt;

    // Horn's 4x4 quaternion matrix; its top eigenvector is the rotation.
    const double sxx = h[0], sxy = h[1], sxz = h[2];
    const double syx = h[3], syy = h[4], syz = h[5];
    const double szx = h[6], szy = h[7], szz = h[8];
    std::array<double, 16> n{};
    n[0] = sxx + syy + szz; n[1] = syz - szy;        n[2] = szx - sxz;        n[3] = sxy - syx;
    n[4] = n[1];            n[5] = sxx - syy - szz;  n[6] = sxy + syx;        n[7] = szx + sxz;
    n[8] = n[2];            n[9] = n[6];             n[10] = -sxx + syy - szz; n[11] = syz + szy;
    n[12] = n[3];           n[13] = n[7];            n[14] = n[11];           n[15] = -sxx - syy + szz;

    const auto eig = detail::jacobi_eigen<4>(n);
    const double* qv = &eig.vectors[12];  // eigenvector of the largest eigenvalue
    const double qw = qv[0], qx = qv[1], qy = qv[2], qz = qv[3];

    Rot3 r;
    r(0, 0) = 1 - 2 * (qy * qy + qz * qz); r(0, 1) = 2 * (qx * qy - qw * qz); r(0, 2) = 2 * (qx * qz + qw * qy);
    r(1, 0) = 2 * (qx * qy + qw * qz); r(1, 1) = 1 - 2 * (qx * qx + qz * qz); r(1, 2) = 2 * (qy * qz - qw * qx);
    r(2, 0) = 2 * (qx * qz - qw * qy); r(2, 1) = 2 * (qy * qz + qw * qx); r(2, 2) = 1 - 2 * (qx * qx + qy * qy);

    return RigidTransform{r, qc - r * pc};
}

namespace detail {

inline double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (n % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lo);
    }
    return m;
}

inline double transform_delta(const RigidTransform& a, const RigidTransform& b) {
    double d = 0.0;
    for (int i = 0; i < 9; ++i)
        d = std::max(d, std::abs(a.rotation.m[static_cast<std::size_t>(i)] -
                                 b.rotation.m[static_cast<std::size_t>(i)]));
    d = std::max(d, std::abs(a.translation.x - b.translation.x));
    d = std::max(d, std::abs(a.translation.y - b.translation.y));
    d = std::max(d, std::abs(a.translation.z - b.translation.z));
    return d;
}

}  // namespace detail

/// Scale-annealed IRLS refinement of a rigid transform. Inliers are
/// refiltered each iteration by |e| <= mu, Tukey-weighted with
/// c = 4.685 * MAD, and mu annealed toward the MAD.
inline RigidTransform irls_refine(const std::vector<Vec3>& p, const std::vector<Vec3>& q,
                                  const RigidTransform& init, const IRLSConfig& cfg, double xi) {
    if (p.size() != q.size()) throw std::invalid_argument("irls_refine: size mismatch");
    if (p.empty()) throw std::invalid_argument("irls_refine: empty input");
    if (!(cfg.annealing_lambda > 0.0 && cfg.annealing_lambda < 1.0))
        throw std::invalid_argument("irls_refine: annealing_lambda out of range");
    if (cfg.max_iterations < 1) throw std::invalid_argument("irls_refine: max_iterations < 1");

    RigidTransform current = init;
    double mu = cfg.initial_mu.value_or(xi);
    std::vector<std::int32_t> prev_inliers;
    std::vector<double> residuals(p.size());
    std::vector<std::int32_t> inliers;
    std::vector<double> scratch;
    std::vector<Vec3> pi, qi;
    std::vector<double> wi;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        inliers.clear();
        for (std::size_t i = 0; i < p.size(); ++i) {
            residuals[i] = (q[i] - current * p[i]).norm();
            if (residuals[i] <= mu) inliers.push_back(static_cast<std::int32_t>(i));
        }
        if (inliers.size() < 3) return iter == 0 ? init : current;  // refinement collapse

        scratch.clear();
        for (std::int32_t i : inliers) scratch.push_back(residuals[static_cast<std::size_t>(i)]);
        const double med = detail::median_inplace(scratch);
        scratch.clear();
        for (std::int32_t i : inliers)
            scratch.push_back(std::abs(residuals[static_cast<std::size_t>(i)] - med));
        const double mad = detail::median_inplace(scratch);
        const double c = std::max(4.685 * mad, 1e-12);

        pi.clear(); qi.clear(); wi.clear();
        double wtotal = 0.0;
        for (std::int32_t i : inliers) {
            pi.push_back(p[static_cast<std::size_t>(i)]);
            qi.push_back(q[static_cast<std::size_t>(i)]);
            const double tw = tukey_weight(residuals[static_cast<std::size_t>(i)], c);
            wi.push_back(tw);
            wtotal += tw;
        }
        if (wtotal <= 0.0) std::fill(wi.begin(), wi.end(), 1.0);  // all-at-c degenerate spread

        const auto solved = kabsch_weighted(pi, qi, wi);
        if (!solved) return iter == 0 ? init : current;

        const double mu_next = (1.0 - cfg.annealing_lambda) * mad + cfg.annealing_lambda * mu;
        const bool same_inliers = inliers == prev_inliers;
        const bool tiny_step = detail::transform_delta(*solved, current) < 1e-10;
        current = *solved;
        if (same_inliers && tiny_step) break;
        prev_inliers = inliers;
        mu = mu_next;
    }
    return current;
}

}  // namespace gmor
