// Stage II: 1D branch-and-bound over the rotation angle on the plane
// perpendicular to a candidate axis. Branch bounds are maximum weighted
// overlaps of rotation-center bounding rectangles (sweep line + segment
// tree); the near-zero-angle slab degenerates to a 2D translation search.
#pragma once

#include "gmor/core_geometry.hpp"
#include "gmor/rect_overlap_rmq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

namespace gmor {

struct PlanarCorrespondence {
    Vec2 p;
    Vec2 q;
    double weight = 1.0;
};

struct AngleBranch {
    double theta_lo = 0.0, theta_hi = 0.0;
    double upper = 0.0, lower = 0.0;
};

struct Angle2DResult {
    double theta = 0.0;
    Vec2 center;        // rotation center, valid when !pure_translation
    Vec2 translation;   // planar translation, valid when pure_translation
    bool pure_translation = false;
    double weight = 0.0;
    std::vector<std::int32_t> inliers;
};

/// Rotation center that maps p to q under a rotation by theta:
/// c = m + v·cot(theta/2). Empty for angles at the degenerate cutoff.
inline std::optional<Vec2> rotation_center(const Vec2& p, const Vec2& q, double theta) {
    const double wrapped = std::remainder(theta, 2.0 * kPi);
    if (std::abs(wrapped) <= kDegenerateAngle) return std::nullopt;
    const Vec2 m = (p + q) * 0.5;
    const Vec2 d = q - p;
    const Vec2 v{-0.5 * d.y, 0.5 * d.x};
    const double cot_half = std::cos(wrapped / 2.0) / std::sin(wrapped / 2.0);
    return m + v * cot_half;
}

struct CenterThreshold {
    double xi_c = 0.0;      // disc radius of the rotation-center noise region
    double xi_c_hat = 0.0;  // half-edge of the equal-area square
};

inline std::optional<CenterThreshold> center_threshold(double theta, double sigma) {
    const double wrapped = std::remainder(theta, 2.0 * kPi);
    if (std::abs(wrapped) <= kDegenerateAngle) return std::nullopt;
    const double csc_half = 1.0 / std::abs(std::sin(wrapped / 2.0));
    const double xi_c = sigma * std::sqrt(0.5 * kChiSq2_95) * csc_half;
    return CenterThreshold{xi_c, std::sqrt(kPi) * 0.5 * xi_c};
}

/// Upper/lower rotation-center rectangles for a sign-pure angle interval.
/// The upper box hulls the endpoint evaluations of c(theta) +- xi_c_hat
/// (valid because x_c, y_c are linear and xi_c_hat convex in cot(theta/2));
/// the lower box is the square at the interval midpoint.
inline std::pair<WeightedRect, WeightedRect> center_boxes(const Vec2& p, const Vec2& q,
                                                          double theta_lo, double theta_hi,
                                                          double sigma, double weight = 1.0) {
    if (!(theta_lo <= theta_hi))
        throw std::invalid_argument("center_boxes: empty angle interval");
    if (theta_lo < 0.0 && theta_hi > 0.0)
        throw std::invalid_argument("center_boxes: angle interval must not straddle zero");
    const auto c_lo = rotation_center(p, q, theta_lo);
    const auto c_hi = rotation_center(p, q, theta_hi);
    const auto t_lo = center_threshold(theta_lo, sigma);
    const auto t_hi = center_threshold(theta_hi, sigma);
    if (!c_lo || !c_hi || !t_lo || !t_hi)
        throw std::invalid_argument("center_boxes: interval touches the degenerate angle");

    WeightedRect upper;
    upper.x_lo = std::min(c_lo->x - t_lo->xi_c_hat, c_hi->x - t_hi->xi_c_hat);
    upper.x_hi = std::max(c_lo->x + t_lo->xi_c_hat, c_hi->x + t_hi->xi_c_hat);
    upper.y_lo = std::min(c_lo->y - t_lo->xi_c_hat, c_hi->y - t_hi->xi_c_hat);
    upper.y_hi = std::max(c_lo->y + t_lo->xi_c_hat, c_hi->y + t_hi->xi_c_hat);
    upper.weight = weight;

    const double theta_c = 0.5 * (theta_lo + theta_hi);
    const auto c_mid = rotation_center(p, q, theta_c);
    const auto t_mid = center_threshold(theta_c, sigma);
    WeightedRect lower{c_mid->x - t_mid->xi_c_hat, c_mid->y - t_mid->xi_c_hat,
                       c_mid->x + t_mid->xi_c_hat, c_mid->y + t_mid->xi_c_hat, weight};
    return {upper, lower};
}

struct TranslationOverlap {
    double weight = 0.0;
    Vec2 translation;
    std::vector<std::int32_t> inliers;
};

/// Translation-only consensus: equal-area squares around the difference
/// vectors q - p, solved by the rectangle sweep.
inline TranslationOverlap translation_only_overlap(const std::vector<PlanarCorrespondence>& corr,
                                                   double xi2) {
    if (corr.empty()) throw std::invalid_argument("translation_only_overlap: empty input");
    const double half = std::sqrt(kPi) * 0.5 * xi2;
    std::vector<WeightedRect> rects;
    rects.reserve(corr.size());
    for (const auto& c : corr) {
        const Vec2 d = c.q - c.p;
        rects.push_back({d.x - half, d.y - half, d.x + half, d.y + half, c.weight});
    }
    const auto hit = max_rect_overlap(rects);
    TranslationOverlap out;
    out.weight = hit.weight;
    out.translation = {hit.x, hit.y};
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(rects.size()); ++i) {
        const auto& r = rects[static_cast<std::size_t>(i)];
        if (hit.x >= r.x_lo && hit.x <= r.x_hi && hit.y >= r.y_lo && hit.y <= r.y_hi)
            out.inliers.push_back(i);
    }
    return out;
}

struct AngleBranchInfo {
    double theta_lo, theta_hi;
    double upper = 0.0, lower = 0.0;
    bool has_lower = false;
};
using AngleObserver = std::function<void(const AngleBranchInfo&)>;

struct AngleSearchConfig {
    double epsilon = 0.05;    // minimum branch width, radians
    double epsilon_b = 1e-3;  // bound-gap termination threshold
};

struct AngleSearchOutput {
    Angle2DResult result;
    long branches_evaluated = 0;
};

namespace detail {

struct AngleQueueEntry {
    double theta_lo, theta_hi;
    double upper;

    bool operator<(const AngleQueueEntry& o) const {
        if (upper != o.upper) return upper < o.upper;
        const double wa = theta_hi - theta_lo, wb = o.theta_hi - o.theta_lo;
        if (wa != wb) return wa > wb;  // smaller width first
        return theta_lo > o.theta_lo;
    }
};

}  // namespace detail

/// Stage II search over theta in [-pi, -eps/2] U [eps/2, pi]; the excluded
/// slab is covered by the translation-only path, which may win outright.
inline AngleSearchOutput angle_bnb(const std::vector<PlanarCorrespondence>& corr,
                                   const AngleSearchConfig& cfg, double sigma,
                                   const AngleObserver& observer = {}) {
    if (corr.empty()) throw std::invalid_argument("angle_bnb: empty input");
    if (!(sigma > 0.0)) throw std::invalid_argument("angle_bnb: sigma must be > 0");

    const double xi2 = sigma * std::sqrt(2.0 * kChiSq2_95);
    AngleSearchOutput out;

    const TranslationOverlap trans = translation_only_overlap(corr, xi2);
    double best_lower = trans.weight;

    struct Winner {
        double theta_c = 0.0;
        Vec2 center;
        double lower = -1.0;
    } winner;

    SweepWorkspace ws;
    std::vector<WeightedRect> upper_rects(corr.size()), lower_rects(corr.size());
    std::priority_queue<detail::AngleQueueEntry> queue;

    auto handle = [&](double theta_lo, double theta_hi) {
        for (std::size_t i = 0; i < corr.size(); ++i) {
            auto [u, l] = center_boxes(corr[i].p, corr[i].q, theta_lo, theta_hi, sigma,
                                       corr[i].weight);
            upper_rects[i] = u;
            lower_rects[i] = l;
        }
        const double upper = max_rect_overlap(upper_rects, ws).weight;
        ++out.branches_evaluated;
        if (upper < best_lower) {
            if (observer) observer({theta_lo, theta_hi, upper, 0.0, false});
            return;
        }
        const auto low_hit = max_rect_overlap(lower_rects, ws);
        if (observer) observer({theta_lo, theta_hi, upper, low_hit.weight, true});
        best_lower = std::max(best_lower, low_hit.weight);

        const bool too_narrow = (theta_hi - theta_lo) < cfg.epsilon;
        const bool converged = (upper - low_hit.weight) < cfg.epsilon_b;
        if (too_narrow || converged) {
            const double theta_c = 0.5 * (theta_lo + theta_hi);
            if (low_hit.weight > winner.lower) {
                winner.theta_c = theta_c;
                winner.center = {low_hit.x, low_hit.y};
                winner.lower = low_hit.weight;
            }
        } else {
            queue.push({theta_lo, theta_hi, upper});
        }
    };

    // Eight sign-pure initial branches of equal width per sign.
    const double eps_half = cfg.epsilon * 0.5;
    const double span = (kPi - eps_half) / 4.0;
    for (int k = 0; k < 4; ++k) handle(eps_half + k * span, eps_half + (k + 1) * span);
    for (int k = 0; k < 4; ++k) handle(-eps_half - (k + 1) * span, -eps_half - k * span);

    while (!queue.empty()) {
        const auto entry = queue.top();
        queue.pop();
        if (entry.upper < best_lower) continue;
        const double mid = 0.5 * (entry.theta_lo + entry.theta_hi);
        handle(entry.theta_lo, mid);
        handle(mid, entry.theta_hi);
    }

    Angle2DResult& res = out.result;
    if (winner.lower < 0.0 || trans.weight > winner.lower) {
        res.pure_translation = true;
        res.theta = 0.0;
        res.translation = trans.translation;
        for (std::int32_t i = 0; i < static_cast<std::int32_t>(corr.size()); ++i) {
            const Vec2 resid = (corr[static_cast<std::size_t>(i)].q -
                                corr[static_cast<std::size_t>(i)].p) -
                               res.translation;
            if (resid.norm() <= xi2) res.inliers.push_back(i);
        }
    } else {
        res.pure_translation = false;
        res.theta = winner.theta_c;
        res.center = winner.center;
        const double c = std::cos(res.theta), s = std::sin(res.theta);
        for (std::int32_t i = 0; i < static_cast<std::int32_t>(corr.size()); ++i) {
            const auto& pc = corr[static_cast<std::size_t>(i)];
            const Vec2 dp = pc.p - res.center;
            const Vec2 rotated{c * dp.x - s * dp.y, s * dp.x + c * dp.y};
            const Vec2 resid = (pc.q - res.center) - rotated;
            if (resid.norm() <= xi2) res.inliers.push_back(i);
        }
    }
    double w = 0.0;
    for (std::int32_t i : res.inliers) w += corr[static_cast<std::size_t>(i)].weight;
    res.weight = w;
    return out;
}

}  // namespace gmor
