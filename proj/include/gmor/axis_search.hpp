// Stage I: best-first branch-and-bound over rotation-axis directions on the
// cube-mapped hemisphere. Bounds come from interval stabbing of the axis
// projections of the correspondence difference vectors.
#pragma once

#include "gmor/core_geometry.hpp"
#include "gmor/correspondence.hpp"
#include "gmor/interval_rmq.hpp"
#include "gmor/parallel.hpp"
#include "gmor/symmetric_eigen.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gmor {

enum class CubeFace : int { PosZ = 0, PosX = 1, PosY = 2 };

struct CubeBranch {
    CubeFace face = CubeFace::PosZ;
    double x_lo = -1.0, x_hi = 1.0;
    double y_lo = -1.0, y_hi = 1.0;
    double upper = 0.0;
    double lower = 0.0;
    double d_star = 0.0;
    std::optional<std::pair<double, double>> d_range;
    std::shared_ptr<const std::vector<std::int32_t>> active;  // null = all correspondences
};

struct AxisCandidate {
    Vec3 axis;
    double distance = 0.0;
    double lower_weight = 0.0;
    std::vector<std::int32_t> inliers;
};

struct Stage1Config {
    double epsilon = 0.05;    // minimum branch width (cube-face coordinates)
    double epsilon_b = 1e-3;  // bound-gap termination threshold
    double rho = 0.25;        // gradually-converged ratio
    int top_k = 12;
    std::optional<CubeFace> face_restriction;
};

/// Maps cube-face coordinates to a unit rotation axis.
inline Vec3 cube_to_axis(CubeFace face, double x_f, double y_f) {
    if (std::abs(x_f) > 1.0 || std::abs(y_f) > 1.0)
        throw std::invalid_argument("cube_to_axis: face coordinates must lie in [-1, 1]");
    switch (face) {
        case CubeFace::PosZ: return Vec3{x_f, y_f, 1.0}.normalized();
        case CubeFace::PosX: return Vec3{1.0, x_f, y_f}.normalized();
        case CubeFace::PosY: return Vec3{x_f, 1.0, y_f}.normalized();
    }
    throw std::invalid_argument("cube_to_axis: unknown face");
}

inline Vec3 branch_center_axis(const CubeBranch& b) {
    return cube_to_axis(b.face, 0.5 * (b.x_lo + b.x_hi), 0.5 * (b.y_lo + b.y_hi));
}

/// Half-angle of the spherical cap containing every axis of the branch:
/// the maximum corner angle to the center axis.
inline double cap_half_angle(const CubeBranch& b) {
    const Vec3 c = branch_center_axis(b);
    double worst = 1.0;
    for (double x : {b.x_lo, b.x_hi})
        for (double y : {b.y_lo, b.y_hi}) worst = std::min(worst, cube_to_axis(b.face, x, y).dot(c));
    worst = std::min(1.0, std::max(-1.0, worst));
    return std::acos(worst);
}

struct ProjectionBounds {
    WeightedInterval lower;  // interval at the center axis
    WeightedInterval upper;  // interval valid for every axis in the cap
};

/// Projection interval bounds of a difference vector s for all axes within
/// the tau-cap around r_c, padded by the 1D noise threshold xi1.
inline ProjectionBounds projection_bounds(const Vec3& s, const Vec3& r_c, double tau, double xi1,
                                          double weight = 1.0) {
    const double proj = r_c.dot(s);
    const double s_norm2 = s.squared_norm();
    const double s_norm = std::sqrt(s_norm2);
    const double cos_t = std::cos(tau), sin_t = std::sin(tau);
    const double d_par = proj * cos_t;
    const double d_perp = std::sqrt(std::max(s_norm2 - proj * proj, 0.0)) * sin_t;

    ProjectionBounds b;
    b.lower = {proj - xi1, proj + xi1, weight};
    if (proj >= 0.0) {
        const double hi = (s_norm * cos_t > proj) ? d_par + d_perp + xi1 : s_norm + xi1;
        b.upper = {d_par - d_perp - xi1, hi, weight};
    } else {
        const double lo = (s_norm * cos_t > -proj) ? d_par - d_perp - xi1 : -s_norm - xi1;
        b.upper = {lo, d_par + d_perp + xi1, weight};
    }
    return b;
}

struct PlaneFit {
    Vec3 axis;
    double distance = 0.0;
};

/// Least-squares plane through weighted points: normal is the smallest-
/// eigenvalue direction of the weighted covariance. Empty on collinear or
/// undersized input.
inline std::optional<PlaneFit> fit_plane(const std::vector<Vec3>& points,
                                         const std::vector<double>& weights) {
    if (points.size() != weights.size())
        throw std::invalid_argument("fit_plane: points/weights size mismatch");
    if (points.size() < 3) return std::nullopt;

    double wsum = 0.0;
    Vec3 centroid;
    for (std::size_t i = 0; i < points.size(); ++i) {
        wsum += weights[i];
        centroid += points[i] * weights[i];
    }
    if (!(wsum > 0.0)) return std::nullopt;
    centroid = centroid * (1.0 / wsum);

    std::array<double, 9> cov{};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3 d = points[i] - centroid;
        const double w = weights[i] / wsum;
        cov[0] += w * d.x * d.x; cov[1] += w * d.x * d.y; cov[2] += w * d.x * d.z;
        cov[4] += w * d.y * d.y; cov[5] += w * d.y * d.z; cov[8] += w * d.z * d.z;
    }
    cov[3] = cov[1]; cov[6] = cov[2]; cov[7] = cov[5];

    const auto eig = detail::jacobi_eigen<3>(cov);
    // collinear spread: second eigenvalue vanishes relative to the largest
    if (eig.values[1] <= 1e-12 * std::max(eig.values[2], 1e-300)) return std::nullopt;

    Vec3 axis{eig.vectors[0], eig.vectors[1], eig.vectors[2]};
    axis = axis.normalized();
    double distance = axis.dot(centroid);
    double dummy_angle = 0.0;
    detail::canonicalize_axis(axis, dummy_angle, distance);
    return PlaneFit{axis, distance};
}

/// Per-branch observer hook for tests; lower/d_range fields are only
/// meaningful when has_lower is set (branches pruned by the upper bound
/// skip them).
struct Stage1BranchInfo {
    CubeFace face;
    double x_lo, x_hi, y_lo, y_hi;
    double upper = 0.0;
    double lower = 0.0;
    bool has_lower = false;
    const std::vector<std::int32_t>* active = nullptr;  // null = all
    std::optional<std::pair<double, double>> d_range;
};
using Stage1Observer = std::function<void(const Stage1BranchInfo&)>;

struct Stage1Result {
    std::vector<AxisCandidate> candidates;
    long branches_evaluated = 0;
};

namespace detail {

// Flat per-correspondence data, hoisted out of the branch loop.
struct Stage1Data {
    const std::vector<WeightedCorrespondence>* corr = nullptr;
    std::vector<double> s_norm, s_norm2;
    double xi1 = 0.0, rho = 0.0;
};

// Per-worker scratch buffers for one branch bound evaluation.
struct Stage1Scratch {
    std::vector<std::pair<double, double>> proj_w;    // (projection, weight), sorted
    std::vector<double> prefix;                       // prefix weights over proj_w
    std::vector<std::pair<double, double>> upper_ev;  // (coordinate, signed weight)
};

struct BranchEval {
    bool pruned = false;
    double upper = 0.0, lower = 0.0, d_star = 0.0;
    std::optional<std::pair<double, double>> d_range;
};

// Upper-bound events sort by coordinate with openings (+w) first at ties;
// any order among equal (x, w) leaves the sweep results unchanged.
inline bool upper_event_less(const std::pair<double, double>& a,
                             const std::pair<double, double>& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
}

// Bound evaluation against a snapshot of the global best lower bound; the
// caller merges lower-bound updates afterwards, so parallel sibling
// evaluations stay deterministic. The parent's upper bound clamps the
// child's: the child region is a subset of the parent's, so the parent
// bound stays valid and keeps the refinement monotone (a child's corner cap
// can otherwise poke outside the parent's cap).
inline BranchEval evaluate_stage1_branch(const Stage1Data& data, Stage1Scratch& ws,
                                         const CubeBranch& b, double best_lower_snapshot,
                                         double parent_upper) {
    const auto& corr = *data.corr;
    const Vec3 r_c = branch_center_axis(b);
    const double tau = cap_half_angle(b);
    const double cos_t = std::cos(tau), sin_t = std::sin(tau);
    const double xi1 = data.xi1;

    ws.proj_w.clear();
    ws.upper_ev.clear();
    auto add = [&](std::int32_t idx) {
        const auto i = static_cast<std::size_t>(idx);
        const double w = corr[i].weight;
        const double proj = r_c.dot(corr[i].s);
        ws.proj_w.emplace_back(proj, w);

        const double sn = data.s_norm[i];
        const double d_par = proj * cos_t;
        const double d_perp = std::sqrt(std::max(data.s_norm2[i] - proj * proj, 0.0)) * sin_t;
        double lo, hi;
        if (proj >= 0.0) {
            lo = d_par - d_perp - xi1;
            hi = (sn * cos_t > proj) ? d_par + d_perp + xi1 : sn + xi1;
        } else {
            lo = (sn * cos_t > -proj) ? d_par - d_perp - xi1 : -sn - xi1;
            hi = d_par + d_perp + xi1;
        }
        ws.upper_ev.emplace_back(lo, w);
        ws.upper_ev.emplace_back(hi, -w);
    };
    if (b.active) {
        for (std::int32_t idx : *b.active) add(idx);
    } else {
        for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(corr.size()); ++idx) add(idx);
    }

    BranchEval out;
    if (ws.upper_ev.empty()) {
        out.pruned = true;
        return out;
    }

    std::sort(ws.upper_ev.begin(), ws.upper_ev.end(), upper_event_less);
    double cur = 0.0, upper = 0.0;
    for (const auto& [x, w] : ws.upper_ev) {
        cur += w;
        upper = std::max(upper, cur);
    }
    upper = std::min(upper, parent_upper);
    out.upper = upper;
    if (upper < best_lower_snapshot) {
        out.pruned = true;
        return out;
    }

    // Lower bound: all intervals at the center axis share width 2*xi1, so a
    // sliding window over the sorted projections replaces the event sweep.
    std::sort(ws.proj_w.begin(), ws.proj_w.end());
    const std::size_t m = ws.proj_w.size();
    ws.prefix.resize(m + 1);
    ws.prefix[0] = 0.0;
    for (std::size_t i = 0; i < m; ++i) ws.prefix[i + 1] = ws.prefix[i] + ws.proj_w[i].second;
    double lower = 0.0, d_star = ws.proj_w[0].first - xi1;
    const double window = 2.0 * xi1;
    std::size_t j = 0;
    bool first = true;
    for (std::size_t i = 0; i < m; ++i) {
        while (ws.proj_w[j].first < ws.proj_w[i].first - window) ++j;
        const double sum = ws.prefix[i + 1] - ws.prefix[j];
        if (first || sum > lower) {
            lower = sum;
            d_star = ws.proj_w[i].first - xi1;
            first = false;
        }
    }
    out.lower = lower;
    out.d_star = d_star;

    // Gradually converged range on the upper events, against the freshest
    // lower bound available to this evaluation.
    const double best_lower = std::max(best_lower_snapshot, lower);
    const double w_rho = data.rho * upper + (1.0 - data.rho) * best_lower;
    cur = 0.0;
    bool seen = false;
    double lo = 0.0, hi = 0.0;
    for (const auto& [x, w] : ws.upper_ev) {
        const double prev = cur;
        cur += w;
        if (!seen && cur >= w_rho) {
            seen = true;
            lo = x;
        }
        if (seen && prev >= w_rho && cur < w_rho) hi = x;
    }
    if (seen) {
        if (cur >= w_rho) hi = ws.upper_ev.back().first;
        out.d_range = std::make_pair(lo, hi);
    }
    return out;
}

struct Stage1QueueOrder {
    bool operator()(const CubeBranch& a, const CubeBranch& b) const {
        if (a.upper != b.upper) return a.upper < b.upper;  // max-heap on upper bound
        const double area_a = (a.x_hi - a.x_lo) * (a.y_hi - a.y_lo);
        const double area_b = (b.x_hi - b.x_lo) * (b.y_hi - b.y_lo);
        if (area_a != area_b) return area_a > area_b;  // smaller area first
        if (a.face != b.face) return static_cast<int>(a.face) > static_cast<int>(b.face);
        if (a.x_lo != b.x_lo) return a.x_lo > b.x_lo;
        return a.y_lo > b.y_lo;
    }
};

}  // namespace detail

/// Stage I search. Returns up to top_k axis candidates ordered by their
/// recorded lower weights, each refined by plane fitting on its inliers.
/// Sibling branch evaluations run against a snapshot of the best lower
/// bound and merge in a fixed order, so any worker count gives bit-identical
/// results.
inline Stage1Result axis_bnb(const std::vector<WeightedCorrespondence>& corr,
                             const Stage1Config& cfg, const NoiseThresholds& thresholds,
                             const Stage1Observer& observer = {},
                             detail::WorkerPool* pool = nullptr) {
    if (corr.empty()) throw std::invalid_argument("axis_bnb: empty correspondence set");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 2.0))
        throw std::invalid_argument("axis_bnb: epsilon out of range");
    if (!(cfg.rho >= 0.0 && cfg.rho < 1.0))
        throw std::invalid_argument("axis_bnb: rho out of range");
    if (cfg.top_k < 1) throw std::invalid_argument("axis_bnb: top_k must be >= 1");

    detail::Stage1Data data;
    data.corr = &corr;
    data.xi1 = thresholds.xi1;
    data.rho = cfg.rho;
    data.s_norm.resize(corr.size());
    data.s_norm2.resize(corr.size());
    for (std::size_t i = 0; i < corr.size(); ++i) {
        data.s_norm2[i] = corr[i].s.squared_norm();
        data.s_norm[i] = std::sqrt(data.s_norm2[i]);
    }
    const int workers = pool ? pool->thread_count() : 1;
    std::vector<detail::Stage1Scratch> scratch(static_cast<std::size_t>(workers));

    struct Terminal {
        CubeFace face;
        double x_lo, x_hi, y_lo, y_hi;
        double lower, d_star;
    };
    std::vector<Terminal> terminals;
    std::priority_queue<CubeBranch, std::vector<CubeBranch>, detail::Stage1QueueOrder> queue;
    double best_lower = 0.0;
    Stage1Result result;

    std::vector<CubeBranch> batch;
    std::vector<detail::BranchEval> evals;
    // Returns the number of branches of the batch that survived pruning.
    auto run_batch = [&](double parent_upper) {
        evals.resize(batch.size());
        const double snapshot = best_lower;
        auto task = [&](int t, int worker) {
            evals[static_cast<std::size_t>(t)] = detail::evaluate_stage1_branch(
                data, scratch[static_cast<std::size_t>(worker)],
                batch[static_cast<std::size_t>(t)], snapshot, parent_upper);
        };
        if (pool) {
            pool->run_batch(static_cast<int>(batch.size()), task);
        } else {
            for (int t = 0; t < static_cast<int>(batch.size()); ++t) task(t, 0);
        }
        int survivors = 0;
        for (std::size_t k = 0; k < batch.size(); ++k) {
            CubeBranch& b = batch[k];
            const detail::BranchEval& eval = evals[k];
            ++result.branches_evaluated;
            if (observer) {
                Stage1BranchInfo info{b.face,     b.x_lo,     b.x_hi,        b.y_lo,
                                      b.y_hi,     eval.upper, eval.lower,    !eval.pruned,
                                      b.active.get(), eval.d_range};
                observer(info);
            }
            if (eval.pruned) continue;
            ++survivors;
            best_lower = std::max(best_lower, eval.lower);
            b.upper = eval.upper;
            b.lower = eval.lower;
            b.d_star = eval.d_star;
            b.d_range = eval.d_range;
            const bool too_narrow =
                (b.x_hi - b.x_lo) < cfg.epsilon || (b.y_hi - b.y_lo) < cfg.epsilon;
            const bool converged = (b.upper - b.lower) < cfg.epsilon_b;
            if (too_narrow || converged) {
                terminals.push_back({b.face, b.x_lo, b.x_hi, b.y_lo, b.y_hi, b.lower, b.d_star});
            } else {
                queue.push(std::move(b));
            }
        }
        batch.clear();
        return survivors;
    };

    const std::vector<CubeFace> faces =
        cfg.face_restriction ? std::vector<CubeFace>{*cfg.face_restriction}
                             : std::vector<CubeFace>{CubeFace::PosZ, CubeFace::PosX, CubeFace::PosY};
    for (CubeFace face : faces) {
        for (double x_lo : {-1.0, 0.0}) {
            for (double y_lo : {-1.0, 0.0}) {
                CubeBranch b;
                b.face = face;
                b.x_lo = x_lo;
                b.x_hi = x_lo + 1.0;
                b.y_lo = y_lo;
                b.y_hi = y_lo + 1.0;
                batch.push_back(std::move(b));
            }
        }
    }
    static_cast<void>(run_batch(std::numeric_limits<double>::infinity()));

    std::vector<std::int32_t> filtered;
    while (!queue.empty()) {
        CubeBranch parent = queue.top();
        queue.pop();
        if (parent.upper < best_lower) continue;

        // Children inherit the translation range of the parent and the
        // active subset prefiltered by it (slackened by xi1 per side, since
        // child center axes differ from the parent's).
        std::shared_ptr<const std::vector<std::int32_t>> child_active = parent.active;
        if (parent.d_range) {
            const Vec3 r_c = branch_center_axis(parent);
            const double lo = parent.d_range->first - thresholds.xi1;
            const double hi = parent.d_range->second + thresholds.xi1;
            filtered.clear();
            auto test = [&](std::int32_t idx) {
                const double proj = r_c.dot(corr[static_cast<std::size_t>(idx)].s);
                if (proj >= lo && proj <= hi) filtered.push_back(idx);
            };
            if (parent.active) {
                for (std::int32_t idx : *parent.active) test(idx);
            } else {
                for (std::int32_t idx = 0; idx < static_cast<std::int32_t>(corr.size()); ++idx)
                    test(idx);
            }
            child_active = std::make_shared<const std::vector<std::int32_t>>(filtered);
        }

        const double xm = 0.5 * (parent.x_lo + parent.x_hi);
        const double ym = 0.5 * (parent.y_lo + parent.y_hi);
        for (auto [cx_lo, cx_hi] : {std::pair{parent.x_lo, xm}, std::pair{xm, parent.x_hi}}) {
            for (auto [cy_lo, cy_hi] : {std::pair{parent.y_lo, ym}, std::pair{ym, parent.y_hi}}) {
                CubeBranch child;
                child.face = parent.face;
                child.x_lo = cx_lo;
                child.x_hi = cx_hi;
                child.y_lo = cy_lo;
                child.y_hi = cy_hi;
                child.d_range = parent.d_range;
                child.active = child_active;
                batch.push_back(std::move(child));
            }
        }
        // The prefilter shrinks the children's active sets, so their bounds
        // refer to a reduced problem and can all fall below an incumbent the
        // parent itself achieved. Recording the parent keeps the incumbent
        // chain represented among the candidates.
        if (run_batch(parent.upper) == 0) {
            terminals.push_back({parent.face, parent.x_lo, parent.x_hi, parent.y_lo, parent.y_hi,
                                 parent.lower, parent.d_star});
        }
    }

    // Top-k extraction: best recorded lower weights first. Deduplication by
    // angular separation (axes are lines; the sign is ignored) runs on the
    // plane-fit refined axes: distinct terminal slabs around one physical
    // plane collapse onto the same fitted normal and must not crowd out
    // genuinely different candidates.
    std::sort(terminals.begin(), terminals.end(), [](const Terminal& a, const Terminal& b) {
        if (a.lower != b.lower) return a.lower > b.lower;
        if (a.face != b.face) return static_cast<int>(a.face) < static_cast<int>(b.face);
        if (a.x_lo != b.x_lo) return a.x_lo < b.x_lo;
        return a.y_lo < b.y_lo;
    });

    auto reselect = [&](const Vec3& axis, double d, std::vector<std::int32_t>& out) {
        out.clear();
        for (std::int32_t i = 0; i < static_cast<std::int32_t>(corr.size()); ++i) {
            if (std::abs(axis.dot(corr[static_cast<std::size_t>(i)].s) - d) <= thresholds.xi1)
                out.push_back(i);
        }
    };
    auto separated = [&](const Vec3& a, const Vec3& b) {
        return std::acos(std::min(1.0, std::abs(a.dot(b)))) >= cfg.epsilon;
    };

    std::vector<Vec3> raw_axes;  // pre-refinement screen against re-fitting one slab repeatedly
    std::vector<Vec3> pts;
    std::vector<double> ws;
    for (const auto& t : terminals) {
        if (static_cast<int>(result.candidates.size()) >= cfg.top_k) break;
        CubeBranch geom{t.face, t.x_lo, t.x_hi, t.y_lo, t.y_hi};
        const Vec3 axis0 = branch_center_axis(geom);
        bool dup = false;
        for (const Vec3& a : raw_axes)
            if (!separated(a, axis0)) {
                dup = true;
                break;
            }
        if (dup) continue;
        raw_axes.push_back(axis0);

        AxisCandidate cand;
        cand.axis = axis0;
        cand.distance = t.d_star;
        reselect(cand.axis, cand.distance, cand.inliers);

        if (cand.inliers.size() >= 3) {
            pts.clear();
            ws.clear();
            for (std::int32_t i : cand.inliers) {
                pts.push_back(corr[static_cast<std::size_t>(i)].s);
                ws.push_back(corr[static_cast<std::size_t>(i)].weight);
            }
            if (auto fit = fit_plane(pts, ws)) {
                cand.axis = fit->axis;
                cand.distance = fit->distance;
                reselect(cand.axis, cand.distance, cand.inliers);
            }
        }
        for (const auto& kept : result.candidates)
            if (!separated(kept.axis, cand.axis)) {
                dup = true;
                break;
            }
        if (dup) continue;

        double w = 0.0;
        for (std::int32_t i : cand.inliers) w += corr[static_cast<std::size_t>(i)].weight;
        cand.lower_weight = w;
        result.candidates.push_back(std::move(cand));
    }
    // refinement reselects on the full set, which can reorder achieved weights
    std::stable_sort(result.candidates.begin(), result.candidates.end(),
                     [](const AxisCandidate& a, const AxisCandidate& b) {
                         return a.lower_weight > b.lower_weight;
                     });
    return result;
}

}  // namespace gmor
