// Full registration pipeline: Stage I axis search, per-candidate Stage II
// angle search, screw recomposition, exact consensus reselection and IRLS
// refinement.
#pragma once

#include "gmor/angle_search.hpp"
#include "gmor/axis_search.hpp"
#include "gmor/core_geometry.hpp"
#include "gmor/correspondence.hpp"
#include "gmor/memory_tracker.hpp"
#include "gmor/parallel.hpp"
#include "gmor/refinement.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gmor {

struct RegistrationConfig {
    Stage1Config stage1;
    IRLSConfig irls;
    std::optional<double> sigma;  // exactly one of sigma / xi
    std::optional<double> xi;
    int threads = 1;
};

struct StageTimings {
    double stage1_ms = 0.0;
    double stage2_ms = 0.0;
    double refine_ms = 0.0;
    double total_ms = 0.0;
};

struct RegistrationResult {
    RigidTransform transform;
    double consensus_weight = 0.0;
    std::vector<std::int32_t> inlier_indices;
    int stage1_candidates = 0;
    bool translation_only = false;
    StageTimings timings;
    long branches_stage1 = 0;
    long branches_stage2 = 0;
    std::size_t peak_tracked_bytes = 0;
};

namespace detail {

inline double exact_consensus(const std::vector<WeightedCorrespondence>& corr,
                              const RigidTransform& t, double xi,
                              std::vector<std::int32_t>* inliers = nullptr) {
    double w = 0.0;
    if (inliers) inliers->clear();
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(corr.size()); ++i) {
        const auto& c = corr[static_cast<std::size_t>(i)];
        if ((c.q - t * c.p).norm() <= xi) {
            w += c.weight;
            if (inliers) inliers->push_back(i);
        }
    }
    return w;
}

struct CandidateOutcome {
    bool valid = false;
    RigidTransform transform;
    double consensus = 0.0;
    bool pure_translation = false;
    long branches = 0;
};

inline CandidateOutcome run_stage2_candidate(const std::vector<WeightedCorrespondence>& corr,
                                             const AxisCandidate& cand,
                                             const AngleSearchConfig& cfg2, double sigma,
                                             double xi) {
    CandidateOutcome out;
    if (cand.inliers.empty()) return out;

    const auto [e1, e2] = plane_basis(cand.axis);
    std::vector<PlanarCorrespondence> planar;
    planar.reserve(cand.inliers.size());
    for (std::int32_t i : cand.inliers) {
        const auto& c = corr[static_cast<std::size_t>(i)];
        planar.push_back({{c.p.dot(e1), c.p.dot(e2)}, {c.q.dot(e1), c.q.dot(e2)}, c.weight});
    }

    const auto search = angle_bnb(planar, cfg2, sigma);
    out.branches = search.branches_evaluated;
    const Angle2DResult& res = search.result;
    if (res.pure_translation) {
        out.transform.rotation = Rot3::identity();
        out.transform.translation = cand.axis * cand.distance + e1 * res.translation.x +
                                    e2 * res.translation.y;
        out.pure_translation = true;
    } else {
        out.transform = screw_recompose(cand.axis, res.theta, cand.distance, res.center, e1, e2);
    }
    out.consensus = exact_consensus(corr, out.transform, xi);
    out.valid = true;
    return out;
}

}  // namespace detail

/// Registers the correspondence set, maximizing the weighted inlier
/// consensus at threshold xi. Deterministic for a fixed config; thread
/// count only fans out the independent per-candidate Stage II searches.
inline RegistrationResult register_correspondences(const std::vector<WeightedCorrespondence>& corr,
                                                   const RegistrationConfig& cfg) {
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    if (corr.size() < 3)
        throw std::invalid_argument("register_correspondences: need at least 3 correspondences");
    if (cfg.sigma.has_value() == cfg.xi.has_value())
        throw std::invalid_argument("register_correspondences: exactly one of sigma/xi required");
    if (cfg.threads < 1) throw std::invalid_argument("register_correspondences: threads must be >= 1");

    const double sigma = cfg.sigma ? *cfg.sigma : sigma_from_xi(*cfg.xi);
    const NoiseThresholds thr = noise_thresholds(sigma);

    memtrack::reset_peak();
    const auto t_start = clock::now();
    RegistrationResult result;

    detail::WorkerPool pool(cfg.threads);
    detail::WorkerPool* pool_ptr = cfg.threads > 1 ? &pool : nullptr;

    const Stage1Result stage1 = axis_bnb(corr, cfg.stage1, thr, {}, pool_ptr);
    result.branches_stage1 = stage1.branches_evaluated;
    result.stage1_candidates = static_cast<int>(stage1.candidates.size());
    result.timings.stage1_ms = ms_since(t_start);

    const auto t_stage2 = clock::now();
    const AngleSearchConfig cfg2{cfg.stage1.epsilon, cfg.stage1.epsilon_b};
    std::vector<detail::CandidateOutcome> outcomes(stage1.candidates.size());
    pool.run_batch(static_cast<int>(stage1.candidates.size()), [&](int k, int) {
        outcomes[static_cast<std::size_t>(k)] = detail::run_stage2_candidate(
            corr, stage1.candidates[static_cast<std::size_t>(k)], cfg2, sigma, thr.xi3);
    });

    int best = -1;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        if (!outcomes[k].valid) continue;
        result.branches_stage2 += outcomes[k].branches;
        if (best < 0 || outcomes[k].consensus > outcomes[static_cast<std::size_t>(best)].consensus)
            best = static_cast<int>(k);
    }
    result.timings.stage2_ms = ms_since(t_stage2);
    if (best < 0)
        throw std::runtime_error("register_correspondences: no usable stage II candidate");

    const auto& chosen = outcomes[static_cast<std::size_t>(best)];
    result.translation_only = chosen.pure_translation;

    const auto t_refine = clock::now();
    std::vector<Vec3> ps(corr.size()), qs(corr.size());
    for (std::size_t i = 0; i < corr.size(); ++i) {
        ps[i] = corr[i].p;
        qs[i] = corr[i].q;
    }
    const RigidTransform refined = irls_refine(ps, qs, chosen.transform, cfg.irls, thr.xi3);
    const double refined_w = detail::exact_consensus(corr, refined, thr.xi3);

    // Keep the refined transform unless it provably lowered the consensus
    // objective the pipeline maximizes.
    if (refined_w >= chosen.consensus) {
        result.transform = refined;
    } else {
        result.transform = chosen.transform;
    }
    result.consensus_weight =
        detail::exact_consensus(corr, result.transform, thr.xi3, &result.inlier_indices);
    result.timings.refine_ms = ms_since(t_refine);
    result.timings.total_ms = ms_since(t_start);
    result.peak_tracked_bytes = memtrack::peak();
    return result;
}

}  // namespace gmor
