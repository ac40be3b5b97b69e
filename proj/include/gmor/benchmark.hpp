// Synthetic benchmark harness: registration recall, RE/TE, timing and
// memory aggregates over seeded trial grids.
#pragma once

#include "gmor/core_geometry.hpp"
#include "gmor/registration.hpp"
#include "gmor/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gmor {

struct BenchThresholds {
    double re_max_deg = 5.0;
    double te_max = 0.3;
};

struct TrialRecord {
    std::uint64_t seed = 0;
    double re_deg = 0.0;
    double te = 0.0;
    double wall_ms = 0.0;
    bool success = false;
    double consensus = 0.0;
    std::size_t peak_bytes = 0;
};

struct BenchRow {
    SyntheticConfig cfg;
    std::vector<TrialRecord> trials;
    // aggregates, recomputable from the trial records
    double rr = 0.0;
    double mean_re_success = 0.0;
    double mean_te_success = 0.0;
    double p50_ms = 0.0;
    double p90_ms = 0.0;
    std::size_t max_peak_bytes = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
};

namespace detail {

inline double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace detail

inline void recompute_row_aggregates(BenchRow& row, const BenchThresholds& thresholds) {
    std::size_t successes = 0;
    double re_sum = 0.0, te_sum = 0.0;
    std::vector<double> times;
    row.max_peak_bytes = 0;
    times.reserve(row.trials.size());
    for (auto& t : row.trials) {
        t.success = t.re_deg < thresholds.re_max_deg && t.te < thresholds.te_max;
        if (t.success) {
            ++successes;
            re_sum += t.re_deg;
            te_sum += t.te;
        }
        times.push_back(t.wall_ms);
        row.max_peak_bytes = std::max(row.max_peak_bytes, t.peak_bytes);
    }
    row.rr = row.trials.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(row.trials.size());
    row.mean_re_success = successes ? re_sum / static_cast<double>(successes) : 0.0;
    row.mean_te_success = successes ? te_sum / static_cast<double>(successes) : 0.0;
    row.p50_ms = detail::percentile(times, 0.5);
    row.p90_ms = detail::percentile(times, 0.9);
}

/// One registration trial against a synthetic instance. Non-finite results
/// score RE = 180 degrees and TE = 10 m before thresholding.
inline TrialRecord run_trial(const SyntheticConfig& cfg, const RegistrationConfig& reg_cfg,
                             const BenchThresholds& thresholds) {
    using clock = std::chrono::steady_clock;
    const SyntheticInstance inst = generate_synthetic(cfg);

    TrialRecord rec;
    rec.seed = cfg.seed;
    const auto t0 = clock::now();
    const RegistrationResult res = register_correspondences(inst.corr, reg_cfg);
    rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    rec.consensus = res.consensus_weight;
    rec.peak_bytes = res.peak_tracked_bytes;

    bool finite = res.transform.translation.finite();
    for (double v : res.transform.rotation.m) finite = finite && std::isfinite(v);
    if (finite) {
        const auto [re, te] = registration_errors(res.transform, inst.truth);
        rec.re_deg = re;
        rec.te = te;
    } else {
        rec.re_deg = 180.0;
        rec.te = 10.0;
    }
    rec.success = rec.re_deg < thresholds.re_max_deg && rec.te < thresholds.te_max;
    return rec;
}

/// Runs `trials` seeded trials per grid entry (seed = cfg.seed + trial).
inline BenchReport run_benchmark(const std::vector<SyntheticConfig>& grid,
                                 const RegistrationConfig& reg_cfg, int trials,
                                 const BenchThresholds& thresholds) {
    if (trials < 1) throw std::invalid_argument("run_benchmark: trials must be >= 1");
    BenchReport report;
    report.rows.reserve(grid.size());
    for (const auto& cfg : grid) {
        BenchRow row;
        row.cfg = cfg;
        row.trials.reserve(static_cast<std::size_t>(trials));
        for (int t = 0; t < trials; ++t) {
            SyntheticConfig trial_cfg = cfg;
            trial_cfg.seed = cfg.seed + static_cast<std::uint64_t>(t);
            row.trials.push_back(run_trial(trial_cfg, reg_cfg, thresholds));
        }
        recompute_row_aggregates(row, thresholds);
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace gmor
