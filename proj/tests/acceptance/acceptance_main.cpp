// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line each. Exits nonzero if any criterion fails.
#define GMOR_DEFINE_TRACKING_OPERATORS
#include "gmor/memory_tracker.hpp"

#include "gmor/gmor.hpp"

#include "../oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

using namespace gmor;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %-22s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int hw_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 2 : static_cast<int>(n);
}

// ---------------------------------------------------------------------------

void criterion_oracle_1d() {
    const auto t0 = clock_type::now();
    detail::Rng rng(1001);
    bool exact = true;
    for (int trial = 0; trial < 500 && exact; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform01() * 63);
        std::vector<WeightedInterval> iv;
        for (int i = 0; i < n; ++i) {
            const double a = std::floor(rng.uniform(0, 14));
            const double b = std::floor(rng.uniform(0, 14));
            iv.push_back({std::min(a, b), std::max(a, b), 0.5 * (1 + std::floor(rng.uniform(0, 6)))});
        }
        const auto fast = interval_stab_max(iv);
        const auto brute = oracle::interval_stab_brute(iv);
        if (fast.first != brute.first) exact = false;
    }
    const double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "500 instances, exact W equality=%s, %.2f s (< 5 s)",
                  exact ? "yes" : "NO", secs);
    report("oracle-1d", exact && secs < 5.0, buf);
}

void criterion_oracle_2d() {
    const auto t0 = clock_type::now();
    detail::Rng rng(1002);
    bool exact = true, recount_ok = true;
    for (int trial = 0; trial < 500 && exact; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform01() * 49);
        std::vector<WeightedRect> rects;
        for (int i = 0; i < n; ++i) {
            const double x0 = std::floor(rng.uniform(0, 9)), x1 = std::floor(rng.uniform(0, 9));
            const double y0 = std::floor(rng.uniform(0, 9)), y1 = std::floor(rng.uniform(0, 9));
            rects.push_back({std::min(x0, x1), std::min(y0, y1), std::max(x0, x1),
                             std::max(y0, y1), 0.5 * (1 + std::floor(rng.uniform(0, 6)))});
        }
        const auto fast = max_rect_overlap(rects);
        if (fast.weight != oracle::rect_overlap_brute(rects)) exact = false;
        if (oracle::rect_coverage_at(rects, fast.x, fast.y) != fast.weight) recount_ok = false;
    }
    const double secs = seconds_since(t0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "500 instances, exact W=%s, point recount=%s, %.2f s (< 30 s)",
                  exact ? "yes" : "NO", recount_ok ? "yes" : "NO", secs);
    report("oracle-2d", exact && recount_ok && secs < 30.0, buf);
}

void criterion_lemma1() {
    detail::Rng rng(1003);
    const double eps_half = 0.025;
    double worst_excess = -1e300, worst_form = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const Vec2 p{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Vec2 q{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const double theta = rng.uniform(eps_half, kPi);
        const double sigma = rng.uniform(0.001, 0.1);
        const double xi2 = sigma * std::sqrt(2.0 * kChiSq2_95);
        Vec2 u{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        while (u.norm() > 1.0) u = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

        const Vec2 c0 = *rotation_center(p, q, theta);
        const double xi_c = center_threshold(theta, sigma)->xi_c;
        const Vec2 c = c0 + u * xi_c;
        const double co = std::cos(theta), si = std::sin(theta);
        const Vec2 dp = p - c;
        const Vec2 resid = (q - c) - Vec2{co * dp.x - si * dp.y, si * dp.x + co * dp.y};
        const double r = resid.norm();
        worst_excess = std::max(worst_excess, r - xi2);
        worst_form = std::max(worst_form,
                              std::abs(r - 2.0 * std::sin(theta / 2.0) * xi_c * u.norm()));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "1e5 samples, max residual-xi2 = %.2e (<= 1e-9), closed-form dev = %.2e (<= 1e-9)",
                  worst_excess, worst_form);
    report("lemma-1", worst_excess <= 1e-9 && worst_form <= 1e-9, buf);
}

void criterion_chasles() {
    detail::Rng rng(1004);
    double worst_resid = 0.0, worst_round = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 axis = rng.unit_vector();
        double angle = rng.uniform(-kPi, kPi);
        if (std::abs(angle) < 1e-3) angle = 0.7;
        const RigidTransform T{rodrigues(axis, angle),
                               {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)}};
        const auto sp = chasles_decompose(T);
        const Vec3 P = rng.in_sphere(2.0), Q = rng.in_sphere(2.0);
        const Vec3 S = Q - P;
        const double direct = (Q - (T * P)).norm();
        const double decomposed =
            (sp->axis * (sp->axis.dot(S) - sp->axial_distance) +
             sp->axis.cross(Q - sp->center - T.rotation * (P - sp->center)))
                .norm();
        worst_resid = std::max(worst_resid, std::abs(direct - decomposed));

        const auto [e1, e2] = plane_basis(sp->axis);
        const RigidTransform T2 = screw_recompose(sp->axis, sp->angle, sp->axial_distance,
                                                  {sp->center.dot(e1), sp->center.dot(e2)}, e1, e2);
        double dev = (T2.translation - T.translation).norm();
        for (int k = 0; k < 9; ++k)
            dev = std::max(dev, std::abs(T2.rotation.m[static_cast<std::size_t>(k)] -
                                         T.rotation.m[static_cast<std::size_t>(k)]));
        worst_round = std::max(worst_round, dev);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "1000 instances, residual identity dev = %.2e, round trip dev = %.2e (<= 1e-9)",
                  worst_resid, worst_round);
    report("chasles-equivalence", worst_resid <= 1e-9 && worst_round <= 1e-9, buf);
}

void criterion_projection_bounds() {
    detail::Rng rng(1005);
    const double xi1 = noise_thresholds(sigma_from_xi(0.1)).xi1;
    double worst = -1e300;
    for (int trial = 0; trial < 10000; ++trial) {
        const Vec3 s = rng.in_sphere(5.0);
        const Vec3 r_c = rng.unit_vector();
        const double tau = rng.uniform(0.0, 1.3);
        const auto b = projection_bounds(s, r_c, tau, xi1);
        const auto [e1, e2] = plane_basis(r_c);
        for (int k = 0; k < 1000; ++k) {
            const double ang = rng.uniform(0.0, tau);
            const double phi = rng.uniform(0.0, 2.0 * kPi);
            const Vec3 axis =
                r_c * std::cos(ang) + (e1 * std::cos(phi) + e2 * std::sin(phi)) * std::sin(ang);
            const double proj = axis.dot(s);
            worst = std::max(worst, (b.upper.lo + xi1) - proj);
            worst = std::max(worst, proj - (b.upper.hi - xi1));
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "1e4 (S, branch) pairs x 1e3 axes, max envelope violation = %.2e (<= 1e-9)",
                  worst);
    report("projection-bounds", worst <= 1e-9, buf);
}

struct SweepOutcome {
    double rr = 0.0;
    double mean_re = 0.0;
    double mean_time_s = 0.0;
    double max_time_s = 0.0;
    int failures = 0;
};

SweepOutcome run_sweep(const std::vector<double>& ratios, int seeds, double re_max, double te_max,
                       bool z_mode) {
    SweepOutcome out;
    RegistrationConfig cfg;
    cfg.xi = 0.1;
    cfg.threads = hw_threads();
    if (z_mode) {
        cfg.stage1.face_restriction = CubeFace::PosZ;
        cfg.stage1.top_k = 1;
    }
    const double sigma_gen = sigma_from_xi(0.1);
    int total = 0, success = 0;
    double re_sum = 0.0, time_sum = 0.0;
    for (double ratio : ratios) {
        for (int seed = 0; seed < seeds; ++seed) {
            SyntheticConfig sc;
            sc.n = 10000;
            sc.outlier_ratio = ratio;
            sc.sigma = sigma_gen;
            sc.seed = 9000 + static_cast<std::uint64_t>(ratio * 1000) + static_cast<std::uint64_t>(seed);
            sc.z_axis_only = z_mode;
            const auto inst = generate_synthetic(sc);
            const auto t0 = clock_type::now();
            const auto res = register_correspondences(inst.corr, cfg);
            const double secs = seconds_since(t0);
            const auto [re, te] = registration_errors(res.transform, inst.truth);
            ++total;
            time_sum += secs;
            out.max_time_s = std::max(out.max_time_s, secs);
            if (re < re_max && te < te_max) {
                ++success;
                re_sum += re;
            } else {
                ++out.failures;
            }
        }
    }
    out.rr = static_cast<double>(success) / total;
    out.mean_re = success ? re_sum / success : 0.0;
    out.mean_time_s = time_sum / total;
    return out;
}

void criterion_synthetic_accuracy() {
    const std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const auto out = run_sweep(ratios, 20, 5.0, 0.3, false);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "N=1e4, ratios 0.1..0.9 x 20 seeds: RR=%.3f (=1.0), mean RE=%.3f deg (< 2), "
                  "mean %.2f s/trial (<= 5), max %.2f s",
                  out.rr, out.mean_re, out.mean_time_s, out.max_time_s);
    report("synthetic-accuracy", out.rr == 1.0 && out.mean_re < 2.0 && out.mean_time_s <= 5.0,
           buf);
}

void criterion_extreme_outliers() {
    const auto out = run_sweep({0.95}, 20, 5.0, 1.0, false);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "N=1e4, ratio 0.95 x 20 seeds: RR=%.3f (>= 0.9)", out.rr);
    report("extreme-outliers", out.rr >= 0.9, buf);
}

void criterion_z_axis_mode() {
    const auto out = run_sweep({0.3, 0.6}, 10, 5.0, 0.3, true);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "z-axis-only, N=1e4, ratios {0.3,0.6} x 10 seeds: RR=%.3f (=1.0)",
                  out.rr);
    report("z-axis-only", out.rr == 1.0, buf);
}

void criterion_complexity() {
    RegistrationConfig cfg;
    cfg.xi = 0.1;
    cfg.threads = hw_threads();
    const double sigma_gen = sigma_from_xi(0.1);
    const std::vector<long> ns{1000, 10000, 100000};
    std::vector<double> peak_bytes, wall_s;
    for (long n : ns) {
        std::vector<double> peaks, times;
        for (int rep = 0; rep < 3; ++rep) {
            SyntheticConfig sc;
            sc.n = n;
            sc.outlier_ratio = 0.5;
            sc.sigma = sigma_gen;
            sc.seed = 500 + static_cast<std::uint64_t>(rep);
            const auto inst = generate_synthetic(sc);
            const auto t0 = clock_type::now();
            const auto res = register_correspondences(inst.corr, cfg);
            times.push_back(seconds_since(t0));
            peaks.push_back(static_cast<double>(res.peak_tracked_bytes));
        }
        std::sort(peaks.begin(), peaks.end());
        std::sort(times.begin(), times.end());
        peak_bytes.push_back(peaks[1]);  // median of 3
        wall_s.push_back(times[1]);
    }

    // Affine fit peak = a + b*N judged by relative residuals, so the fit
    // itself minimizes relative error (weighted least squares, 1/y^2):
    // an absolute-error fit would let the largest N dominate and misstate
    // the small-N relative deviation.
    double sw = 0, swn = 0, swy = 0, swnn = 0, swny = 0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double n = static_cast<double>(ns[i]);
        const double y = peak_bytes[i];
        const double w = 1.0 / (y * y);
        sw += w;
        swn += w * n;
        swy += w * y;
        swnn += w * n * n;
        swny += w * n * y;
    }
    const double b = (sw * swny - swn * swy) / (sw * swnn - swn * swn);
    const double a = (swy - b * swn) / sw;
    double worst_resid = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const double pred = a + b * static_cast<double>(ns[i]);
        worst_resid = std::max(worst_resid, std::abs(pred - peak_bytes[i]) / peak_bytes[i]);
    }

    double worst_slope = 0.0;
    for (std::size_t i = 1; i < ns.size(); ++i) {
        const double slope = std::log(wall_s[i] / wall_s[i - 1]) /
                             std::log(static_cast<double>(ns[i]) / static_cast<double>(ns[i - 1]));
        worst_slope = std::max(worst_slope, slope);
    }

    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "peak bytes {%.2f, %.2f, %.2f} MB, affine residual %.1f%% (< 20%%); "
                  "time {%.2f, %.2f, %.2f} s, log-log slope %.2f (< 1.5)",
                  peak_bytes[0] / 1048576.0, peak_bytes[1] / 1048576.0, peak_bytes[2] / 1048576.0,
                  100.0 * worst_resid, wall_s[0], wall_s[1], wall_s[2], worst_slope);
    report("complexity", worst_resid < 0.20 && worst_slope < 1.5, buf);
}

void criterion_refinement() {
    bool tukey_ok = tukey_weight(0.0, 1.0) == 1.0 && tukey_weight(0.5, 1.0) == 0.5625 &&
                    tukey_weight(1.0, 1.0) == 0.0;

    detail::Rng rng(1006);
    double worst_kabsch = 0.0;
    bool det_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const RigidTransform truth{rng.rotation(), rng.in_sphere(2.0)};
        std::vector<Vec3> p, q;
        std::vector<double> w;
        for (int i = 0; i < 12; ++i) {
            p.push_back(rng.in_sphere(1.0));
            q.push_back(truth * p.back());
            w.push_back(rng.uniform(0.5, 1.5));
        }
        const auto T = kabsch_weighted(p, q, w);
        if (!T) {
            det_ok = false;
            break;
        }
        if (T->rotation.determinant() <= 0.0) det_ok = false;
        worst_kabsch = std::max(worst_kabsch, (T->translation - truth.translation).norm());
        for (int k = 0; k < 9; ++k)
            worst_kabsch = std::max(worst_kabsch,
                                    std::abs(T->rotation.m[static_cast<std::size_t>(k)] -
                                             truth.rotation.m[static_cast<std::size_t>(k)]));
    }

    int improved = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const RigidTransform truth{rng.rotation(), rng.in_sphere(0.5)};
        std::vector<Vec3> p, q;
        for (int i = 0; i < 80; ++i) {
            p.push_back(rng.in_sphere(1.0));
            q.push_back(truth * p.back() +
                        Vec3{rng.gaussian(), rng.gaussian(), rng.gaussian()} * 0.01);
        }
        for (int i = 0; i < 20; ++i) {
            p.push_back(rng.in_sphere(1.0));
            q.push_back(truth * p.back() + rng.unit_vector() * rng.uniform(0.05, 0.095));
        }
        const RigidTransform init{rodrigues(rng.unit_vector(), 3.0 * kPi / 180.0) * truth.rotation,
                                  truth.translation};
        const RigidTransform refined = irls_refine(p, q, init, {}, 0.1);
        if (registration_errors(refined, truth).first < registration_errors(init, truth).first)
            ++improved;
    }

    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "tukey exact=%s, kabsch dev=%.2e (<= 1e-9, det>0=%s), IRLS improved %d/100 (>= 95)",
                  tukey_ok ? "yes" : "NO", worst_kabsch, det_ok ? "yes" : "NO", improved);
    report("refinement", tukey_ok && det_ok && worst_kabsch <= 1e-9 && improved >= 95, buf);
}

void criterion_determinism() {
    detail::Rng seed_rng(1007);
    bool bit_identical = true, consensus_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        SyntheticConfig sc;
        sc.n = 300;
        sc.outlier_ratio = 0.2 + 0.6 * seed_rng.uniform01();
        sc.sigma = 0.01;
        sc.seed = 2000 + static_cast<std::uint64_t>(trial);
        const auto inst = generate_synthetic(sc);
        RegistrationConfig cfg;
        cfg.xi = 0.1;
        cfg.threads = 1;
        const auto a = register_correspondences(inst.corr, cfg);
        const auto b = register_correspondences(inst.corr, cfg);
        for (int k = 0; k < 9; ++k)
            if (a.transform.rotation.m[static_cast<std::size_t>(k)] !=
                b.transform.rotation.m[static_cast<std::size_t>(k)])
                bit_identical = false;
        if (a.transform.translation.x != b.transform.translation.x ||
            a.transform.translation.y != b.transform.translation.y ||
            a.transform.translation.z != b.transform.translation.z ||
            a.consensus_weight != b.consensus_weight || a.inlier_indices != b.inlier_indices)
            bit_identical = false;

        cfg.threads = hw_threads();
        const auto c = register_correspondences(inst.corr, cfg);
        if (!(c.consensus_weight >= a.consensus_weight - 1e-9)) consensus_ok = false;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "50 instances: threads=1 bit-identical=%s, multithread consensus >= ref-1e-9=%s",
                  bit_identical ? "yes" : "NO", consensus_ok ? "yes" : "NO");
    report("determinism", bit_identical && consensus_ok, buf);
}

}  // namespace

int main() {
    std::printf("gmor acceptance suite (%d hardware threads)\n", hw_threads());
    const auto t0 = clock_type::now();

    criterion_oracle_1d();
    criterion_oracle_2d();
    criterion_lemma1();
    criterion_chasles();
    criterion_projection_bounds();
    criterion_refinement();
    criterion_determinism();
    criterion_complexity();
    criterion_synthetic_accuracy();
    criterion_extreme_outliers();
    criterion_z_axis_mode();

    std::printf("%d criterion(s) failed, total %.1f s\n", g_failures, seconds_since(t0));
    return g_failures == 0 ? 0 : 1;
}
