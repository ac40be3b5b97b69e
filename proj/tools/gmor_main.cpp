// gmor command-line front end: registration, feature matching, synthetic
// instance generation and the benchmark harness.
#define GMOR_DEFINE_TRACKING_OPERATORS
#include "gmor/memory_tracker.hpp"

#include "gmor/gmor.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct RegisterFlags {
    double xi = 0.0;
    double sigma = 0.0;
    double epsilon = 0.05;
    double bound_eps = 1e-3;
    double rho = 0.25;
    int top_k = 12;
    int threads = 1;
    bool z_axis_only = false;
};

void add_register_flags(CLI::App* app, RegisterFlags& f) {
    auto* xi = app->add_option("--xi", f.xi, "3D inlier threshold (exclusive with --sigma)");
    auto* sigma = app->add_option("--sigma", f.sigma, "per-dimension noise sigma (exclusive with --xi)");
    xi->excludes(sigma);
    sigma->excludes(xi);
    app->add_option("--epsilon", f.epsilon, "minimum branch width")->capture_default_str();
    app->add_option("--bound-eps", f.bound_eps, "bound-gap termination threshold")->capture_default_str();
    app->add_option("--rho", f.rho, "gradually-converged ratio")->capture_default_str();
    app->add_option("--topk", f.top_k, "stage I candidate count")->capture_default_str();
    app->add_option("--threads", f.threads, "worker threads")->envname("GMOR_THREADS")->capture_default_str();
    app->add_flag("--z-axis-only", f.z_axis_only, "restrict the axis search to the +Z cube face, top-k 1");
}

gmor::RegistrationConfig to_registration_config(const RegisterFlags& f) {
    gmor::RegistrationConfig cfg;
    if (f.xi > 0.0) cfg.xi = f.xi;
    if (f.sigma > 0.0) cfg.sigma = f.sigma;
    if (!cfg.xi && !cfg.sigma)
        throw CLI::ValidationError("exactly one of --xi or --sigma is required");
    cfg.stage1.epsilon = f.epsilon;
    cfg.stage1.epsilon_b = f.bound_eps;
    cfg.stage1.rho = f.rho;
    cfg.stage1.top_k = f.top_k;
    cfg.threads = f.threads;
    if (f.z_axis_only) {
        cfg.stage1.face_restriction = gmor::CubeFace::PosZ;
        cfg.stage1.top_k = 1;
    }
    return cfg;
}

gmor::ResultDocument to_document(const gmor::RegistrationResult& res) {
    gmor::ResultDocument doc;
    doc.rotation = res.transform.rotation;
    doc.translation = res.transform.translation;
    doc.consensus_weight = res.consensus_weight;
    doc.inlier_count = static_cast<long>(res.inlier_indices.size());
    doc.translation_only = res.translation_only ? 1 : 0;
    doc.timings_ms = {res.timings.stage1_ms, res.timings.stage2_ms, res.timings.refine_ms};
    doc.branches_expanded = {res.branches_stage1, res.branches_stage2};
    return doc;
}

// "name=lo:hi:step" or "name=v1,v2,..."
std::vector<double> parse_sweep_values(const std::string& body) {
    std::vector<double> out;
    if (body.find(':') != std::string::npos) {
        double lo = 0, hi = 0, step = 0;
        if (std::sscanf(body.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0)
            throw CLI::ValidationError("--sweep range must be lo:hi:step with step > 0");
        for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
    } else {
        std::string tok;
        std::istringstream ss(body);
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    }
    if (out.empty()) throw CLI::ValidationError("--sweep produced no values");
    return out;
}

int run_register(const std::string& input, const std::string& output, const RegisterFlags& flags) {
    const auto corr = gmor::read_correspondences(input);
    const auto res = gmor::register_correspondences(corr, to_registration_config(flags));
    const auto doc = to_document(res);
    if (output.empty()) {
        gmor::write_result_document(std::cout, doc);
    } else {
        gmor::write_result_document(output, doc);
    }
    return 0;
}

int run_match(const std::string& src_path, const std::string& dst_path, const std::string& output,
              double d_f, int k_f, double delta) {
    const auto src = gmor::read_feature_points(src_path);
    const auto dst = gmor::read_feature_points(dst_path);
    gmor::MatchConfig cfg;
    cfg.d_f = d_f;
    cfg.k_f = k_f;
    cfg.delta = delta;
    const auto corr = gmor::match_weighted(src, dst, cfg);
    gmor::write_correspondences(output, corr);
    std::cout << "matched " << corr.size() << " correspondences -> " << output << "\n";
    return 0;
}

int run_synth(const gmor::SyntheticConfig& cfg, const std::string& out_corr,
              const std::string& out_truth) {
    const auto inst = gmor::generate_synthetic(cfg);
    gmor::write_correspondences(out_corr, inst.corr);
    gmor::ResultDocument truth;
    truth.rotation = inst.truth.rotation;
    truth.translation = inst.truth.translation;
    gmor::write_result_document(out_truth, truth);
    std::cout << "wrote " << inst.corr.size() << " correspondences -> " << out_corr
              << ", truth -> " << out_truth << "\n";
    return 0;
}

int run_bench(const std::vector<gmor::SyntheticConfig>& grid, const RegisterFlags& flags,
              int trials, const gmor::BenchThresholds& thresholds, const std::string& json_path) {
    const auto reg_cfg = to_registration_config(flags);
    const auto report = gmor::run_benchmark(grid, reg_cfg, trials, thresholds);

    std::printf("%8s %9s %6s %9s %9s %9s %9s %10s\n", "n", "outliers", "RR", "meanRE", "meanTE",
                "p50ms", "p90ms", "peakMB");
    for (const auto& row : report.rows) {
        std::printf("%8ld %9.2f %6.3f %9.4f %9.5f %9.1f %9.1f %10.2f\n", row.cfg.n,
                    row.cfg.outlier_ratio, row.rr, row.mean_re_success, row.mean_te_success,
                    row.p50_ms, row.p90_ms, static_cast<double>(row.max_peak_bytes) / 1048576.0);
    }

    if (!json_path.empty()) {
        nlohmann::json j;
        for (const auto& row : report.rows) {
            nlohmann::json jrow{{"n", row.cfg.n},
                                {"outlier_ratio", row.cfg.outlier_ratio},
                                {"sigma", row.cfg.sigma},
                                {"seed", row.cfg.seed},
                                {"rr", row.rr},
                                {"mean_re_success", row.mean_re_success},
                                {"mean_te_success", row.mean_te_success},
                                {"p50_ms", row.p50_ms},
                                {"p90_ms", row.p90_ms},
                                {"max_peak_bytes", row.max_peak_bytes}};
            for (const auto& t : row.trials) {
                jrow["trials"].push_back({{"seed", t.seed},
                                          {"re_deg", t.re_deg},
                                          {"te", t.te},
                                          {"wall_ms", t.wall_ms},
                                          {"success", t.success},
                                          {"consensus", t.consensus},
                                          {"peak_bytes", t.peak_bytes}});
            }
            j["rows"].push_back(std::move(jrow));
        }
        std::ofstream out(json_path);
        if (!out) throw gmor::ParseError(json_path + ": cannot open file for writing");
        out << j.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gmor: consensus-maximizing rigid point-cloud registration"};
    app.require_subcommand(1);

    // register
    auto* reg = app.add_subcommand("register", "register a correspondence file");
    std::string reg_input, reg_output;
    RegisterFlags reg_flags;
    std::uint64_t reg_seed = 0;
    reg->add_option("--input", reg_input, "correspondence file")->required();
    reg->add_option("--output", reg_output, "result document path (default: stdout)");
    reg->add_option("--seed", reg_seed, "accepted for reproducibility bookkeeping");
    add_register_flags(reg, reg_flags);

    // match
    auto* match = app.add_subcommand("match", "weighted feature cross-matching");
    std::string match_src, match_dst, match_out = "corr.txt";
    double match_df = 0.05, match_delta = std::sqrt(2.0);
    int match_kf = 30;
    match->add_option("--src", match_src, "source feature file")->required();
    match->add_option("--dst", match_dst, "target feature file")->required();
    match->add_option("--df", match_df, "feature distance factor")->required();
    match->add_option("--kf", match_kf, "kNN count")->required();
    match->add_option("--delta", match_delta, "dustbin threshold")->capture_default_str();
    match->add_option("--output", match_out, "output correspondence file")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic instance");
    gmor::SyntheticConfig synth_cfg;
    std::string synth_corr = "corr.txt", synth_truth = "truth.txt";
    bool synth_no_normalize = false;
    synth->add_option("--n", synth_cfg.n, "correspondence count")->capture_default_str();
    synth->add_option("--outliers", synth_cfg.outlier_ratio, "outlier ratio")->capture_default_str();
    synth->add_option("--sigma", synth_cfg.sigma, "noise sigma")->capture_default_str();
    synth->add_option("--seed", synth_cfg.seed, "rng seed")->capture_default_str();
    synth->add_option("--sphere-diameter", synth_cfg.sphere_diameter, "outlier sphere diameter")
        ->capture_default_str();
    synth->add_flag("--no-normalize", synth_no_normalize, "skip cube normalization");
    synth->add_flag("--z-axis-only", synth_cfg.z_axis_only, "rotation about the z axis only");
    synth->add_option("--out-corr", synth_corr, "correspondence output")->capture_default_str();
    synth->add_option("--out-truth", synth_truth, "truth document output")->capture_default_str();

    // bench
    auto* bench = app.add_subcommand("bench", "synthetic benchmark sweep");
    RegisterFlags bench_flags;
    std::string bench_sweep, bench_json;
    long bench_n = 10000;
    double bench_outliers = 0.5;
    double bench_noise_sigma = 0.0;
    int bench_trials = 20;
    std::uint64_t bench_seed = 0;
    bool bench_z_truth = false;
    gmor::BenchThresholds bench_thresholds;
    bench->add_option("--sweep", bench_sweep, "outliers=lo:hi:step | n=v1,v2,... (swept parameter)");
    bench->add_option("--n", bench_n, "correspondence count")->capture_default_str();
    bench->add_option("--outliers", bench_outliers, "outlier ratio")->capture_default_str();
    bench->add_option("--noise-sigma", bench_noise_sigma,
                      "generation noise sigma (default: derived from the registration threshold)");
    bench->add_option("--trials", bench_trials, "trials per grid entry")->capture_default_str();
    bench->add_option("--seed", bench_seed, "base seed")->capture_default_str();
    bench->add_option("--re-max", bench_thresholds.re_max_deg, "success threshold, degrees")
        ->capture_default_str();
    bench->add_option("--te-max", bench_thresholds.te_max, "success threshold, meters")
        ->capture_default_str();
    bench->add_flag("--z-truth", bench_z_truth, "generate z-axis-only rotations");
    bench->add_option("--json", bench_json, "write the full per-trial report as JSON");
    add_register_flags(bench, bench_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (reg->parsed()) return run_register(reg_input, reg_output, reg_flags);
        if (match->parsed()) return run_match(match_src, match_dst, match_out, match_df, match_kf,
                                              match_delta);
        if (synth->parsed()) {
            synth_cfg.normalize_cube = !synth_no_normalize;
            return run_synth(synth_cfg, synth_corr, synth_truth);
        }
        if (bench->parsed()) {
            double sigma_gen = bench_noise_sigma;
            if (sigma_gen <= 0.0) {
                if (bench_flags.sigma > 0.0)
                    sigma_gen = bench_flags.sigma;
                else if (bench_flags.xi > 0.0)
                    sigma_gen = gmor::sigma_from_xi(bench_flags.xi);
                else
                    throw CLI::ValidationError("bench needs --xi, --sigma or --noise-sigma");
            }
            gmor::SyntheticConfig base;
            base.n = bench_n;
            base.outlier_ratio = bench_outliers;
            base.sigma = sigma_gen;
            base.seed = bench_seed;
            base.z_axis_only = bench_z_truth || bench_flags.z_axis_only;

            std::vector<gmor::SyntheticConfig> grid;
            if (bench_sweep.empty()) {
                grid.push_back(base);
            } else {
                const auto eq = bench_sweep.find('=');
                if (eq == std::string::npos)
                    throw CLI::ValidationError("--sweep must look like name=...");
                const std::string name = bench_sweep.substr(0, eq);
                for (double v : parse_sweep_values(bench_sweep.substr(eq + 1))) {
                    gmor::SyntheticConfig cfg = base;
                    if (name == "outliers") {
                        cfg.outlier_ratio = v;
                    } else if (name == "n") {
                        cfg.n = static_cast<long>(v);
                    } else {
                        throw CLI::ValidationError("unknown sweep parameter '" + name + "'");
                    }
                    grid.push_back(cfg);
                }
            }
            return run_bench(grid, bench_flags, bench_trials, bench_thresholds, bench_json);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
