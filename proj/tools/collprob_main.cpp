// Command-line entry point: scenario generation, single checks, per-scheme
// probability curves, and the benchmark / grid-search harness. Output is
// machine-first (plain numbers and CSV); exit codes are 0 on success, 1 on
// input errors, 2 on internal invariant violations.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "collprob/collprob.hpp"

namespace {

using namespace collprob;

struct SchemeFlags {
    std::string scheme = "adaptive";
    double sigma_max = 3.8;
    double w_min = 0.01;
    double d_max = 1.625;
    int p_max = 4;
    double kappa = 1.0;
    int gh_degree = 8;
    long mc_n = 2000;
    std::uint64_t seed = 0;
    bool no_prefilters = false;
    bool literal_spacing = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--scheme", scheme, "adaptive|unscented|gauss_hermite|monte_carlo")
            ->check(CLI::IsMember({"adaptive", "unscented", "gauss_hermite", "monte_carlo"}));
        cmd->add_option("--sigma-max", sigma_max, "coverage interval half-width (std devs)");
        cmd->add_option("--w-min", w_min, "minimum sigma-point weight");
        cmd->add_option("--d-max", d_max, "maximum mean sigma-point spacing (m)");
        cmd->add_option("--p-max", p_max, "maximum tree order");
        cmd->add_option("--kappa", kappa, "unscented spread parameter");
        cmd->add_option("--gh-degree", gh_degree, "Gauss-Hermite 1D degree");
        cmd->add_option("--mc-n", mc_n, "Monte Carlo sample count");
        cmd->add_option("--seed", seed, "seed for all randomness in this command");
        cmd->add_flag("--no-prefilters", no_prefilters, "disable geometric prefilters");
        cmd->add_flag("--literal-spacing", literal_spacing,
                      "use the variance-based upsampling rule");
    }

    CheckerConfig config() const {
        CheckerConfig cfg;
        cfg.sigma_max = sigma_max;
        cfg.w_min = w_min;
        cfg.d_max = d_max;
        cfg.p_max = p_max;
        cfg.prefilters_enabled = !no_prefilters;
        cfg.literal_spacing_rule = literal_spacing;
        if (scheme == "adaptive") cfg.scheme.kind = SchemeKind::adaptive;
        if (scheme == "unscented") cfg.scheme.kind = SchemeKind::unscented;
        if (scheme == "gauss_hermite") cfg.scheme.kind = SchemeKind::gauss_hermite;
        if (scheme == "monte_carlo") cfg.scheme.kind = SchemeKind::monte_carlo;
        cfg.scheme.kappa = kappa;
        cfg.scheme.gh_degree = gh_degree;
        cfg.scheme.mc_n = mc_n;
        cfg.scheme.mc_seed = seed;
        return cfg;
    }
};

Scenario load_and_warn(const std::string& path) {
    Scenario sc = load_scenario(path);
    for (const std::string& w : sc.warnings) std::cerr << "warning: " << w << "\n";
    return sc;
}

std::vector<NamedScenario> gather_scenarios(const std::string& dir, int generate_n,
                                            std::uint64_t seed, int K) {
    std::vector<NamedScenario> out;
    if (!dir.empty()) {
        std::vector<std::filesystem::path> paths;
        if (!std::filesystem::is_directory(dir))
            throw ParseError("not a directory: " + dir);
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.path().extension() == ".json") paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths)
            out.emplace_back(p.stem().string(), load_and_warn(p.string()));
    } else {
        for (int i = 0; i < generate_n; ++i) {
            GeneratorSpec spec;
            spec.scenario_template = static_cast<ScenarioTemplate>(i % 5);
            spec.seed = seed + std::uint64_t(i);
            spec.K = K;
            out.emplace_back("gen_" + std::to_string(spec.seed) + "_" +
                                 to_string(spec.scenario_template),
                             generate(spec));
        }
    }
    if (out.empty()) throw ParseError("no scenarios found");
    return out;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path == "-") return std::cout;
    file.open(path);
    if (!file) throw ParseError("cannot open output file: " + path);
    return file;
}

int run_gen(const std::string& tmpl, GeneratorSpec spec, const std::string& out,
            const std::string& out_dir, int count) {
    spec.scenario_template = scenario_template_from_string(tmpl);
    if (count > 1 || !out_dir.empty()) {
        if (out_dir.empty()) throw ParseError("--count requires --out-dir");
        std::filesystem::create_directories(out_dir);
        for (int i = 0; i < count; ++i) {
            GeneratorSpec s = spec;
            s.scenario_template = static_cast<ScenarioTemplate>(
                (int(spec.scenario_template) + i) % 5);
            s.seed = spec.seed + std::uint64_t(i);
            const std::string name = "gen_" + std::to_string(s.seed) + "_" +
                                     to_string(s.scenario_template) + ".json";
            save_scenario((std::filesystem::path(out_dir) / name).string(), generate(s));
        }
        return 0;
    }
    if (out.empty()) throw ParseError("--out is required");
    save_scenario(out, generate(spec));
    return 0;
}

int run_check(const std::string& scenario_path, const SchemeFlags& flags,
              const std::string& curve_out) {
    const Scenario sc = load_and_warn(scenario_path);
    const std::vector<Agent> others(sc.agents.begin() + 1, sc.agents.end());
    const auto results = check_all_pairs(sc.agents.front(), others, flags.config());
    for (const CollisionResult& r : results)
        std::printf("%.6f\n", r.p_collision_final);
    if (!curve_out.empty()) {
        std::ofstream file;
        std::ostream& out = open_output(curve_out, file);
        out << "k,t";
        for (const Agent& a : others) out << ",p_" << a.name;
        out << "\n";
        const auto& times = sc.agents.front().trajectory.poses;
        for (std::size_t k = 0; k < times.size(); ++k) {
            out << k << ',' << times[k].time;
            for (const CollisionResult& r : results) out << ',' << r.p_collision_curve[k];
            out << "\n";
        }
    }
    return 0;
}

int run_curve(const std::string& scenario_path, const SchemeFlags& flags,
              const std::string& out_path, int pair_index) {
    const Scenario sc = load_and_warn(scenario_path);
    if (pair_index < 1 || pair_index >= int(sc.agents.size()))
        throw ParseError("pair index out of range");
    const std::vector<Agent> other{sc.agents[std::size_t(pair_index)]};

    const SchemeKind kinds[4] = {SchemeKind::adaptive, SchemeKind::unscented,
                                 SchemeKind::gauss_hermite, SchemeKind::monte_carlo};
    std::vector<std::vector<double>> curves;
    for (SchemeKind kind : kinds) {
        CheckerConfig cfg = flags.config();
        cfg.scheme.kind = kind;
        curves.push_back(
            check_all_pairs(sc.agents.front(), other, cfg).front().p_collision_curve);
    }
    std::ofstream file;
    std::ostream& out = open_output(out_path, file);
    out << "k,t,adaptive,unscented,gauss_hermite,monte_carlo\n";
    const auto& times = sc.agents.front().trajectory.poses;
    for (std::size_t k = 0; k < times.size(); ++k) {
        out << k << ',' << times[k].time;
        for (const auto& curve : curves) out << ',' << curve[k];
        out << "\n";
    }
    return 0;
}

int run_bench(const std::vector<NamedScenario>& scenarios, const SchemeFlags& flags, long gt_n,
              const std::string& out_prefix) {
    const EvalResult r = evaluate(scenarios, flags.config(), gt_n, flags.seed);
    {
        std::ofstream records(out_prefix + "_records.csv");
        if (!records) throw ParseError("cannot write " + out_prefix + "_records.csv");
        write_records_csv(records, r.records);
        std::ofstream summary(out_prefix + "_summary.csv");
        write_summary_csv(summary, r.summary);
    }
    write_summary_csv(std::cout, r.summary);
    for (const std::string& f : r.summary.failures) std::cerr << "failed: " << f << "\n";
    return r.summary.failures.empty() ? 0 : 1;
}

int run_grid(const std::vector<NamedScenario>& scenarios, const SchemeFlags& flags, long gt_n,
             const GridSpec& grid, const std::string& out_path) {
    const auto cells = grid_search(scenarios, grid, gt_n, flags.seed, flags.config());
    std::ofstream file;
    std::ostream& out = open_output(out_path, file);
    write_grid_csv(out, cells);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collision probability estimation between uncertain trajectories"};
    app.require_subcommand(1);

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic scenario file");
    std::string gen_template = "crossing";
    GeneratorSpec gen_spec;
    std::string gen_out, gen_out_dir;
    int gen_count = 1;
    gen_cmd->add_option("--template", gen_template,
                        "crossing|head_on|merging|creeping|overtake");
    gen_cmd->add_option("--K", gen_spec.K, "number of timesteps");
    gen_cmd->add_option("--dt", gen_spec.dt, "timestep (s)");
    gen_cmd->add_option("--base-speed", gen_spec.base_speed, "nominal speed (m/s)");
    gen_cmd->add_option("--noise-growth", gen_spec.noise_growth,
                        "per-step covariance inflation");
    gen_cmd->add_option("--pos-yaw-corr", gen_spec.pos_yaw_corr,
                        "position-yaw correlation in [-1,1]");
    gen_cmd->add_option("--seed", gen_spec.seed, "generator seed");
    gen_cmd->add_option("--out", gen_out, "output scenario path");
    gen_cmd->add_option("--out-dir", gen_out_dir, "output directory for --count > 1");
    gen_cmd->add_option("--count", gen_count, "number of scenarios (cycles templates)");

    // check
    auto* check_cmd = app.add_subcommand("check", "collision probability for one scenario");
    std::string check_scenario, check_curve;
    SchemeFlags check_flags;
    check_cmd->add_option("--scenario", check_scenario, "scenario file")->required();
    check_cmd->add_option("--curve", check_curve, "write the per-timestep curve CSV ('-' for stdout)");
    check_flags.attach(check_cmd);

    // curve
    auto* curve_cmd = app.add_subcommand("curve", "per-timestep curves for all schemes");
    std::string curve_scenario, curve_out = "-";
    int curve_pair = 1;
    SchemeFlags curve_flags;
    curve_cmd->add_option("--scenario", curve_scenario, "scenario file")->required();
    curve_cmd->add_option("--out", curve_out, "output CSV ('-' for stdout)");
    curve_cmd->add_option("--pair", curve_pair, "agent index paired with ego (default 1)");
    curve_flags.attach(curve_cmd);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "accuracy/latency benchmark");
    std::string bench_dir, bench_prefix = "bench";
    int bench_generate = 0, bench_K = 60;
    long bench_gt_n = 100000;
    SchemeFlags bench_flags;
    bench_cmd->add_option("--scenario-dir", bench_dir, "directory of scenario JSON files");
    bench_cmd->add_option("--generate", bench_generate, "generate this many scenarios instead");
    bench_cmd->add_option("--K", bench_K, "steps for generated scenarios");
    bench_cmd->add_option("--gt-n", bench_gt_n, "Monte Carlo ground-truth sample count");
    bench_cmd->add_option("--out-prefix", bench_prefix, "prefix for records/summary CSVs");
    bench_flags.attach(bench_cmd);

    // grid
    auto* grid_cmd = app.add_subcommand("grid", "parameter grid search");
    std::string grid_dir, grid_out = "-";
    int grid_generate = 0, grid_K = 60;
    long grid_gt_n = 100000;
    GridSpec grid_spec = GridSpec::default_grid();
    SchemeFlags grid_flags;
    grid_cmd->add_option("--scenario-dir", grid_dir, "directory of scenario JSON files");
    grid_cmd->add_option("--generate", grid_generate, "generate this many scenarios instead");
    grid_cmd->add_option("--K", grid_K, "steps for generated scenarios");
    grid_cmd->add_option("--gt-n", grid_gt_n, "Monte Carlo ground-truth sample count");
    grid_cmd->add_option("--sigma-max-values", grid_spec.sigma_max_values, "grid axis");
    grid_cmd->add_option("--w-min-values", grid_spec.w_min_values, "grid axis");
    grid_cmd->add_option("--d-max-values", grid_spec.d_max_values, "grid axis");
    grid_cmd->add_option("--reps", grid_spec.reps, "timing repetitions per cell");
    grid_cmd->add_option("--out", grid_out, "output CSV ('-' for stdout)");
    grid_flags.attach(grid_cmd);

    try {
        app.parse(argc, argv);
        if (gen_cmd->parsed())
            return run_gen(gen_template, gen_spec, gen_out, gen_out_dir, gen_count);
        if (check_cmd->parsed()) return run_check(check_scenario, check_flags, check_curve);
        if (curve_cmd->parsed())
            return run_curve(curve_scenario, curve_flags, curve_out, curve_pair);
        if (bench_cmd->parsed())
            return run_bench(gather_scenarios(bench_dir, bench_generate, bench_flags.seed,
                                              bench_K),
                             bench_flags, bench_gt_n, bench_prefix);
        if (grid_cmd->parsed())
            return run_grid(gather_scenarios(grid_dir, grid_generate, grid_flags.seed, grid_K),
                            grid_flags, grid_gt_n, grid_spec, grid_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
