#pragma once

/// Accuracy and latency evaluation against a Monte Carlo ground truth:
/// absolute-error records, nearest-rank percentile summaries, parameter grid
/// search with Pareto frontier, and CSV emission.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "collprob/checker.hpp"
#include "collprob/errors.hpp"
#include "collprob/scenario.hpp"

namespace collprob {

struct PairGroundTruth {
    double p = 0.0;
    double std_err = 0.0;  ///< binomial sqrt(p(1-p)/n)
};

struct EvalRecord {
    std::string scenario_id;
    std::string scheme;
    double sigma_max = 0.0;
    double w_min = 0.0;
    double d_max = 0.0;
    double p_estimate = 0.0;
    double p_ground_truth = 0.0;
    double abs_error = 0.0;
    double runtime_s = 0.0;
    long samples_evaluated = 0;
};

struct SummaryStats {
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;
};

/// Nearest-rank percentile of an unsorted sample (q in (0, 100]).
inline double nearest_rank_percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t rank = std::size_t(std::ceil(q / 100.0 * double(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

inline SummaryStats summarize(const std::vector<double>& values) {
    SummaryStats s;
    if (values.empty()) return s;
    double total = 0.0;
    for (double v : values) total += v;
    s.mean = total / double(values.size());
    s.median = nearest_rank_percentile(values, 50.0);
    s.p95 = nearest_rank_percentile(values, 95.0);
    s.p99 = nearest_rank_percentile(values, 99.0);
    return s;
}

struct EvalSummary {
    SummaryStats runtime;    ///< over all records
    SummaryStats abs_error;  ///< over records with nonzero ground truth
    std::size_t n_records = 0;
    std::size_t n_error_records = 0;
    std::vector<std::string> failures;  ///< per-scenario messages, not fatal
};

struct EvalResult {
    std::vector<EvalRecord> records;
    EvalSummary summary;
};

using NamedScenario = std::pair<std::string, Scenario>;

/// Monte Carlo reference probability per (ego, other) pair.
inline std::vector<PairGroundTruth> ground_truth(const Scenario& sc, long n,
                                                 std::uint64_t seed) {
    if (n < 1) throw InvalidParamsError("ground_truth: n must be >= 1");
    CheckerConfig cfg;
    cfg.scheme.kind = SchemeKind::monte_carlo;
    cfg.scheme.mc_n = n;
    cfg.scheme.mc_seed = seed;
    const std::vector<Agent> others(sc.agents.begin() + 1, sc.agents.end());
    const std::vector<CollisionResult> results = check_all_pairs(sc.agents.front(), others, cfg);
    std::vector<PairGroundTruth> out;
    out.reserve(results.size());
    for (const CollisionResult& r : results) {
        const double p = r.p_collision_final;
        out.push_back({p, std::sqrt(std::max(p * (1.0 - p), 0.0) / double(n))});
    }
    return out;
}

namespace detail {

inline void summarize_records(EvalResult& result) {
    std::vector<double> runtimes, errors;
    for (const EvalRecord& r : result.records) {
        runtimes.push_back(r.runtime_s);
        if (r.p_ground_truth > 0.0) errors.push_back(r.abs_error);
    }
    result.summary.runtime = summarize(runtimes);
    result.summary.abs_error = summarize(errors);
    result.summary.n_records = result.records.size();
    result.summary.n_error_records = errors.size();
}

}  // namespace detail

/// Evaluate one configuration over a scenario suite against precomputed
/// ground truths. reps > 1 repeats the timed run and records the median
/// runtime (the probability estimate is identical across reps).
inline EvalResult evaluate_with_ground_truth(
    const std::vector<NamedScenario>& scenarios, const CheckerConfig& cfg,
    const std::vector<std::vector<PairGroundTruth>>& gts, int reps = 1) {
    EvalResult result;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        const auto& [id, sc] = scenarios[s];
        try {
            const std::vector<Agent> others(sc.agents.begin() + 1, sc.agents.end());
            std::vector<CollisionResult> best = check_all_pairs(sc.agents.front(), others, cfg);
            std::vector<std::vector<double>> rep_times(best.size());
            for (std::size_t p = 0; p < best.size(); ++p)
                rep_times[p].push_back(best[p].elapsed_s);
            for (int rep = 1; rep < reps; ++rep) {
                const std::vector<CollisionResult> again =
                    check_all_pairs(sc.agents.front(), others, cfg);
                for (std::size_t p = 0; p < again.size(); ++p)
                    rep_times[p].push_back(again[p].elapsed_s);
            }
            for (std::size_t p = 0; p < best.size(); ++p) {
                EvalRecord rec;
                rec.scenario_id = id;
                rec.scheme = scheme_name(cfg.scheme.kind);
                rec.sigma_max = cfg.sigma_max;
                rec.w_min = cfg.w_min;
                rec.d_max = cfg.d_max;
                rec.p_estimate = best[p].p_collision_final;
                rec.p_ground_truth = gts[s][p].p;
                rec.abs_error = std::abs(rec.p_estimate - rec.p_ground_truth);
                rec.runtime_s = nearest_rank_percentile(rep_times[p], 50.0);
                rec.samples_evaluated = best[p].samples_evaluated;
                result.records.push_back(std::move(rec));
            }
        } catch (const Error& e) {
            result.summary.failures.push_back(id + ": " + e.what());
        }
    }
    detail::summarize_records(result);
    return result;
}

inline std::vector<std::vector<PairGroundTruth>> compute_ground_truths(
    const std::vector<NamedScenario>& scenarios, long gt_n, std::uint64_t seed) {
    std::vector<std::vector<PairGroundTruth>> gts;
    gts.reserve(scenarios.size());
    for (const auto& [id, sc] : scenarios) gts.push_back(ground_truth(sc, gt_n, seed));
    return gts;
}

/// One record per scenario per agent pair; summaries use nearest-rank
/// percentiles. Scenarios with zero ground-truth probability stay in the
/// runtime summary but are excluded from the error summary.
inline EvalResult evaluate(const std::vector<NamedScenario>& scenarios, const CheckerConfig& cfg,
                           long gt_n, std::uint64_t seed) {
    if (scenarios.empty()) throw InvalidParamsError("evaluate: empty scenario list");
    return evaluate_with_ground_truth(scenarios, cfg, compute_ground_truths(scenarios, gt_n, seed));
}

struct GridSpec {
    std::vector<double> sigma_max_values;
    std::vector<double> w_min_values;
    std::vector<double> d_max_values;
    int reps = 3;

    void validate() const {
        if (sigma_max_values.empty() || w_min_values.empty() || d_max_values.empty() || reps < 1)
            throw InvalidParamsError("GridSpec: empty axis");
    }

    /// The sweep used by the bundled benchmark; includes the tuned cell
    /// (3.8, 0.01, 1.625).
    static GridSpec default_grid() {
        return {{2.0, 3.0, 3.8, 4.5}, {0.001, 0.01, 0.05}, {0.5, 1.625, 3.0}, 3};
    }
};

struct GridCellResult {
    double sigma_max = 0.0;
    double w_min = 0.0;
    double d_max = 0.0;
    double p95_runtime_s = 0.0;
    SummaryStats abs_error;
    std::size_t n_records = 0;
    std::size_t n_error_records = 0;
    bool pareto = false;
};

/// Flag the cells not dominated in (P95 runtime, median error): a cell is
/// off the frontier when some other cell is no worse on both metrics and
/// strictly better on one.
inline void mark_pareto(std::vector<GridCellResult>& cells) {
    for (GridCellResult& c : cells) {
        c.pareto = true;
        for (const GridCellResult& o : cells) {
            const bool no_worse = o.p95_runtime_s <= c.p95_runtime_s &&
                                  o.abs_error.median <= c.abs_error.median;
            const bool strictly_better = o.p95_runtime_s < c.p95_runtime_s ||
                                         o.abs_error.median < c.abs_error.median;
            if (no_worse && strictly_better) {
                c.pareto = false;
                break;
            }
        }
    }
}

/// Evaluate every cell of the grid, sharing one ground-truth pass across
/// cells. Rows are sorted by P95 runtime; the Pareto flag marks cells not
/// dominated in (P95 runtime, median error).
inline std::vector<GridCellResult> grid_search(const std::vector<NamedScenario>& scenarios,
                                               const GridSpec& grid, long gt_n,
                                               std::uint64_t seed,
                                               const CheckerConfig& base_cfg = {}) {
    grid.validate();
    if (scenarios.empty()) throw InvalidParamsError("grid_search: empty scenario list");
    const std::vector<std::vector<PairGroundTruth>> gts =
        compute_ground_truths(scenarios, gt_n, seed);

    std::vector<GridCellResult> cells;
    for (double sm : grid.sigma_max_values) {
        for (double wm : grid.w_min_values) {
            for (double dm : grid.d_max_values) {
                CheckerConfig cfg = base_cfg;
                cfg.scheme.kind = SchemeKind::adaptive;
                cfg.sigma_max = sm;
                cfg.w_min = wm;
                cfg.d_max = dm;
                const EvalResult r =
                    evaluate_with_ground_truth(scenarios, cfg, gts, grid.reps);
                GridCellResult cell;
                cell.sigma_max = sm;
                cell.w_min = wm;
                cell.d_max = dm;
                cell.p95_runtime_s = r.summary.runtime.p95;
                cell.abs_error = r.summary.abs_error;
                cell.n_records = r.summary.n_records;
                cell.n_error_records = r.summary.n_error_records;
                cells.push_back(cell);
            }
        }
    }
    mark_pareto(cells);
    std::sort(cells.begin(), cells.end(), [](const GridCellResult& a, const GridCellResult& b) {
        return a.p95_runtime_s < b.p95_runtime_s;
    });
    return cells;
}

inline void write_records_csv(std::ostream& out, const std::vector<EvalRecord>& records) {
    out << "scenario_id,scheme,sigma_max,w_min,d_max,p_est,p_gt,abs_error,runtime_s,samples\n";
    for (const EvalRecord& r : records) {
        out << r.scenario_id << ',' << r.scheme << ',' << r.sigma_max << ',' << r.w_min << ','
            << r.d_max << ',' << r.p_estimate << ',' << r.p_ground_truth << ',' << r.abs_error
            << ',' << r.runtime_s << ',' << r.samples_evaluated << '\n';
    }
}

inline void write_summary_csv(std::ostream& out, const EvalSummary& summary) {
    out << "metric,mean,median,p95,p99\n";
    out << "runtime_s," << summary.runtime.mean << ',' << summary.runtime.median << ','
        << summary.runtime.p95 << ',' << summary.runtime.p99 << '\n';
    out << "abs_error," << summary.abs_error.mean << ',' << summary.abs_error.median << ','
        << summary.abs_error.p95 << ',' << summary.abs_error.p99 << '\n';
}

inline void write_grid_csv(std::ostream& out, const std::vector<GridCellResult>& cells) {
    out << "sigma_max,w_min,d_max,p95_runtime_s,mean_abs_error,median_abs_error,"
           "p95_abs_error,p99_abs_error,records,pareto\n";
    for (const GridCellResult& c : cells) {
        out << c.sigma_max << ',' << c.w_min << ',' << c.d_max << ',' << c.p95_runtime_s << ','
            << c.abs_error.mean << ',' << c.abs_error.median << ',' << c.abs_error.p95 << ','
            << c.abs_error.p99 << ',' << c.n_records << ',' << (c.pareto ? 1 : 0) << '\n';
    }
}

}  // namespace collprob
