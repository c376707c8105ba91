#pragma once

// Experiment harness: builds ESN / SCR / PTA models on the benchmark tasks,
// runs seeded repetitions (optionally in parallel, one RNG stream each),
// performs the validation-split random search for the baselines, and emits
// JSON summaries, per-epoch trace files and an accumulating comparison
// table. Baselines tune (rho, bias scaling) on the validation segment and
// are refit on the full training segment; PTA adapts gain and bias
// unsupervised on the training input before the readout fit.

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rescomp/common.hpp"
#include "rescomp/pta.hpp"
#include "rescomp/readout.hpp"
#include "rescomp/reservoir.hpp"
#include "rescomp/rng.hpp"
#include "rescomp/tasks.hpp"

namespace rescomp {

enum class TaskId { mc, nlm, narma20, mg };
enum class ModelId { esn, scr, pta };

inline std::string to_string(TaskId t) {
    switch (t) {
        case TaskId::mc: return "mc";
        case TaskId::nlm: return "nlm";
        case TaskId::narma20: return "narma20";
        case TaskId::mg: return "mg";
    }
    return "?";
}

inline std::string to_string(ModelId m) {
    switch (m) {
        case ModelId::esn: return "esn";
        case ModelId::scr: return "scr";
        case ModelId::pta: return "pta";
    }
    return "?";
}

inline TaskId parse_task(const std::string& s) {
    if (s == "mc") return TaskId::mc;
    if (s == "nlm") return TaskId::nlm;
    if (s == "narma20") return TaskId::narma20;
    if (s == "mg") return TaskId::mg;
    throw std::invalid_argument("unknown task: " + s);
}

inline ModelId parse_model(const std::string& s) {
    if (s == "esn") return ModelId::esn;
    if (s == "scr") return ModelId::scr;
    if (s == "pta") return ModelId::pta;
    throw std::invalid_argument("unknown model: " + s);
}

struct ExperimentConfig {
    TaskId task = TaskId::mc;
    ModelId model = ModelId::pta;
    long units = 100;
    long series_length = 20000;
    double input_scaling = 0.1;
    double rho = 0.5;   // spectral radius / ring weight (baselines), gain init (pta)
    double kappa = 1e-8;
    int repetitions = 20;
    int search_budget = 0;  // <= 0: auto-calibrated against PTA wall-clock
    std::uint64_t base_seed = 1;
    PtaHyper pta{};
    bool record_trace = true;  // per-epoch trace for PTA runs
    std::string output_dir;    // empty: nothing written
};

struct TraceRow {
    int epoch = 0;
    double mean_lambda = 0.0;
    double test_mc = std::numeric_limits<double>::quiet_NaN();  // mc task only
};

struct RepetitionOutcome {
    std::uint64_t seed = 0;
    double metric = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;
    // PTA runs
    int epochs_run = 0;
    double test_lambda = std::numeric_limits<double>::quiet_NaN();
    std::vector<TraceRow> trace;
    // baseline runs
    double selected_rho = std::numeric_limits<double>::quiet_NaN();
    double selected_bias_scaling = std::numeric_limits<double>::quiet_NaN();
    std::string error;  // nonempty if the repetition failed

    bool ok() const { return error.empty(); }
};

struct BudgetCalibration {
    bool used = false;
    double pta_seconds = 0.0;
    double candidate_seconds = 0.0;
    int resolved_budget = 0;
};

struct ExperimentResult {
    ExperimentConfig config;  // echo, with the resolved budget
    std::string metric_name;  // "mc" or "nmse"
    std::vector<RepetitionOutcome> repetitions;
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stddev = std::numeric_limits<double>::quiet_NaN();  // population
    bool complete = false;
    double wall_seconds = 0.0;
    BudgetCalibration calibration;
    std::vector<TraceRow> mean_trace;  // repetition-averaged, carry-forward padded
};

inline Dataset make_task_dataset(TaskId task, long length, long units,
                                 std::uint64_t seed) {
    switch (task) {
        case TaskId::mc: return gen_mc(length, units, seed);
        case TaskId::nlm: return gen_nlm(length, seed);
        case TaskId::narma20: return gen_narma20(length, seed);
        case TaskId::mg: return gen_mackey_glass(length);
    }
    throw std::invalid_argument("make_task_dataset: unknown task");
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Fits the readout on time indices [washout, fit_end) and scores on
// [eval_begin, eval_end); `states` holds the trajectory for [washout, ...).
inline double fit_and_score(const Dataset& ds, const Eigen::MatrixXd& states,
                            long washout, long fit_end, long eval_begin,
                            long eval_end, double kappa, TaskId task) {
    require(fit_end > washout && eval_begin >= washout && eval_end > eval_begin,
            "fit_and_score: inconsistent ranges");
    require(states.cols() >= eval_end - washout, "fit_and_score: states too short");
    const auto x_fit = states.middleCols(0, fit_end - washout);
    const auto y_fit = ds.targets.middleCols(washout, fit_end - washout);
    const RidgeReadout readout = fit_ridge(x_fit, y_fit, kappa);
    const auto x_eval = states.middleCols(eval_begin - washout, eval_end - eval_begin);
    const Eigen::MatrixXd preds = predict(readout, x_eval);
    const auto truth = ds.targets.middleCols(eval_begin, eval_end - eval_begin);
    if (task == TaskId::mc) return mc_score(preds, truth);
    return nmse(preds.row(0).transpose(), truth.row(0).transpose());
}

inline ReservoirWeights build_baseline_reservoir(ModelId model, long units,
                                                 long input_dim,
                                                 double input_scaling, double rho,
                                                 double bias_scaling,
                                                 std::uint64_t seed) {
    ReservoirConfig rc;
    rc.n_units = units;
    rc.input_dim = input_dim;
    rc.input_scaling = input_scaling;
    rc.bias_scaling = bias_scaling;
    rc.spectral_radius = rho;
    rc.seed = seed;
    Rng rng(seed);
    if (model == ModelId::esn) {
        rc.topology = Topology::dense;
        return init_dense(rc, rng);
    }
    rc.topology = Topology::ring;
    rc.ring_weight = rho;  // ring spectral radius equals the shared weight
    return init_ring(rc, rng);
}

}  // namespace detail

struct SearchCandidate {
    double rho = 0.0;
    double bias_scaling = 0.0;
    std::uint64_t seed = 0;
};

/// Budgeted random search; returns the candidate with the best evaluator
/// score (max for maximize, else min), ties broken by first sample.
template <class Sampler, class Evaluator>
SearchCandidate random_search(int budget, bool maximize, Sampler&& sample,
                              Evaluator&& evaluate,
                              double* best_score_out = nullptr) {
    require(budget >= 1, "random_search: budget must be >= 1");
    SearchCandidate best{};
    double best_score = 0.0;
    for (int j = 0; j < budget; ++j) {
        const SearchCandidate c = sample(j);
        const double score = evaluate(c);
        const bool better =
            j == 0 || (maximize ? score > best_score : score < best_score);
        if (better) {
            best = c;
            best_score = score;
        }
    }
    if (best_score_out) *best_score_out = best_score;
    return best;
}

/// One repetition: dataset generation, model construction (with PTA training
/// or baseline random search), readout fit on the training split, metric on
/// the test split. Everything derives deterministically from `seed`.
inline RepetitionOutcome run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto start = detail::Clock::now();
    RepetitionOutcome out;
    out.seed = seed;

    const Dataset ds =
        make_task_dataset(cfg.task, cfg.series_length, cfg.units, derive_seed(seed, 0));
    const SplitRanges seg = split(ds);
    const long input_dim = ds.inputs.rows();

    if (cfg.model == ModelId::pta) {
        ReservoirConfig rc;
        rc.n_units = cfg.units;
        rc.input_dim = input_dim;
        rc.input_scaling = cfg.input_scaling;
        rc.bias_scaling = 0.0;  // adaptive bias replaces the fixed one
        rc.spectral_radius = cfg.rho;
        rc.topology = Topology::ring;
        rc.ring_weight = 1.0;
        rc.seed = derive_seed(seed, 1);
        Rng rng(rc.seed);
        const ReservoirWeights w = init_ring(rc, rng);

        const Eigen::MatrixXd train_input = ds.inputs.leftCols(seg.train.end);
        auto test_metric = [&](const Eigen::VectorXd& gain,
                               const Eigen::VectorXd& bias) {
            const Eigen::MatrixXd states =
                collect_states(w, gain, bias, ds.inputs, ds.washout);
            return detail::fit_and_score(ds, states, ds.washout, seg.train.end,
                                         seg.test.begin, seg.test.end, cfg.kappa,
                                         cfg.task);
        };

        EpochHook hook;
        if (cfg.record_trace) {
            const PtaParameters p0 = make_pta_parameters(cfg.units, cfg.rho, 1.0);
            TraceRow row0;
            row0.epoch = 0;
            row0.mean_lambda = evaluate_lambda(w, p0, train_input, cfg.pta.washout,
                                               cfg.pta.eta_floor);
            if (cfg.task == TaskId::mc) row0.test_mc = test_metric(p0.gain, p0.bias);
            out.trace.push_back(row0);
            hook = [&](int epoch, const PtaParameters& p, double mean_lambda) {
                TraceRow row;
                row.epoch = epoch;
                row.mean_lambda = mean_lambda;
                if (cfg.task == TaskId::mc) row.test_mc = test_metric(p.gain, p.bias);
                out.trace.push_back(row);
            };
        }

        const PtaTrainingResult trained =
            train_pta(w, {train_input}, cfg.pta, cfg.rho, 1.0, false, hook);
        out.epochs_run = trained.trace.epochs_run;
        if (cfg.record_trace && cfg.task == TaskId::mc && !out.trace.empty())
            out.metric = out.trace.back().test_mc;
        else
            out.metric = test_metric(trained.params.gain, trained.params.bias);

        const Eigen::MatrixXd test_input =
            ds.inputs.middleCols(seg.test.begin, seg.test.size());
        out.test_lambda = evaluate_lambda(w, trained.params, test_input,
                                          cfg.pta.washout, cfg.pta.eta_floor);
    } else {
        require(cfg.search_budget >= 1,
                "run_single: baseline needs a resolved search budget >= 1");
        Rng search_rng(derive_seed(seed, 2));
        const double bias_hi = cfg.task == TaskId::mc ? cfg.input_scaling : 1.0;

        const Eigen::MatrixXd search_input = ds.inputs.leftCols(seg.train.end);
        auto sample = [&](int j) {
            SearchCandidate c;
            c.rho = search_rng.open01();
            c.bias_scaling = bias_hi * search_rng.open01();
            c.seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(j));
            return c;
        };
        const bool maximize = cfg.task == TaskId::mc;
        auto evaluate = [&](const SearchCandidate& c) {
            try {
                const ReservoirWeights w = detail::build_baseline_reservoir(
                    cfg.model, cfg.units, input_dim, cfg.input_scaling, c.rho,
                    c.bias_scaling, c.seed);
                const Eigen::MatrixXd states =
                    collect_states(w, search_input, ds.washout);
                return detail::fit_and_score(ds, states, ds.washout,
                                             seg.validation.begin,
                                             seg.validation.begin, seg.validation.end,
                                             cfg.kappa, cfg.task);
            } catch (const SpectralRadiusError&) {
                // an unresolvable draw never wins the search
                return maximize ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
            }
        };
        const SearchCandidate best =
            random_search(cfg.search_budget, maximize, sample, evaluate);
        out.selected_rho = best.rho;
        out.selected_bias_scaling = best.bias_scaling;

        const ReservoirWeights w = detail::build_baseline_reservoir(
            cfg.model, cfg.units, input_dim, cfg.input_scaling, best.rho,
            best.bias_scaling, best.seed);
        const Eigen::MatrixXd states = collect_states(w, ds.inputs, ds.washout);
        out.metric =
            detail::fit_and_score(ds, states, ds.washout, seg.train.end,
                                  seg.test.begin, seg.test.end, cfg.kappa, cfg.task);
    }

    out.seconds = detail::seconds_since(start);
    return out;
}

/// Worker count for repetition-level parallelism: RESCOMP_THREADS when set,
/// otherwise the hardware concurrency, never more than `jobs`.
inline int concurrency_width(int jobs) {
    int width = static_cast<int>(std::thread::hardware_concurrency());
    if (width < 1) width = 1;
    if (const char* env = std::getenv("RESCOMP_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) width = v;
    }
    return std::min(width, jobs);
}

namespace detail {

template <class Fn>
void parallel_for(long count, int width, Fn&& fn) {
    if (width <= 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(width));
    for (int t = 0; t < width; ++t)
        pool.emplace_back([&] {
            for (long i; (i = next.fetch_add(1)) < count;) fn(i);
        });
    for (auto& th : pool) th.join();
}

inline BudgetCalibration calibrate_budget(const ExperimentConfig& cfg) {
    BudgetCalibration cal;
    cal.used = true;

    ExperimentConfig pta_cfg = cfg;
    pta_cfg.model = ModelId::pta;
    pta_cfg.record_trace = false;
    pta_cfg.output_dir.clear();
    auto t0 = Clock::now();
    run_single(pta_cfg, cfg.base_seed);
    cal.pta_seconds = seconds_since(t0);

    const Dataset ds = make_task_dataset(cfg.task, cfg.series_length, cfg.units,
                                         derive_seed(cfg.base_seed, 0));
    const SplitRanges seg = split(ds);
    const double bias_hi = cfg.task == TaskId::mc ? cfg.input_scaling : 1.0;
    t0 = Clock::now();
    {
        const ReservoirWeights w = build_baseline_reservoir(
            cfg.model, cfg.units, ds.inputs.rows(), cfg.input_scaling, 0.5,
            0.5 * bias_hi, derive_seed(cfg.base_seed, 999));
        const Eigen::MatrixXd states =
            collect_states(w, ds.inputs.leftCols(seg.train.end), ds.washout);
        fit_and_score(ds, states, ds.washout, seg.validation.begin,
                      seg.validation.begin, seg.validation.end, cfg.kappa, cfg.task);
    }
    cal.candidate_seconds = std::max(seconds_since(t0), 1e-9);

    const long ratio = std::lround(cal.pta_seconds / cal.candidate_seconds);
    cal.resolved_budget = static_cast<int>(std::clamp(ratio, 50L, 200L));
    return cal;
}

}  // namespace detail

inline std::vector<std::string> emit_outputs(const ExperimentResult& result,
                                             const std::string& dir);

/// Runs all repetitions (seed = base_seed + index), aggregates mean and
/// population std over the final metric, and writes output files when an
/// output directory is configured. Failed repetitions are recorded and the
/// result is marked incomplete.
inline ExperimentResult run_experiment(ExperimentConfig cfg) {
    require(cfg.repetitions >= 1, "run_experiment: repetitions must be >= 1");
    const auto start = detail::Clock::now();

    ExperimentResult result;
    if (cfg.model != ModelId::pta && cfg.search_budget < 1) {
        result.calibration = detail::calibrate_budget(cfg);
        cfg.search_budget = result.calibration.resolved_budget;
    }
    result.config = cfg;
    result.metric_name = cfg.task == TaskId::mc ? "mc" : "nmse";

    result.repetitions.assign(static_cast<std::size_t>(cfg.repetitions), {});
    detail::parallel_for(cfg.repetitions, concurrency_width(cfg.repetitions),
                         [&](long i) {
                             auto& slot = result.repetitions[static_cast<std::size_t>(i)];
                             const std::uint64_t seed =
                                 cfg.base_seed + static_cast<std::uint64_t>(i);
                             try {
                                 slot = run_single(cfg, seed);
                             } catch (const std::exception& e) {
                                 slot.seed = seed;
                                 slot.error = e.what();
                             }
                         });

    double sum = 0.0;
    long ok = 0;
    for (const auto& r : result.repetitions)
        if (r.ok()) {
            sum += r.metric;
            ++ok;
        }
    result.complete = ok == cfg.repetitions;
    if (ok > 0) {
        result.mean = sum / static_cast<double>(ok);
        double sq = 0.0;
        for (const auto& r : result.repetitions)
            if (r.ok()) sq += (r.metric - result.mean) * (r.metric - result.mean);
        result.stddev = std::sqrt(sq / static_cast<double>(ok));
    }

    if (cfg.model == ModelId::pta && cfg.record_trace && ok > 0) {
        std::size_t rows = 0;
        for (const auto& r : result.repetitions)
            if (r.ok()) rows = std::max(rows, r.trace.size());
        for (std::size_t i = 0; i < rows; ++i) {
            TraceRow row;
            row.epoch = static_cast<int>(i);
            double lam = 0.0, mc = 0.0;
            long mc_count = 0;
            for (const auto& r : result.repetitions) {
                if (!r.ok() || r.trace.empty()) continue;
                const TraceRow& src = r.trace[std::min(i, r.trace.size() - 1)];
                lam += src.mean_lambda;
                if (std::isfinite(src.test_mc)) {
                    mc += src.test_mc;
                    ++mc_count;
                }
            }
            row.mean_lambda = lam / static_cast<double>(ok);
            if (mc_count == ok) row.test_mc = mc / static_cast<double>(mc_count);
            result.mean_trace.push_back(row);
        }
    }

    result.wall_seconds = detail::seconds_since(start);
    if (!cfg.output_dir.empty()) emit_outputs(result, cfg.output_dir);
    return result;
}

// ---------------------------------------------------------------------------
// Output files and their JSON/CSV round trip.

namespace detail {

inline nlohmann::json json_num(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
}

inline double num_or_nan(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : j.get<double>();
}

inline std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
    return {{"task", to_string(c.task)},
            {"model", to_string(c.model)},
            {"units", c.units},
            {"series_length", c.series_length},
            {"input_scaling", c.input_scaling},
            {"rho", c.rho},
            {"kappa", c.kappa},
            {"repetitions", c.repetitions},
            {"search_budget", c.search_budget},
            {"base_seed", c.base_seed},
            {"record_trace", c.record_trace},
            {"pta",
             {{"learning_rate", c.pta.learning_rate},
              {"momentum", c.pta.momentum},
              {"max_epochs", c.pta.max_epochs},
              {"lambda_threshold", c.pta.lambda_threshold},
              {"washout", c.pta.washout},
              {"eta_floor", c.pta.eta_floor}}}};
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.task = parse_task(j.at("task").get<std::string>());
    c.model = parse_model(j.at("model").get<std::string>());
    c.units = j.at("units").get<long>();
    c.series_length = j.at("series_length").get<long>();
    c.input_scaling = j.at("input_scaling").get<double>();
    c.rho = j.at("rho").get<double>();
    c.kappa = j.at("kappa").get<double>();
    c.repetitions = j.at("repetitions").get<int>();
    c.search_budget = j.at("search_budget").get<int>();
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    c.record_trace = j.at("record_trace").get<bool>();
    const auto& p = j.at("pta");
    c.pta.learning_rate = p.at("learning_rate").get<double>();
    c.pta.momentum = p.at("momentum").get<double>();
    c.pta.max_epochs = p.at("max_epochs").get<int>();
    c.pta.lambda_threshold = p.at("lambda_threshold").get<double>();
    c.pta.washout = p.at("washout").get<long>();
    c.pta.eta_floor = p.at("eta_floor").get<double>();
    return c;
}

inline nlohmann::json to_json(const TraceRow& r) {
    return {{"epoch", r.epoch},
            {"mean_lambda", detail::json_num(r.mean_lambda)},
            {"test_mc", detail::json_num(r.test_mc)}};
}

inline TraceRow trace_row_from_json(const nlohmann::json& j) {
    TraceRow r;
    r.epoch = j.at("epoch").get<int>();
    r.mean_lambda = detail::num_or_nan(j.at("mean_lambda"));
    r.test_mc = detail::num_or_nan(j.at("test_mc"));
    return r;
}

inline nlohmann::json to_json(const RepetitionOutcome& r) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& row : r.trace) trace.push_back(to_json(row));
    return {{"seed", r.seed},
            {"metric", detail::json_num(r.metric)},
            {"seconds", r.seconds},
            {"epochs_run", r.epochs_run},
            {"test_lambda", detail::json_num(r.test_lambda)},
            {"selected_rho", detail::json_num(r.selected_rho)},
            {"selected_bias_scaling", detail::json_num(r.selected_bias_scaling)},
            {"error", r.error},
            {"trace", trace}};
}

inline RepetitionOutcome repetition_from_json(const nlohmann::json& j) {
    RepetitionOutcome r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.metric = detail::num_or_nan(j.at("metric"));
    r.seconds = j.at("seconds").get<double>();
    r.epochs_run = j.at("epochs_run").get<int>();
    r.test_lambda = detail::num_or_nan(j.at("test_lambda"));
    r.selected_rho = detail::num_or_nan(j.at("selected_rho"));
    r.selected_bias_scaling = detail::num_or_nan(j.at("selected_bias_scaling"));
    r.error = j.at("error").get<std::string>();
    for (const auto& row : j.at("trace")) r.trace.push_back(trace_row_from_json(row));
    return r;
}

inline nlohmann::json to_json(const ExperimentResult& res) {
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& r : res.repetitions) reps.push_back(to_json(r));
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& row : res.mean_trace) trace.push_back(to_json(row));
    nlohmann::json calibration;
    if (res.calibration.used)
        calibration = {{"pta_seconds", res.calibration.pta_seconds},
                       {"candidate_seconds", res.calibration.candidate_seconds},
                       {"resolved_budget", res.calibration.resolved_budget}};
    return {{"task", to_string(res.config.task)},
            {"model", to_string(res.config.model)},
            {"metric", res.metric_name},
            {"config", to_json(res.config)},
            {"metadata",
             {{"nmse_definition", "mse divided by population variance of the target"},
              {"selection_rule", "argmax mc / argmin nmse on the validation split"},
              {"budget_calibration", calibration}}},
            {"repetitions", reps},
            {"mean", detail::json_num(res.mean)},
            {"std", detail::json_num(res.stddev)},
            {"complete", res.complete},
            {"wall_seconds", res.wall_seconds},
            {"mean_trace", trace}};
}

inline ExperimentResult result_from_json(const nlohmann::json& j) {
    ExperimentResult res;
    res.config = config_from_json(j.at("config"));
    res.metric_name = j.at("metric").get<std::string>();
    for (const auto& r : j.at("repetitions"))
        res.repetitions.push_back(repetition_from_json(r));
    res.mean = detail::num_or_nan(j.at("mean"));
    res.stddev = detail::num_or_nan(j.at("std"));
    res.complete = j.at("complete").get<bool>();
    res.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& row : j.at("mean_trace"))
        res.mean_trace.push_back(trace_row_from_json(row));
    const auto& cal = j.at("metadata").at("budget_calibration");
    if (!cal.is_null()) {
        res.calibration.used = true;
        res.calibration.pta_seconds = cal.at("pta_seconds").get<double>();
        res.calibration.candidate_seconds = cal.at("candidate_seconds").get<double>();
        res.calibration.resolved_budget = cal.at("resolved_budget").get<int>();
    }
    return res;
}

/// Flat experiment config file: one `key = value` per line, keys named like
/// the CLI long flags (task, model, units, input-scaling, ...). '#' starts a
/// comment; blank lines are skipped. Values stay strings; the caller applies
/// them with command-line flags taking precedence.
inline std::map<std::string, std::string> parse_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::map<std::string, std::string> entries;
    std::string line;
    long lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: " + path + ":" +
                                     std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: " + path + ":" +
                                     std::to_string(lineno) + ": empty key");
        entries[key] = value;
    }
    return entries;
}

/// Reads back a summary file written by emit_outputs.
inline ExperimentResult parse_summary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_summary: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return result_from_json(j);
}

/// Writes (a) the JSON summary, (b) the per-epoch trace file for PTA runs
/// (columns epoch,mean_lambda[,test_mc]) and (c) appends one row to the
/// accumulating comparison table. Returns the paths written.
inline std::vector<std::string> emit_outputs(const ExperimentResult& result,
                                             const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("emit_outputs: cannot create directory " + dir +
                                 ": " + ec.message());
    std::vector<std::string> written;
    const std::string base =
        to_string(result.config.task) + "_" + to_string(result.config.model);

    const std::string summary_path = (fs::path(dir) / (base + "_summary.json")).string();
    {
        std::ofstream out(summary_path);
        if (!out) throw std::runtime_error("emit_outputs: cannot open " + summary_path);
        out << to_json(result).dump(2) << '\n';
        if (!out)
            throw std::runtime_error("emit_outputs: write failed: " + summary_path);
    }
    written.push_back(summary_path);

    if (result.config.model == ModelId::pta && !result.mean_trace.empty()) {
        const std::string trace_path = (fs::path(dir) / (base + "_trace.csv")).string();
        std::ofstream out(trace_path);
        if (!out) throw std::runtime_error("emit_outputs: cannot open " + trace_path);
        const bool with_mc = result.config.task == TaskId::mc;
        out << (with_mc ? "epoch,mean_lambda,test_mc" : "epoch,mean_lambda") << '\n';
        for (const auto& row : result.mean_trace) {
            out << row.epoch << ',' << detail::format_g17(row.mean_lambda);
            if (with_mc) out << ',' << detail::format_g17(row.test_mc);
            out << '\n';
        }
        if (!out) throw std::runtime_error("emit_outputs: write failed: " + trace_path);
        written.push_back(trace_path);
    }

    const std::string cmp_path = (fs::path(dir) / "comparison.csv").string();
    const bool fresh = !fs::exists(cmp_path);
    {
        std::ofstream out(cmp_path, std::ios::app);
        if (!out) throw std::runtime_error("emit_outputs: cannot open " + cmp_path);
        if (fresh) out << "task,model,metric,mean,std,repetitions\n";
        out << to_string(result.config.task) << ',' << to_string(result.config.model)
            << ',' << result.metric_name << ',' << detail::format_g17(result.mean)
            << ',' << detail::format_g17(result.stddev) << ','
            << result.config.repetitions << '\n';
        if (!out) throw std::runtime_error("emit_outputs: write failed: " + cmp_path);
    }
    written.push_back(cmp_path);
    return written;
}

}  // namespace rescomp
