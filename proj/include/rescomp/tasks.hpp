#pragma once

// Benchmark dataset generators: memory capacity (delayed-input recall),
// nonlinear memorization, NARMA of order 20, and Mackey-Glass next-step
// prediction. All series default to length 20000 with a 15000/5000
// train/test split; the validation segment is the last quarter of the
// series, overlapping the training segment (model selection first, final
// fit on the full training segment).

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "rescomp/common.hpp"
#include "rescomp/rng.hpp"

namespace rescomp {

struct SplitBounds {
    long train_end = 0;  // training samples: [0, train_end)
    long test_end = 0;   // test samples: [train_end, test_end)
    long val_len = 0;    // validation: last val_len samples of training
};

/// 3/4 train, 1/4 test, validation = last quarter of the series
/// (15000/5000/5000 at the default length 20000).
inline SplitBounds proportional_bounds(long length) {
    const long train_end = (3 * length) / 4;
    return {train_end, length, length - train_end};
}

struct Dataset {
    std::string name;
    Eigen::MatrixXd inputs;   // U x T
    Eigen::MatrixXd targets;  // Y x T, aligned index-for-index with inputs
    SplitBounds bounds;
    long washout = 0;  // recommended transient discard
};

struct IndexRange {
    long begin = 0;
    long end = 0;  // half-open
    long size() const { return end - begin; }
};

struct SplitRanges {
    IndexRange train;
    IndexRange validation;
    IndexRange test;
};

/// Splits a dataset into train/validation/test index ranges. The validation
/// range overlaps the training range by construction.
inline SplitRanges split(const Dataset& ds) {
    const long t_len = ds.inputs.cols();
    const SplitBounds& b = ds.bounds;
    require(ds.targets.cols() == t_len, "split: input/target length mismatch");
    require(b.test_end == t_len, "split: bounds do not cover the series");
    require(b.train_end > 0 && b.train_end < b.test_end, "split: bad train_end");
    require(b.val_len > 0 && b.val_len <= b.train_end, "split: bad val_len");
    return {{0, b.train_end},
            {b.train_end - b.val_len, b.train_end},
            {b.train_end, b.test_end}};
}

/// Memory-capacity task: scalar input uniform on [0, 0.5]; 2N target
/// channels, channel k-1 holding the input delayed by k steps. Recommended
/// washout 2N so every delayed target is defined past the transient.
inline Dataset gen_mc(long length, long n_units, std::uint64_t seed) {
    require(n_units >= 1, "gen_mc: n_units must be positive");
    const long channels = 2 * n_units;
    const long washout = channels;
    require(length > channels + washout, "gen_mc: series too short for 2N delays");

    Dataset ds;
    ds.name = "mc";
    ds.washout = washout;
    ds.bounds = proportional_bounds(length);
    Rng rng(seed);
    ds.inputs.resize(1, length);
    for (long t = 0; t < length; ++t) ds.inputs(0, t) = rng.uniform(0.0, 0.5);
    ds.targets = Eigen::MatrixXd::Zero(channels, length);
    for (long c = 0; c < channels; ++c) {
        const long delay = c + 1;
        for (long t = delay; t < length; ++t)
            ds.targets(c, t) = ds.inputs(0, t - delay);
    }
    return ds;
}

/// Nonlinear memorization: input uniform on [0, 1], target
/// d(t) = sin(nu * u(t - delta)); entries before the first defined target
/// are zero and fall inside the recommended washout.
inline Dataset gen_nlm(long length, std::uint64_t seed, double nu = std::sqrt(2.0),
                       long delta = 30) {
    const long washout = 100;
    require(delta >= 0, "gen_nlm: delta must be >= 0");
    require(length > delta + washout, "gen_nlm: series too short");

    Dataset ds;
    ds.name = "nlm";
    ds.washout = washout;
    ds.bounds = proportional_bounds(length);
    Rng rng(seed);
    ds.inputs.resize(1, length);
    for (long t = 0; t < length; ++t) ds.inputs(0, t) = rng.u01();
    ds.targets = Eigen::MatrixXd::Zero(1, length);
    for (long t = delta; t < length; ++t)
        ds.targets(0, t) = std::sin(nu * ds.inputs(0, t - delta));
    return ds;
}

/// Order-20 NARMA recurrence over a given input sequence, with all
/// pre-series history (inputs and outputs) treated as zero:
///   d(t+1) = tanh(0.3 d(t) + 0.05 d(t) sum_{i=0..19} d(t-i)
///            + 1.5 u(t-19) u(t) + 0.01).
inline Eigen::VectorXd narma20_series(const Eigen::VectorXd& u) {
    const long t_len = u.size();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(t_len);
    auto d_at = [&](long i) { return i >= 0 ? d[i] : 0.0; };
    auto u_at = [&](long i) { return i >= 0 ? u[i] : 0.0; };
    for (long j = 0; j < t_len; ++j) {
        double window = 0.0;
        for (long i = 0; i < 20; ++i) window += d_at(j - 1 - i);
        d[j] = std::tanh(0.3 * d_at(j - 1) + 0.05 * d_at(j - 1) * window +
                         1.5 * u_at(j - 20) * u_at(j - 1) + 0.01);
    }
    return d;
}

/// NARMA-20 task: input uniform on [0, 0.5], target from narma20_series.
/// The first 20 targets are part of the series; the washout absorbs them.
inline Dataset gen_narma20(long length, std::uint64_t seed) {
    const long washout = 100;
    require(length > 20 + washout, "gen_narma20: series too short");

    Dataset ds;
    ds.name = "narma20";
    ds.washout = washout;
    ds.bounds = proportional_bounds(length);
    Rng rng(seed);
    ds.inputs.resize(1, length);
    for (long t = 0; t < length; ++t) ds.inputs(0, t) = rng.uniform(0.0, 0.5);
    ds.targets = narma20_series(ds.inputs.row(0).transpose()).transpose();
    return ds;
}

struct MackeyGlassParams {
    double beta = 0.2;
    double gamma = 0.1;
    double delay = 30.0;
    double exponent = 10.0;         // n
    double step = 0.1;              // internal RK4 step; delay must be a multiple
    double initial_history = 1.2;   // constant history for t <= 0
    long transient = 1000;          // unit-spaced samples discarded up front
};

/// Mackey-Glass next-step prediction:
///   du/dt = beta u(t-delay) / (1 + u(t-delay)^n) - gamma u(t),
/// integrated with RK4 at the internal step, delayed lookups served from the
/// history buffer (cubic Hermite at half-step stage times), subsampled to
/// unit spacing. Input u(t), target u(t+1).
inline Dataset gen_mackey_glass(long length, MackeyGlassParams p = {}) {
    require(length >= 2, "gen_mackey_glass: length must be >= 2");
    require(p.step > 0.0, "gen_mackey_glass: step must be > 0");
    require(p.transient >= 0, "gen_mackey_glass: transient must be >= 0");
    const double stride_f = 1.0 / p.step;
    const double delay_f = p.delay / p.step;
    require(std::abs(stride_f - std::round(stride_f)) < 1e-9,
            "gen_mackey_glass: 1/step must be an integer");
    require(std::abs(delay_f - std::round(delay_f)) < 1e-9,
            "gen_mackey_glass: delay must be an exact multiple of step");
    const long stride = static_cast<long>(std::round(stride_f));
    const long delay_steps = static_cast<long>(std::round(delay_f));

    const long unit_samples = p.transient + length + 1;
    const long internal_steps = unit_samples * stride;
    std::vector<double> value(static_cast<std::size_t>(internal_steps) + 1);
    std::vector<double> deriv(value.size());

    auto f = [&](double u, double u_delayed) {
        return p.beta * u_delayed / (1.0 + std::pow(u_delayed, p.exponent)) -
               p.gamma * u;
    };
    auto hist_value = [&](long i) {
        return i < 0 ? p.initial_history : value[static_cast<std::size_t>(i)];
    };
    // One-sided derivatives around the history boundary: node 0 carries the
    // flat history derivative on its left and the flow derivative on its
    // right, so the constant-history segment interpolates exactly.
    auto deriv_right = [&](long i) {
        return i < 0 ? 0.0 : deriv[static_cast<std::size_t>(i)];
    };
    auto deriv_left = [&](long i) {
        return i <= 0 ? 0.0 : deriv[static_cast<std::size_t>(i)];
    };

    value[0] = p.initial_history;
    deriv[0] = f(value[0], hist_value(-delay_steps));
    const double h = p.step;
    for (long i = 0; i < internal_steps; ++i) {
        const long j = i - delay_steps;
        const double d0 = hist_value(j);
        const double d1 = hist_value(j + 1);
        // cubic Hermite at the half-step stage time
        const double dmid =
            0.5 * (d0 + d1) + (h / 8.0) * (deriv_right(j) - deriv_left(j + 1));
        const double u = value[static_cast<std::size_t>(i)];
        const double k1 = f(u, d0);
        const double k2 = f(u + 0.5 * h * k1, dmid);
        const double k3 = f(u + 0.5 * h * k2, dmid);
        const double k4 = f(u + h * k3, d1);
        const double next = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        value[static_cast<std::size_t>(i + 1)] = next;
        deriv[static_cast<std::size_t>(i + 1)] = f(next, d1);
    }

    Dataset ds;
    ds.name = "mg";
    ds.washout = 100;
    ds.bounds = proportional_bounds(length);
    ds.inputs.resize(1, length);
    ds.targets.resize(1, length);
    for (long t = 0; t < length; ++t) {
        ds.inputs(0, t) = value[static_cast<std::size_t>((p.transient + t) * stride)];
        ds.targets(0, t) =
            value[static_cast<std::size_t>((p.transient + t + 1) * stride)];
    }
    if (!ds.inputs.allFinite() || !ds.targets.allFinite())
        throw std::runtime_error("gen_mackey_glass: trajectory diverged");
    return ds;
}

/// Writes the dataset as a comma-separated file, one row per time step,
/// input columns first (u0..), then target columns (d0..), full '%.17g'
/// precision for cross-implementation fixture exchange.
inline void export_dataset_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_dataset_csv: cannot open " + path);
    for (long r = 0; r < ds.inputs.rows(); ++r)
        out << (r ? ",u" : "u") << r;
    for (long r = 0; r < ds.targets.rows(); ++r) out << ",d" << r;
    out << '\n';
    char buf[32];
    for (long t = 0; t < ds.inputs.cols(); ++t) {
        for (long r = 0; r < ds.inputs.rows(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.inputs(r, t));
            out << (r ? "," : "") << buf;
        }
        for (long r = 0; r < ds.targets.rows(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.targets(r, t));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("export_dataset_csv: write failed: " + path);
}

}  // namespace rescomp
