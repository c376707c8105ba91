#pragma once

// Phase Transition Adaptation: unsupervised, per-step gradient adaptation of
// per-neuron gains and biases of a ring reservoir (shared weight 1), driving
// its local Lyapunov exponents towards zero. For this topology the Jacobian
// of the gained map keeps the ring shape, its eigenvalue moduli are all
// equal, and the LLE collapses to the closed form
//   lambda(t) = (1/N) sum_k log|eta_k(t)|,  eta_k = (1 - x_k^2) a_k,
// which makes the whole update rule O(N) per time step. Gradients are
// within-timestep (net is treated as constant w.r.t. gain and bias).

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rescomp/common.hpp"
#include "rescomp/reservoir.hpp"

namespace rescomp {

struct PtaHyper {
    double learning_rate = 1e-5;     // eta
    double momentum = 0.9;           // alpha in [0, 1]
    int max_epochs = 50;
    double lambda_threshold = -0.1;  // stop once epoch-mean lambda reaches this
    long washout = 100;              // per-epoch transient, state update only
    double eta_floor = 1e-12;        // degeneracy clamp for |eta| in log/division
};

inline void validate(const PtaHyper& h) {
    require(h.learning_rate > 0.0, "pta: learning_rate must be > 0");
    require(h.momentum >= 0.0 && h.momentum <= 1.0, "pta: momentum must be in [0,1]");
    require(h.max_epochs >= 0, "pta: max_epochs must be >= 0");
    require(h.lambda_threshold < 0.0, "pta: lambda_threshold must be < 0");
    require(h.washout >= 0, "pta: washout must be >= 0");
    require(h.eta_floor > 0.0, "pta: eta_floor must be > 0");
}

struct PtaParameters {
    Eigen::VectorXd gain;
    Eigen::VectorXd bias;
    Eigen::VectorXd velocity_gain;
    Eigen::VectorXd velocity_bias;
};

/// Fresh parameters: constant gain (the spectral-radius init), constant bias,
/// zero velocities.
inline PtaParameters make_pta_parameters(long n_units, double gain_init,
                                         double bias_init = 1.0) {
    require(n_units >= 1, "pta: n_units must be positive");
    PtaParameters p;
    p.gain = Eigen::VectorXd::Constant(n_units, gain_init);
    p.bias = Eigen::VectorXd::Constant(n_units, bias_init);
    p.velocity_gain = Eigen::VectorXd::Zero(n_units);
    p.velocity_bias = Eigen::VectorXd::Zero(n_units);
    return p;
}

struct TrainingTrace {
    std::vector<double> epoch_mean_lambda;
    int epochs_run = 0;
    std::vector<double> step_lambda;  // filled only when requested
};

/// Clamps |v| up to floor while preserving sign; the sign of 0 counts as +.
inline double clamp_away_from_zero(double v, double floor) {
    return v < 0.0 ? std::min(v, -floor) : std::max(v, floor);
}

/// Per-unit eta_k = (1 - x_k^2) a_k, unclamped (the floor is applied inside
/// downstream logs and divisions).
inline Eigen::VectorXd eta_values(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& gain) {
    require(x.size() == gain.size(), "eta_values: dimension mismatch");
    return ((1.0 - x.array().square()) * gain.array()).matrix();
}

/// Closed-form local Lyapunov exponent of the gained ring map,
/// lambda = (1/N) sum_k log|eta_k|, with the floor clamp inside the log.
inline double local_lyapunov(const Eigen::VectorXd& eta, double eta_floor = 1e-12) {
    require(eta.size() >= 1, "local_lyapunov: empty eta");
    return eta.array().abs().max(eta_floor).log().sum() /
           static_cast<double>(eta.size());
}

/// Materialized Jacobian of the gained ring map at state x: ring-shaped with
/// entries (1 - x_i^2) a_i. For tests and diagnostics; the trainer never
/// builds it.
inline Eigen::MatrixXd ring_jacobian(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& gain) {
    require(x.size() == gain.size() && x.size() >= 2,
            "ring_jacobian: need matching vectors of size >= 2");
    const long n = x.size();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    auto diag = [&](long i) { return (1.0 - x[i] * x[i]) * gain[i]; };
    j(0, n - 1) = diag(0);
    for (long i = 1; i < n; ++i) j(i, i - 1) = diag(i);
    return j;
}

namespace detail {

inline void pta_gradients_into(double lambda, const Eigen::VectorXd& eta,
                               const Eigen::VectorXd& x, const Eigen::VectorXd& net,
                               const Eigen::VectorXd& gain, double eta_floor,
                               Eigen::VectorXd& grad_gain,
                               Eigen::VectorXd& grad_bias) {
    const long n = x.size();
    grad_gain.resize(n);
    grad_bias.resize(n);
    for (long i = 0; i < n; ++i) {
        const double c = lambda / clamp_away_from_zero(eta[i], eta_floor);
        const double one_minus_x2 = 1.0 - x[i] * x[i];
        grad_gain[i] = 2.0 * c * one_minus_x2 * (1.0 - 2.0 * x[i] * net[i] * gain[i]);
        grad_bias[i] = -4.0 * c * x[i] * one_minus_x2 * gain[i];
    }
}

}  // namespace detail

struct PtaGradients {
    Eigen::VectorXd gain;
    Eigen::VectorXd bias;
};

/// Within-timestep gradients of e(t) = N lambda(t)^2 with net held constant:
///   de/da_i = 2 (lambda/eta_i) (1 - x_i^2) (1 - 2 x_i net_i a_i)
///   de/db_i = -4 (lambda/eta_i) x_i (1 - x_i^2) a_i
inline PtaGradients pta_gradients(double lambda, const Eigen::VectorXd& eta,
                                  const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& net,
                                  const Eigen::VectorXd& gain,
                                  double eta_floor = 1e-12) {
    require(eta.size() == x.size() && net.size() == x.size() && gain.size() == x.size(),
            "pta_gradients: dimension mismatch");
    PtaGradients g;
    detail::pta_gradients_into(lambda, eta, x, net, gain, eta_floor, g.gain, g.bias);
    return g;
}

/// SGD-with-momentum update: v <- alpha v + (1 - alpha) grad, then
/// param <- param - learning_rate * v, for gain and bias alike.
inline void pta_update(PtaParameters& p, const Eigen::VectorXd& grad_gain,
                       const Eigen::VectorXd& grad_bias, const PtaHyper& h) {
    require(grad_gain.size() == p.gain.size() && grad_bias.size() == p.bias.size(),
            "pta_update: dimension mismatch");
    p.velocity_gain = h.momentum * p.velocity_gain + (1.0 - h.momentum) * grad_gain;
    p.velocity_bias = h.momentum * p.velocity_bias + (1.0 - h.momentum) * grad_bias;
    p.gain -= h.learning_rate * p.velocity_gain;
    p.bias -= h.learning_rate * p.velocity_bias;
}

struct PtaTrainingResult {
    PtaParameters params;
    TrainingTrace trace;
};

/// Called after each completed epoch with the epoch index (1-based) and the
/// parameters as of the end of that epoch.
using EpochHook =
    std::function<void(int epoch, const PtaParameters&, double mean_lambda)>;

namespace detail {

inline void check_training_input(const ReservoirWeights& w,
                                 const std::vector<Eigen::MatrixXd>& series_list,
                                 long washout) {
    require(w.topology == Topology::ring, "train_pta: requires a ring reservoir");
    require(w.ring_weight == 1.0, "train_pta: ring weight must be 1");
    require(!series_list.empty(), "train_pta: no input series");
    for (const auto& s : series_list) {
        require(s.rows() == w.input_dim(), "train_pta: input dimension mismatch");
        require(s.cols() > washout, "train_pta: series length must exceed washout");
    }
}

}  // namespace detail

/// Runs the full training loop: per epoch, a zero-state washout followed by
/// one gradient update per time step; repeats until max_epochs or until the
/// epoch-mean lambda reaches the threshold (checked after each full epoch).
/// Training sets with several series iterate the whole epoch body per series.
/// max_epochs = 0 returns the initial parameters untouched.
inline PtaTrainingResult train_pta(const ReservoirWeights& w,
                                   const std::vector<Eigen::MatrixXd>& series_list,
                                   const PtaHyper& hyper, double gain_init,
                                   double bias_init = 1.0,
                                   bool record_step_lambda = false,
                                   const EpochHook& epoch_hook = {}) {
    validate(hyper);
    detail::check_training_input(w, series_list, hyper.washout);

    const long n = w.n_units();
    PtaTrainingResult out{make_pta_parameters(n, gain_init, bias_init), {}};
    if (hyper.max_epochs == 0) return out;

    PtaParameters& p = out.params;
    Eigen::VectorXd x(n), net(n), eta(n), grad_gain(n), grad_bias(n);

    for (;;) {
        double lambda_sum = 0.0;
        long lambda_count = 0;
        for (const auto& series : series_list) {
            const long t_len = series.cols();
            x.setZero();
            for (long t = 0; t < t_len; ++t) {
                net[0] = x[n - 1];  // ring weight is 1
                net.tail(n - 1) = x.head(n - 1);
                net.noalias() += w.input * series.col(t);
                x = (p.gain.array() * net.array() + p.bias.array()).tanh().matrix();
                if (t < hyper.washout) continue;

                eta = ((1.0 - x.array().square()) * p.gain.array()).matrix();
                const double lambda = local_lyapunov(eta, hyper.eta_floor);
                if (!std::isfinite(lambda))
                    throw std::runtime_error(
                        "train_pta: non-finite lambda at epoch " +
                        std::to_string(out.trace.epochs_run + 1) + ", step " +
                        std::to_string(t + 1));
                if (record_step_lambda) out.trace.step_lambda.push_back(lambda);

                detail::pta_gradients_into(lambda, eta, x, net, p.gain,
                                           hyper.eta_floor, grad_gain, grad_bias);
                pta_update(p, grad_gain, grad_bias, hyper);
                lambda_sum += lambda;
                ++lambda_count;
            }
        }
        const double mean_lambda = lambda_sum / static_cast<double>(lambda_count);
        out.trace.epoch_mean_lambda.push_back(mean_lambda);
        ++out.trace.epochs_run;
        if (epoch_hook) epoch_hook(out.trace.epochs_run, p, mean_lambda);
        if (out.trace.epochs_run >= hyper.max_epochs ||
            mean_lambda >= hyper.lambda_threshold)
            break;
    }
    return out;
}

/// Mean lambda of the gained map with frozen parameters over a series,
/// discarding a washout transient; used for held-out stability diagnostics.
inline double evaluate_lambda(const ReservoirWeights& w, const Eigen::VectorXd& gain,
                              const Eigen::VectorXd& bias,
                              const Eigen::MatrixXd& series, long washout,
                              double eta_floor = 1e-12) {
    detail::check_series(w, series, washout);
    const long n = w.n_units();
    require(gain.size() == n && bias.size() == n,
            "evaluate_lambda: gain/bias dimension mismatch");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd net(n);
    double sum = 0.0;
    long count = 0;
    for (long t = 0; t < series.cols(); ++t) {
        detail::apply_recurrent(w, x, net);
        net.noalias() += w.input * series.col(t);
        x = (gain.array() * net.array() + bias.array()).tanh().matrix();
        if (t < washout) continue;
        sum += local_lyapunov(eta_values(x, gain), eta_floor);
        ++count;
    }
    return sum / static_cast<double>(count);
}

inline double evaluate_lambda(const ReservoirWeights& w, const PtaParameters& p,
                              const Eigen::MatrixXd& series, long washout,
                              double eta_floor = 1e-12) {
    return evaluate_lambda(w, p.gain, p.bias, series, washout, eta_floor);
}

}  // namespace rescomp
