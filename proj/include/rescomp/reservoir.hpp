#pragma once

// Reservoir construction and state updates for dense and ring topologies:
// the standard state map x(t) = tanh(W_rec x(t-1) + W_in u(t) + b) and the
// gained map x(t) = tanh(a .* (W_rec x(t-1) + W_in u(t)) + b) used by the
// phase-transition trainer. Ring reservoirs are stepped in O(N) without
// touching the materialized recurrent matrix.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

#include "rescomp/common.hpp"
#include "rescomp/rng.hpp"

namespace rescomp {

enum class Topology { dense, ring };

struct ReservoirConfig {
    long n_units = 100;            // N
    long input_dim = 1;            // U
    double spectral_radius = 0.5;  // rho; also the gain init under PTA
    double input_scaling = 0.1;    // omega
    double bias_scaling = 0.0;     // omega_b
    Topology topology = Topology::ring;
    double ring_weight = 1.0;      // shared ring weight, fixed to 1 under PTA
    std::uint64_t seed = 0;
};

inline void validate(const ReservoirConfig& c) {
    require(c.n_units >= 1, "reservoir: n_units must be positive");
    require(c.topology != Topology::ring || c.n_units >= 2,
            "reservoir: ring topology requires n_units >= 2");
    require(c.input_dim >= 1, "reservoir: input_dim must be positive");
    require(c.spectral_radius > 0.0, "reservoir: spectral_radius must be > 0");
    require(c.input_scaling >= 0.0, "reservoir: input_scaling must be >= 0");
    require(c.bias_scaling >= 0.0, "reservoir: bias_scaling must be >= 0");
}

struct ReservoirWeights {
    Topology topology = Topology::dense;
    double ring_weight = 0.0;   // meaningful for ring topology only
    Eigen::MatrixXd recurrent;  // N x N
    Eigen::MatrixXd input;      // N x U
    Eigen::VectorXd bias;       // N

    long n_units() const { return recurrent.rows(); }
    long input_dim() const { return input.cols(); }
};

class SpectralRadiusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest eigenvalue modulus of a square matrix, estimated by block power
/// iteration (subspace iteration) with a 4-column block, so that complex
/// dominant pairs converge too. Tolerance 1e-10, at most 10000 matrix-vector
/// products, randomized block restart on stagnation. Throws
/// SpectralRadiusError when the iteration budget is exhausted. Full
/// eigendecomposition is deliberately left to the test oracles.
inline double spectral_radius(const Eigen::MatrixXd& m, std::uint64_t seed = 0) {
    using Eigen::MatrixXd;
    require(m.rows() == m.cols(), "spectral_radius: matrix must be square");
    require(m.allFinite(), "spectral_radius: matrix entries must be finite");

    const long n = m.rows();
    if (n == 0) return 0.0;
    if (n == 1) return std::abs(m(0, 0));

    constexpr double tol = 1e-10;
    constexpr long max_iterations = 10000;  // block applications of the matrix
    const long block = std::min<long>(4, n);

    Rng rng(derive_seed(seed, 0x5eedbeefULL));
    auto random_block = [&] {
        MatrixXd v(n, block);
        for (long c = 0; c < block; ++c)
            for (long r = 0; r < n; ++r) v(r, c) = rng.uniform(-1.0, 1.0);
        Eigen::HouseholderQR<MatrixXd> qr(v);
        return MatrixXd(qr.householderQ() * MatrixXd::Identity(n, block));
    };

    MatrixXd q = random_block();
    MatrixXd z(n, block), h(block, block);
    double prev = -1.0;
    int streak = 0;
    long next_restart = 6000;

    for (long iteration = 0; iteration < max_iterations; ++iteration) {
        z.noalias() = m * q;
        if (!(z.norm() > 0.0)) return 0.0;  // the block is annihilated

        h.noalias() = q.transpose() * z;  // Ritz projection, no extra products
        const Eigen::EigenSolver<MatrixXd> ritz(h, false);
        const double rho_est = ritz.eigenvalues().cwiseAbs().maxCoeff();

        if (std::abs(rho_est - prev) <= tol * std::max(rho_est, 1e-300)) {
            if (++streak >= 3) return rho_est;
        } else {
            streak = 0;
        }
        prev = rho_est;

        Eigen::HouseholderQR<MatrixXd> qr(z);
        q = qr.householderQ() * MatrixXd::Identity(n, block);
        if (iteration >= next_restart && streak == 0) {
            q = random_block();  // randomized restart on stagnation
            next_restart += 2000;
            prev = -1.0;
        }
    }
    throw SpectralRadiusError(
        "spectral_radius: no convergence within 10000 block iterations");
}

namespace detail {

inline void fill_uniform(Eigen::Ref<Eigen::MatrixXd> m, Rng& rng, double scale) {
    for (long c = 0; c < m.cols(); ++c)
        for (long r = 0; r < m.rows(); ++r) m(r, c) = scale * rng.uniform(-1.0, 1.0);
}

// Input matrix and bias are drawn the same way for every topology; the
// draw order (recurrent, input, bias) is part of the reproducibility
// contract of this implementation.
inline void init_input_and_bias(const ReservoirConfig& c, Rng& rng,
                                ReservoirWeights& w) {
    w.input.resize(c.n_units, c.input_dim);
    w.bias.resize(c.n_units);
    fill_uniform(w.input, rng, c.input_scaling);
    fill_uniform(w.bias, rng, c.bias_scaling);
}

}  // namespace detail

/// Fully connected reservoir: entries uniform on [-1,1], then rescaled so the
/// spectral radius matches config.spectral_radius.
inline ReservoirWeights init_dense(const ReservoirConfig& c, Rng& rng) {
    validate(c);
    require(c.topology == Topology::dense, "init_dense: topology must be dense");
    ReservoirWeights w;
    w.topology = Topology::dense;
    w.recurrent.resize(c.n_units, c.n_units);
    detail::fill_uniform(w.recurrent, rng, 1.0);
    const double rho_hat = spectral_radius(w.recurrent, derive_seed(c.seed, 0x5ca1eULL));
    if (!(rho_hat > 0.0))
        throw SpectralRadiusError("init_dense: drawn matrix has zero spectral radius");
    w.recurrent *= c.spectral_radius / rho_hat;
    detail::init_input_and_bias(c, rng, w);
    return w;
}

/// Ring reservoir: nonzeros only on the sub-diagonal and the top-right
/// corner, all equal to config.ring_weight, so the spectral radius equals
/// |ring_weight| by construction.
inline ReservoirWeights init_ring(const ReservoirConfig& c, Rng& rng) {
    validate(c);
    require(c.topology == Topology::ring, "init_ring: topology must be ring");
    ReservoirWeights w;
    w.topology = Topology::ring;
    w.ring_weight = c.ring_weight;
    w.recurrent = Eigen::MatrixXd::Zero(c.n_units, c.n_units);
    w.recurrent(0, c.n_units - 1) = c.ring_weight;
    for (long i = 1; i < c.n_units; ++i) w.recurrent(i, i - 1) = c.ring_weight;
    detail::init_input_and_bias(c, rng, w);
    return w;
}

/// Builds whichever topology the config selects, seeding from config.seed.
inline ReservoirWeights make_reservoir(const ReservoirConfig& c) {
    Rng rng(c.seed);
    return c.topology == Topology::dense ? init_dense(c, rng) : init_ring(c, rng);
}

namespace detail {

// net = W_rec * x, using the O(N) cyclic shift for ring topology.
inline void apply_recurrent(const ReservoirWeights& w,
                            const Eigen::VectorXd& x, Eigen::VectorXd& net) {
    const long n = w.n_units();
    if (w.topology == Topology::ring) {
        net.resize(n);
        net[0] = w.ring_weight * x[n - 1];
        net.tail(n - 1) = w.ring_weight * x.head(n - 1);
    } else {
        net.noalias() = w.recurrent * x;
    }
}

inline void check_step_dims(const ReservoirWeights& w, const Eigen::VectorXd& x,
                            const Eigen::Ref<const Eigen::VectorXd>& u) {
    require(x.size() == w.n_units(), "step: state dimension mismatch");
    require(u.size() == w.input_dim(), "step: input dimension mismatch");
}

}  // namespace detail

/// One step of the standard map: x' = tanh(W_rec x + W_in u + b).
inline Eigen::VectorXd step_standard(const ReservoirWeights& w,
                                     const Eigen::VectorXd& x,
                                     const Eigen::Ref<const Eigen::VectorXd>& u) {
    detail::check_step_dims(w, x, u);
    Eigen::VectorXd net;
    detail::apply_recurrent(w, x, net);
    net.noalias() += w.input * u;
    net += w.bias;
    return net.array().tanh().matrix();
}

struct GainedStep {
    Eigen::VectorXd state;
    Eigen::VectorXd net;  // W_rec x + W_in u, before gain and bias
};

/// One step of the gained map: net = W_rec x + W_in u, x' = tanh(a.*net + b).
/// Returns both the new state and the pre-activation net vector.
inline GainedStep step_gained(const ReservoirWeights& w,
                              const Eigen::VectorXd& gain,
                              const Eigen::VectorXd& bias,
                              const Eigen::VectorXd& x,
                              const Eigen::Ref<const Eigen::VectorXd>& u) {
    detail::check_step_dims(w, x, u);
    require(gain.size() == w.n_units() && bias.size() == w.n_units(),
            "step_gained: gain/bias dimension mismatch");
    GainedStep out;
    detail::apply_recurrent(w, x, out.net);
    out.net.noalias() += w.input * u;
    out.state = (gain.array() * out.net.array() + bias.array()).tanh().matrix();
    return out;
}

namespace detail {

inline void check_series(const ReservoirWeights& w, const Eigen::MatrixXd& series,
                         long washout) {
    require(series.rows() == w.input_dim(), "collect_states: input dimension mismatch");
    require(washout >= 0 && series.cols() > washout,
            "collect_states: series length must exceed washout");
}

}  // namespace detail

/// Runs the standard map from x(0) = 0 over the whole series and returns the
/// post-washout states, one column per time step.
inline Eigen::MatrixXd collect_states(const ReservoirWeights& w,
                                      const Eigen::MatrixXd& series, long washout) {
    detail::check_series(w, series, washout);
    const long n = w.n_units();
    const long t_len = series.cols();
    Eigen::MatrixXd states(n, t_len - washout);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd net(n);
    for (long t = 0; t < t_len; ++t) {
        detail::apply_recurrent(w, x, net);
        net.noalias() += w.input * series.col(t);
        net += w.bias;
        x = net.array().tanh().matrix();
        if (t >= washout) states.col(t - washout) = x;
    }
    return states;
}

/// Gained-map variant of collect_states with fixed gain and bias vectors.
inline Eigen::MatrixXd collect_states(const ReservoirWeights& w,
                                      const Eigen::VectorXd& gain,
                                      const Eigen::VectorXd& bias,
                                      const Eigen::MatrixXd& series, long washout) {
    detail::check_series(w, series, washout);
    const long n = w.n_units();
    require(gain.size() == n && bias.size() == n,
            "collect_states: gain/bias dimension mismatch");
    const long t_len = series.cols();
    Eigen::MatrixXd states(n, t_len - washout);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd net(n);
    for (long t = 0; t < t_len; ++t) {
        detail::apply_recurrent(w, x, net);
        net.noalias() += w.input * series.col(t);
        x = (gain.array() * net.array() + bias.array()).tanh().matrix();
        if (t >= washout) states.col(t - washout) = x;
    }
    return states;
}

}  // namespace rescomp
