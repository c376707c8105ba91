#pragma once

// Linear readout trained in closed form by ridge regression,
// V = Y X^T (X X^T + kappa I)^-1, solved through a Cholesky factorization of
// the symmetric system instead of an explicit inverse, plus the evaluation
// metrics: NMSE (MSE / population variance of the target), squared Pearson
// correlation, and the memory-capacity score.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rescomp/common.hpp"

namespace rescomp {

struct RidgeReadout {
    Eigen::MatrixXd output_map;  // Y x N
    double regularization = 0.0; // kappa
};

/// Fits V = targets * states^T * (states * states^T + kappa I)^-1.
/// Throws std::runtime_error when the system is not positive definite
/// (singular states with kappa = 0).
inline RidgeReadout fit_ridge(const Eigen::Ref<const Eigen::MatrixXd>& states,
                              const Eigen::Ref<const Eigen::MatrixXd>& targets,
                              double kappa) {
    require(kappa >= 0.0, "fit_ridge: kappa must be >= 0");
    require(states.cols() >= 1, "fit_ridge: need at least one sample");
    require(targets.cols() == states.cols(), "fit_ridge: sample count mismatch");

    const long n = states.rows();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(states);
    gram.diagonal().array() += kappa;

    Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error(
            "fit_ridge: states*states^T + kappa*I is not positive definite; "
            "use a positive kappa");
    Eigen::MatrixXd vt = llt.solve(states * targets.transpose());
    return {vt.transpose(), kappa};
}

/// y(t) = V x(t), identity readout nonlinearity.
inline Eigen::MatrixXd predict(const RidgeReadout& readout,
                               const Eigen::Ref<const Eigen::MatrixXd>& states) {
    require(states.rows() == readout.output_map.cols(),
            "predict: state dimension mismatch");
    return readout.output_map * states;
}

/// Mean squared error normalized by the population variance of the target.
/// Throws std::domain_error for a constant target (undefined metric).
inline double nmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
    require(pred.size() == target.size(), "nmse: length mismatch");
    require(pred.size() >= 2, "nmse: need at least two samples");
    const double mean = target.mean();
    const double var = (target.array() - mean).square().mean();
    if (!(var > 0.0)) throw std::domain_error("nmse: target variance is zero");
    const double mse = (pred - target).array().square().mean();
    return mse / var;
}

/// Squared Pearson correlation, defined as 0 when either sequence has zero
/// variance; clamped into [0, 1] against roundoff.
inline double squared_correlation(const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b) {
    require(a.size() == b.size(), "squared_correlation: length mismatch");
    require(a.size() >= 2, "squared_correlation: need at least two samples");
    const double ma = a.mean();
    const double mb = b.mean();
    const Eigen::ArrayXd da = a.array() - ma;
    const Eigen::ArrayXd db = b.array() - mb;
    const double va = da.square().sum();
    const double vb = db.square().sum();
    if (va == 0.0 || vb == 0.0) return 0.0;
    const double cov = (da * db).sum();
    const double r2 = (cov * cov) / (va * vb);
    return std::clamp(r2, 0.0, 1.0);
}

/// Memory-capacity score: sum over delay channels of the squared correlation
/// between the delayed input (row k of delayed_inputs) and its reconstruction
/// (row k of preds).
inline double mc_score(const Eigen::Ref<const Eigen::MatrixXd>& preds,
                       const Eigen::Ref<const Eigen::MatrixXd>& delayed_inputs) {
    require(preds.rows() == delayed_inputs.rows() &&
                preds.cols() == delayed_inputs.cols(),
            "mc_score: prediction/target shape mismatch");
    double sum = 0.0;
    for (long k = 0; k < preds.rows(); ++k)
        sum += squared_correlation(preds.row(k).transpose(),
                                   delayed_inputs.row(k).transpose());
    return sum;
}

}  // namespace rescomp
