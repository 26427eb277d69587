/*
 * Copyright 2026 The sbo Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SBO_KRIGING_HPP
#define SBO_KRIGING_HPP

#include "sbo/core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sbo::kriging {

class FitError : public Error {
public:
    using Error::Error;
};

class InfillError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Design of experiments

struct LhsDesign {
    Eigen::MatrixXd points;  ///< n x m, rows are points in the unit hypercube
    std::uint64_t seed = 0;
    int n_candidates = 1;
};

/// One Latin hypercube draw; every column is a permutation of the stratum midpoints.
Eigen::MatrixXd random_lhs(Eigen::Index n, Eigen::Index m_dim, std::mt19937_64& rng);

/// Best of `n_candidates` random Latin hypercubes under the maximin distance
/// criterion. The first candidate is the plain draw for the same seed.
LhsDesign maximin_lhs(int n, int m_dim, std::uint64_t seed, int n_candidates = 100);

double min_pairwise_distance(const Eigen::MatrixXd& points);

// ---------------------------------------------------------------------------
// Regressing kriging model

/// exp(-sum_l theta_l (xi_l - xj_l)^2)
double gaussian_correlation(const Eigen::Ref<const Eigen::VectorXd>& xi,
                            const Eigen::Ref<const Eigen::VectorXd>& xj,
                            const Eigen::Ref<const Eigen::VectorXd>& theta);

struct HyperParams {
    Eigen::VectorXd theta;  ///< positive scaling coefficients, one per input
    double lambda = 0.0;    ///< regularization added to the correlation diagonal
};

/// Bounded multi-start search for the maximum-likelihood hyperparameters.
///
/// Each start runs a coordinate-wise pattern search in log10 space, halving
/// the step whenever a full sweep fails to improve.
struct FitConfig {
    int n_starts = 20;
    double log10_theta_min = -3.0;
    double log10_theta_max = 2.0;
    double log10_lambda_min = -12.0;
    double log10_lambda_max = 0.0;
    std::optional<double> fixed_lambda;
    double initial_step = 0.5;
    double min_step = 0.02;
    int max_evaluations_per_start = 400;
    std::uint64_t seed = 0;
    std::vector<HyperParams> warm_starts;  ///< tried first; they count toward n_starts
};

/// Concentrated log-likelihood -(n/2) ln(sigma2) - (1/2) ln|R|; -inf when R is not
/// numerically positive definite.
double concentrated_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const HyperParams& params);

struct Prediction {
    double y_hat = 0.0;
    double s2_hat = 0.0;
};

/// Fitted surrogate. Immutable once built, so it can be shared across threads.
class Model {
public:
    /// Chooses (theta, lambda) by maximum likelihood, then builds the model.
    static Model fit(Eigen::MatrixXd X, Eigen::VectorXd y, const FitConfig& config);

    /// Builds the model for the given hyperparameters. If R cannot be factorized,
    /// lambda is raised to 1e-10 once before giving up with FitError.
    static Model with_params(Eigen::MatrixXd X, Eigen::VectorXd y, HyperParams params);

    Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// Re-interpolation error: zero at every sample for any lambda.
    double reinterp_error(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    const Eigen::MatrixXd& X() const { return X_; }
    const Eigen::VectorXd& y() const { return y_; }
    const HyperParams& params() const { return params_; }
    Eigen::Index n() const { return X_.rows(); }
    Eigen::Index dim() const { return X_.cols(); }
    double mu_hat() const { return mu_hat_; }
    double sigma2_hat() const { return sigma2_hat_; }
    double sigma2_ri() const { return sigma2_ri_; }
    double log_likelihood() const { return log_likelihood_; }

    /// JSON with X, y, theta, lambda, mu_hat, sigma2_hat, sigma2_ri, log_likelihood.
    std::string dump_json() const;

private:
    Model() = default;

    Eigen::VectorXd correlations(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    HyperParams params_;
    double mu_hat_ = 0.0;
    double sigma2_hat_ = 0.0;
    double sigma2_ri_ = 0.0;
    double log_likelihood_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> r_factor_;   ///< regressing correlation matrix
    Eigen::LLT<Eigen::MatrixXd> ri_factor_;  ///< plain correlation matrix (tiny nugget)
    Eigen::VectorXd weights_;                ///< R^-1 (y - 1 mu)
};

// ---------------------------------------------------------------------------
// Infill

/// Closed-form expected improvement for a normal prediction; 0 when s2 <= 0.
double expected_improvement(double y_hat, double s2, double y_min);

/// EI at x_star using the predictor error (use_reinterp=false) or the
/// re-interpolation error (use_reinterp=true).
double expected_improvement(const Model& model, const Eigen::Ref<const Eigen::VectorXd>& x_star,
                            double y_min, bool use_reinterp);

struct EIProposal {
    DecisionVector point;  ///< in decision-space coordinates
    double ei_value = 0.0;
};

struct InfillConfig {
    int n_candidates = 4000;
    int n_local = 8;
    int local_evaluations = 300;
    double initial_step = 0.1;
    double min_step = 1e-4;
    int max_restarts = 5;
    bool use_reinterp = true;
    std::uint64_t seed = 0;
};

/// Maximizes EI over the feasible part of the unit hypercube. `bounds` maps the
/// model's unit-cube inputs to decision space, where `region` is tested.
EIProposal propose_infill(const Model& model, double y_min, const FeasibleRegion& region,
                          const Bounds& bounds, const InfillConfig& config);

// ---------------------------------------------------------------------------
// Validation

struct LooEntry {
    double observed = 0.0;
    double prediction = 0.0;
    double std_error = 0.0;
    double residual = 0.0;  ///< (observed - prediction) / std_error
    bool degenerate = false;  ///< std_error was floored
    bool outside = false;     ///< residual outside [-3, 3]
};

/// Leave-one-out refits with the hyperparameters frozen at the full fit.
std::vector<LooEntry> loo_cv(const Model& model);

// ---------------------------------------------------------------------------
// Driver

struct RkConfig {
    std::size_t n_init = 0;  ///< 0 selects max(m + 1, 11)
    int lhs_candidates = 100;
    FitConfig fit;
    int refit_starts = 3;  ///< random starts added to the warm start on later fits
    InfillConfig infill;
    bool final_diagnostics = true;
};

struct RkResult {
    Trace trace;
    std::vector<double> ei_history;  ///< EI of each accepted infill proposal
    std::vector<DecisionVector> infill_points;
    std::optional<Model> final_model;  ///< fitted to all evaluated points (unit-cube inputs)
    std::vector<LooEntry> loo;
};

/// Maximin LHS design followed by fit / propose / evaluate until the budget runs out.
/// `region` may be null for an unconstrained problem.
RkResult run_rk(Evaluator& evaluator, const RkConfig& config, const FeasibleRegion* region,
                std::uint64_t seed);

} // namespace sbo::kriging

#endif
