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

#ifndef SBO_SPSA_HPP
#define SBO_SPSA_HPP

#include "sbo/constraints.hpp"
#include "sbo/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

namespace sbo::spsa {

/// Decaying gain sequences a_i = a / (A + i)^alpha and c_i = c / (i + 1)^gamma.
struct SpsaGains {
    double a = 0.1;
    double big_a = 5.0;
    double alpha = 0.602;
    double c = 0.1;
    double gamma = 0.101;

    double a_i(std::size_t i) const;
    double c_i(std::size_t i) const;
    void validate() const;
};

/// Coordinates the iterates live in. With `normalize` the search runs on the
/// unit hypercube of the evaluator's bounds; otherwise in native units.
class SearchSpace {
public:
    SearchSpace(Bounds bounds, bool normalize);

    DecisionVector to_decision(const std::vector<double>& x) const;
    std::vector<double> from_decision(const DecisionVector& tau) const;
    /// Projection onto the search-space image of the bounds.
    std::vector<double> clamp(const std::vector<double>& x) const;
    std::size_t dimension() const { return bounds_.dimension(); }

private:
    Bounds bounds_;
    bool normalize_;
};

struct SpsaState {
    std::size_t iteration = 1;
    std::vector<double> x;  ///< iterate in search-space coordinates
    SpsaGains gains;
    double gradient_scale = 1.0;
};

/// Independent +-1 entries with probability one half each.
std::vector<double> perturbation(std::size_t m_dim, std::mt19937_64& rng);

struct GradientSample {
    std::vector<double> g_hat;
    double y_plus = 0.0;   ///< minimization axis, penalty included
    double y_minus = 0.0;
    bool clamped = false;  ///< a perturbed point had to be projected into the bounds
};

/// Two-sided simultaneous-perturbation gradient estimate; exactly two evaluations.
/// The denominator uses the nominal perturbation even when a point was clamped.
GradientSample approx_gradient(Evaluator& evaluator, const SearchSpace& space,
                               const std::vector<double>& x, double c_i,
                               const std::vector<double>& delta,
                               const std::optional<PenaltyHook>& penalty = std::nullopt);

/// x_{i+1} = clamp(x_i - a_i * gradient_scale * g_hat); advances the iteration counter.
SpsaState spsa_step(const SpsaState& state, const std::vector<double>& g_hat, const SearchSpace& space);

struct StopConfig {
    std::size_t max_iterations = 1000000;
    double g_tol = 0.0;       ///< max-norm threshold for a "little change" gradient
    std::size_t k_stall = 5;  ///< consecutive small gradients before stopping
};

struct SpsaConfig {
    SpsaGains gains;
    double gradient_scale = 1.0;
    DecisionVector tau0;  ///< empty selects the bounds midpoint
    bool normalize = true;
    StopConfig stop;
    std::optional<PenaltyHook> penalty;
    bool evaluate_final = false;
    std::uint64_t seed = 0;
};

struct SpsaLogRow {
    std::size_t iteration = 0;
    double a_i = 0.0;
    double c_i = 0.0;
    std::vector<double> delta;
    double y_plus = 0.0;
    double y_minus = 0.0;
    double g_norm = 0.0;  ///< max-norm of the gradient estimate
    bool boundary_bias = false;
    DecisionVector tau_next;
};

struct SpsaResult {
    Trace trace;
    DecisionVector final_tau;
    DecisionVector best_tau;      ///< best perturbed point on the penalized minimization axis
    double best_score = 0.0;
    std::size_t iterations = 0;
    std::vector<SpsaLogRow> log;
};

SpsaResult run_spsa(Evaluator& evaluator, const SpsaConfig& config);

/// i, a_i, c_i, delta_1..delta_m, y_plus, y_minus, g_norm, boundary_bias, tau_next_1..tau_next_m
void write_log_csv(std::ostream& out, const std::vector<SpsaLogRow>& log);

} // namespace sbo::spsa

#endif
