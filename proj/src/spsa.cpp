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

#include "sbo/spsa.hpp"
#include "sbo/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace sbo::spsa {

double SpsaGains::a_i(std::size_t i) const
{
    return a / std::pow(big_a + static_cast<double>(i), alpha);
}

double SpsaGains::c_i(std::size_t i) const
{
    return c / std::pow(static_cast<double>(i) + 1.0, gamma);
}

void SpsaGains::validate() const
{
    if (!(a > 0.0) || !(c > 0.0)) throw ConfigError("SPSA gains a and c must be positive");
    if (!(big_a >= 0.0)) throw ConfigError("SPSA stability constant A must be non-negative");
    if (!(alpha >= 0.0) || !(gamma >= 0.0)) throw ConfigError("SPSA exponents must be non-negative");
}

SearchSpace::SearchSpace(Bounds bounds, bool normalize) : bounds_(std::move(bounds)), normalize_(normalize) {}

DecisionVector SearchSpace::to_decision(const std::vector<double>& x) const
{
    return normalize_ ? bounds_.from_unit(x) : DecisionVector(x);
}

std::vector<double> SearchSpace::from_decision(const DecisionVector& tau) const
{
    return normalize_ ? bounds_.to_unit(tau) : std::vector<double>(tau);
}

std::vector<double> SearchSpace::clamp(const std::vector<double>& x) const
{
    check_dimension(dimension(), x.size(), "SPSA clamp");
    std::vector<double> out = x;
    for (std::size_t l = 0; l < out.size(); ++l) {
        const double lo = normalize_ ? 0.0 : bounds_.lower()[l];
        const double hi = normalize_ ? 1.0 : bounds_.upper()[l];
        out[l] = std::clamp(out[l], lo, hi);
    }
    return out;
}

std::vector<double> perturbation(std::size_t m_dim, std::mt19937_64& rng)
{
    std::vector<double> delta(m_dim);
    for (double& d : delta) d = (rng() >> 63) ? 1.0 : -1.0;
    return delta;
}

GradientSample approx_gradient(Evaluator& evaluator, const SearchSpace& space,
                               const std::vector<double>& x, double c_i,
                               const std::vector<double>& delta,
                               const std::optional<PenaltyHook>& penalty)
{
    if (!(c_i > 0.0)) throw ConfigError("approx_gradient: c_i must be positive");
    check_dimension(space.dimension(), x.size(), "approx_gradient");
    check_dimension(space.dimension(), delta.size(), "approx_gradient perturbation");
    if (evaluator.remaining() < 2) throw BudgetExhausted("approx_gradient needs two evaluations");

    GradientSample sample;
    auto evaluate_side = [&](double sign) {
        std::vector<double> xp(x.size());
        for (std::size_t l = 0; l < x.size(); ++l) xp[l] = x[l] + sign * c_i * delta[l];
        const std::vector<double> xc = space.clamp(xp);
        if (xc != xp) sample.clamped = true;
        const DecisionVector tau = space.to_decision(xc);
        double y = to_minimization(evaluator.sense(), evaluator.evaluate(tau).value);
        if (penalty) y += penalty->cost(evaluator.trace().records().back().tau);
        return y;
    };
    sample.y_plus = evaluate_side(1.0);
    sample.y_minus = evaluate_side(-1.0);
    sample.g_hat.resize(x.size());
    const double diff = sample.y_plus - sample.y_minus;
    for (std::size_t l = 0; l < x.size(); ++l) sample.g_hat[l] = diff / (2.0 * c_i * delta[l]);
    return sample;
}

SpsaState spsa_step(const SpsaState& state, const std::vector<double>& g_hat, const SearchSpace& space)
{
    check_dimension(state.x.size(), g_hat.size(), "spsa_step");
    for (double g : g_hat)
        if (!std::isfinite(g)) throw EvaluationError("spsa_step: non-finite gradient estimate");
    // Scale folded into the gain numerator so (a, s) and (a * s, 1) agree bit for bit.
    const double step = (state.gains.a * state.gradient_scale) /
                        std::pow(state.gains.big_a + static_cast<double>(state.iteration), state.gains.alpha);
    SpsaState next = state;
    for (std::size_t l = 0; l < next.x.size(); ++l) next.x[l] -= step * g_hat[l];
    next.x = space.clamp(next.x);
    ++next.iteration;
    return next;
}

SpsaResult run_spsa(Evaluator& evaluator, const SpsaConfig& config)
{
    config.gains.validate();
    if (evaluator.remaining() < 2) throw ConfigError("run_spsa: need a budget of at least 2");
    if (!(config.gradient_scale > 0.0)) throw ConfigError("run_spsa: gradient_scale must be positive");
    if (config.penalty) {
        config.penalty->config.validate();
        check_dimension(config.penalty->spec.dimension(), evaluator.bounds().dimension(), "run_spsa penalty");
    }

    const SearchSpace space(evaluator.bounds(), config.normalize);
    const DecisionVector tau0 = config.tau0.empty() ? evaluator.bounds().midpoint() : config.tau0;
    check_dimension(space.dimension(), tau0.size(), "run_spsa tau0");

    SpsaState state;
    state.iteration = 1;
    state.x = space.clamp(space.from_decision(tau0));
    state.gains = config.gains;
    state.gradient_scale = config.gradient_scale;

    std::mt19937_64 rng(config.seed);
    SpsaResult result;
    result.best_score = std::numeric_limits<double>::infinity();
    std::size_t stall = 0;

    auto track_best = [&](double score, std::size_t back) {
        const auto& recs = evaluator.trace().records();
        if (score < result.best_score) {
            result.best_score = score;
            result.best_tau = recs[recs.size() - back].tau;
        }
    };

    while (evaluator.remaining() >= 2 && state.iteration <= config.stop.max_iterations) {
        const std::vector<double> delta = perturbation(space.dimension(), rng);
        const double c_i = config.gains.c_i(state.iteration);
        const GradientSample g = approx_gradient(evaluator, space, state.x, c_i, delta, config.penalty);
        // Earlier record first so ties go to the earliest evaluation.
        track_best(g.y_plus, 2);
        track_best(g.y_minus, 1);

        SpsaLogRow row;
        row.iteration = state.iteration;
        row.a_i = config.gains.a_i(state.iteration);
        row.c_i = c_i;
        row.delta = delta;
        row.y_plus = g.y_plus;
        row.y_minus = g.y_minus;
        row.boundary_bias = g.clamped;
        for (double v : g.g_hat) row.g_norm = std::max(row.g_norm, std::abs(v));

        state = spsa_step(state, g.g_hat, space);
        row.tau_next = space.to_decision(state.x);
        result.log.push_back(std::move(row));
        ++result.iterations;

        if (config.stop.g_tol > 0.0) {
            stall = result.log.back().g_norm < config.stop.g_tol ? stall + 1 : 0;
            if (stall >= config.stop.k_stall) break;
        }
    }
    result.final_tau = space.to_decision(state.x);
    if (config.evaluate_final && !evaluator.exhausted()) evaluator.evaluate(result.final_tau);
    result.trace = evaluator.trace();
    return result;
}

void write_log_csv(std::ostream& out, const std::vector<SpsaLogRow>& log)
{
    const std::size_t m = log.empty() ? 0 : log.front().delta.size();
    out << "i,a_i,c_i";
    for (std::size_t l = 0; l < m; ++l) out << ",delta_" << (l + 1);
    out << ",y_plus,y_minus,g_norm,boundary_bias";
    for (std::size_t l = 0; l < m; ++l) out << ",tau_next_" << (l + 1);
    out << '\n';
    for (const auto& r : log) {
        out << r.iteration << ',' << io::format_number(r.a_i) << ',' << io::format_number(r.c_i);
        for (double d : r.delta) out << ',' << d;
        out << ',' << io::format_number(r.y_plus) << ',' << io::format_number(r.y_minus) << ','
            << io::format_number(r.g_norm) << ',' << (r.boundary_bias ? 1 : 0);
        for (double t : r.tau_next) out << ',' << io::format_number(t);
        out << '\n';
    }
}

} // namespace sbo::spsa
