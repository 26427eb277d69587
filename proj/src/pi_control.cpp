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

#include "sbo/pi_control.hpp"
#include "sbo/io.hpp"

#include <cmath>
#include <ostream>

namespace sbo::pi {

void PIConfig::validate() const
{
    if (!(p_p > 0.0) || !(p_i > 0.0)) throw ConfigError("PI gains must be positive");
    if (n_max < 1) throw ConfigError("PI controller needs n_max >= 1");
    if (m_intervals < 1) throw ConfigError("PI controller needs at least one interval");
    if (!std::isfinite(k_cr)) throw ConfigError("PI set point must be finite");
}

static void check_densities(const PIConfig& config, std::span<const double> k_bar, const Bounds& bounds)
{
    check_dimension(config.m_intervals, k_bar.size(), "PI densities");
    check_dimension(config.m_intervals, bounds.dimension(), "PI bounds");
    for (double k : k_bar)
        if (!std::isfinite(k)) throw EvaluationError("PI controller: non-finite density");
}

DecisionVector pi_init(const PIConfig& config, std::span<const double> k_bar_1, const Bounds& bounds)
{
    config.validate();
    check_densities(config, k_bar_1, bounds);
    DecisionVector tau(config.m_intervals);
    for (std::size_t h = 0; h < tau.size(); ++h) tau[h] = config.p_i * (k_bar_1[h] - config.k_cr);
    return clamp(tau, bounds);
}

DecisionVector pi_step(PIState& state, const PIConfig& config, std::span<const double> k_bar_i,
                       const Bounds& bounds)
{
    check_densities(config, k_bar_i, bounds);
    check_dimension(config.m_intervals, state.tau_current.size(), "PI state tolls");
    check_dimension(config.m_intervals, state.k_bar_prev.size(), "PI state densities");
    DecisionVector tau(config.m_intervals);
    for (std::size_t h = 0; h < tau.size(); ++h) {
        tau[h] = state.tau_current[h] + config.p_p * (k_bar_i[h] - state.k_bar_prev[h]) +
                 config.p_i * (k_bar_i[h] - config.k_cr);
    }
    tau = clamp(tau, bounds);
    state.tau_current = tau;
    state.k_bar_prev.assign(k_bar_i.begin(), k_bar_i.end());
    ++state.iteration;
    return tau;
}

PIResult run_pi(Evaluator& evaluator, const PIConfig& config)
{
    config.validate();
    const Bounds& bounds = evaluator.bounds();
    check_dimension(config.m_intervals, bounds.dimension(), "run_pi");

    PIResult result;
    auto densities = [](const Evaluation& e) -> const std::vector<double>& {
        if (!e.aux || e.aux->k_bar.empty())
            throw EvaluationError("run_pi: objective does not report per-interval densities");
        return e.aux->k_bar;
    };
    auto log = [&](std::size_t iteration, const Evaluation& e) {
        result.log.push_back({iteration, evaluator.trace().records().back().tau, densities(e), e.value});
    };

    // Step 1: non-tolling run.
    const DecisionVector no_toll = clamp(DecisionVector(config.m_intervals, 0.0), bounds);
    const Evaluation baseline = evaluator.evaluate(no_toll);
    log(0, baseline);

    // Step 2.
    PIState state;
    state.iteration = 1;
    state.tau_current = pi_init(config, densities(baseline), bounds);
    state.k_bar_prev = densities(baseline);

    // Steps 3-4.
    while (!evaluator.exhausted()) {
        const Evaluation e = evaluator.evaluate(state.tau_current);
        log(state.iteration, e);
        if (state.iteration + 1 > config.n_max) break;
        pi_step(state, config, densities(e), bounds);
    }
    result.trace = evaluator.trace();
    return result;
}

void write_log_csv(std::ostream& out, const std::vector<PILogRow>& log)
{
    const std::size_t m = log.empty() ? 0 : log.front().tau.size();
    out << "iteration";
    for (std::size_t h = 0; h < m; ++h) out << ",tau_" << (h + 1);
    for (std::size_t h = 0; h < m; ++h) out << ",K_bar_" << (h + 1);
    out << ",value\n";
    for (const auto& row : log) {
        out << row.iteration;
        for (double t : row.tau) out << ',' << io::format_number(t);
        for (double k : row.k_bar) out << ',' << io::format_number(k);
        out << ',' << io::format_number(row.value) << '\n';
    }
}

} // namespace sbo::pi
