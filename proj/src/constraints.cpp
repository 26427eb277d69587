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

#include "sbo/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sbo {

void SmoothingSpec::validate() const
{
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("smoothing limits must be positive");
    if (m_intervals == 0) throw ConfigError("smoothing spec needs at least one interval");
}

void PenaltyConfig::validate() const
{
    if (!(weight > 0.0)) throw ConfigError("penalty weight must be positive");
    if (exponent != 1 && exponent != 2) throw ConfigError("penalty exponent must be 1 or 2");
}

std::vector<double> violations(std::span<const double> tau, const SmoothingSpec& spec)
{
    check_dimension(spec.dimension(), tau.size(), "violations");
    const std::size_t m = spec.m_intervals;
    std::vector<double> v;
    v.reserve(spec.delay_rates ? 2 * (m - 1) : m - 1);
    for (std::size_t h = 0; h + 1 < m; ++h)
        v.push_back(std::max(0.0, std::abs(tau[h] - tau[h + 1]) - spec.alpha));
    if (spec.delay_rates) {
        for (std::size_t h = 0; h + 1 < m; ++h)
            v.push_back(std::max(0.0, std::abs(tau[m + h] - tau[m + h + 1]) - spec.beta));
    }
    return v;
}

static double penalty_term(std::span<const double> tau, const SmoothingSpec& spec,
                           const PenaltyConfig& config)
{
    double sum = 0.0;
    for (double v : violations(tau, spec)) sum += config.exponent == 2 ? v * v : v;
    return config.weight * sum;
}

double penalize(double value, std::span<const double> tau, const SmoothingSpec& spec,
                const PenaltyConfig& config, Sense sense)
{
    const double p = penalty_term(tau, spec, config);
    if (p == 0.0) return value;
    return sense == Sense::minimize ? value + p : value - p;
}

bool is_feasible(std::span<const double> tau, const SmoothingSpec& spec, double tol)
{
    const auto v = violations(tau, spec);
    return std::all_of(v.begin(), v.end(), [tol](double x) { return x <= tol; });
}

DecisionVector repair(std::span<const double> tau, const SmoothingSpec& spec, const Bounds& bounds)
{
    check_dimension(spec.dimension(), tau.size(), "repair");
    DecisionVector out = clamp(tau, bounds);
    const std::size_t m = spec.m_intervals;
    auto sweep = [&](std::size_t offset, double limit) {
        for (std::size_t h = 1; h < m; ++h) {
            const std::size_t i = offset + h;
            const double lo = std::max(bounds.lower()[i], out[i - 1] - limit);
            const double hi = std::min(bounds.upper()[i], out[i - 1] + limit);
            if (lo <= hi) out[i] = std::clamp(out[i], lo, hi);
        }
    };
    sweep(0, spec.alpha);
    if (spec.delay_rates) sweep(m, spec.beta);
    return out;
}

double calibrate_penalty_weight(std::span<const double> probe_values, double multiple)
{
    if (probe_values.empty()) throw ConfigError("penalty calibration needs probe values");
    double sum = 0.0;
    for (double v : probe_values) sum += std::abs(v);
    const double typical = sum / static_cast<double>(probe_values.size());
    return multiple * std::max(typical, 1e-12);
}

double PenaltyHook::cost(std::span<const double> tau) const
{
    return penalize(0.0, tau, spec, config, Sense::minimize);
}

FeasibleRegion smoothing_region(const SmoothingSpec& spec, const Bounds& bounds, double tol)
{
    FeasibleRegion region;
    region.contains = [spec, tol](const DecisionVector& tau) { return is_feasible(tau, spec, tol); };
    region.repair = [spec, bounds](const DecisionVector& tau) { return repair(tau, spec, bounds); };
    return region;
}

} // namespace sbo
