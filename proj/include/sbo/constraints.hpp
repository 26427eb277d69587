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

#ifndef SBO_CONSTRAINTS_HPP
#define SBO_CONSTRAINTS_HPP

#include "sbo/core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sbo {

/// Limits on toll-rate jumps between successive tolling intervals.
///
/// Decision vectors are laid out as [eta_1..eta_m, omega_1..omega_m] when
/// `delay_rates` is set, or [eta_1..eta_m] for distance-only tolling.
struct SmoothingSpec {
    double alpha = 0.33;  ///< max distance-rate jump ($/km)
    double beta = 5.0;         ///< max delay-rate jump ($/h)
    std::size_t m_intervals = 1;
    bool delay_rates = true;

    std::size_t dimension() const { return delay_rates ? 2 * m_intervals : m_intervals; }
    void validate() const;
};

struct PenaltyConfig {
    double weight = 1.0;
    int exponent = 2;  ///< 1 or 2

    void validate() const;
};

/// Non-negative excess of each successive jump over its limit: the m-1
/// distance-rate entries first, then the m-1 delay-rate entries.
std::vector<double> violations(std::span<const double> tau, const SmoothingSpec& spec);

/// Exterior penalty: adds (minimize) or subtracts (maximize) weight * sum(v^exponent).
double penalize(double value, std::span<const double> tau, const SmoothingSpec& spec,
                const PenaltyConfig& config, Sense sense);

bool is_feasible(std::span<const double> tau, const SmoothingSpec& spec, double tol);

/// Forward sweep that limits each jump to the allowed range, staying inside `bounds`.
/// The result is always feasible when the bounds allow it.
DecisionVector repair(std::span<const double> tau, const SmoothingSpec& spec, const Bounds& bounds);

/// Penalty weight as a multiple of the objective's typical magnitude.
double calibrate_penalty_weight(std::span<const double> probe_values, double multiple = 100.0);

/// Penalty settings a solver applies to its own view of the objective.
struct PenaltyHook {
    SmoothingSpec spec;
    PenaltyConfig config;

    /// Penalty on the minimization axis, independent of the objective's sense.
    double cost(std::span<const double> tau) const;
};

FeasibleRegion smoothing_region(const SmoothingSpec& spec, const Bounds& bounds, double tol = 1e-9);

} // namespace sbo

#endif
