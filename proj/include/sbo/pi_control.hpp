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

#ifndef SBO_PI_CONTROL_HPP
#define SBO_PI_CONTROL_HPP

#include "sbo/core.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace sbo::pi {

struct PIConfig {
    double p_p = 0.02;    ///< proportional gain
    double p_i = 0.005;   ///< integral gain
    double k_cr = 15.0;   ///< critical density set point (vpkmpl)
    std::size_t n_max = 50;
    std::size_t m_intervals = 2;

    void validate() const;
};

struct PIState {
    std::size_t iteration = 1;
    DecisionVector tau_current;        ///< clamped tolls of the latest iteration
    std::vector<double> k_bar_prev;    ///< densities measured one iteration earlier
};

/// First tolls from the non-tolling densities, projected into the bounds.
DecisionVector pi_init(const PIConfig& config, std::span<const double> k_bar_1, const Bounds& bounds);

/// One controller update per tolling interval. The stored tolls are the
/// clamped ones, so the integral term cannot wind up past the bounds.
DecisionVector pi_step(PIState& state, const PIConfig& config, std::span<const double> k_bar_i,
                       const Bounds& bounds);

struct PILogRow {
    std::size_t iteration = 0;
    DecisionVector tau;
    std::vector<double> k_bar;
    double value = 0.0;
};

struct PIResult {
    Trace trace;
    std::vector<PILogRow> log;
};

/// Non-tolling run, then alternate controller update and simulation until
/// n_max controller iterations (or the budget) are used up.
PIResult run_pi(Evaluator& evaluator, const PIConfig& config);

/// iteration, tau_1..tau_m, K_bar_1..K_bar_m, value
void write_log_csv(std::ostream& out, const std::vector<PILogRow>& log);

} // namespace sbo::pi

#endif
