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

#ifndef SBO_TEST_FUNCTIONS_HPP
#define SBO_TEST_FUNCTIONS_HPP

#include "sbo/core.hpp"

#include <cstdint>
#include <vector>

namespace sbo::testfn {

/// sum_l scale (tau_l - center_l)^2 plus seed-driven Gaussian noise of the given sd.
struct NoisyQuadratic {
    std::vector<double> center{0.3, 0.7};
    double scale = 1.0;
    double noise_sd = 0.0;

    double operator()(const DecisionVector& tau, std::uint64_t seed) const;
    Bounds bounds() const { return Bounds::unit(center.size()); }
};

/// Two-dimensional function on [0,1]^2 whose global optimum sits in a narrow
/// strip around x1 = strip_center, overlaid with a periodic ripple in x1.
struct NarrowStrip {
    double strip_center = 0.25;
    double strip_width = 0.05;
    double ripple = 0.3;
    double ripple_frequency = 4.0;  ///< periods per unit length
    double x2_center = 0.6;
    double x2_weight = 0.1;

    double operator()(const DecisionVector& tau) const;
    DecisionVector argmin() const { return {strip_center, x2_center}; }
    double minimum() const { return 1.0; }
    Bounds bounds() const { return Bounds::unit(2); }
};

/// K_h = k0 - gain * tau_h for every interval, reported as auxiliary output.
/// The objective value is the mean absolute deviation from k_cr.
struct LinearPlant {
    double k0 = 35.0;
    double gain = 25.0;
    double k_cr = 15.0;
    std::size_t intervals = 2;
    double toll_max = 1.0;

    ObjectiveValue operator()(const DecisionVector& tau) const;
    Bounds bounds() const { return Bounds::uniform(intervals, 0.0, toll_max); }
};

Objective make_objective(const NoisyQuadratic& f);
Objective make_objective(const NarrowStrip& f);
Objective make_objective(const LinearPlant& f);

} // namespace sbo::testfn

#endif
