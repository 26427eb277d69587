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

#ifndef SBO_DIRECT_HPP
#define SBO_DIRECT_HPP

#include "sbo/constraints.hpp"
#include "sbo/core.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace sbo::direct {

/// A cell of the partition of the unit hypercube.
///
/// Along dimension l the side length is 3^-depth[l] and the center sits at
/// (2 * index[l] + 1) / (2 * 3^depth[l]); integer bookkeeping keeps both exact.
struct Hyperrectangle {
    std::vector<std::int64_t> index;
    std::vector<int> depth;
    double value = 0.0;  ///< objective at the center, minimization axis
    double d = 0.0;      ///< center-to-vertex distance

    std::vector<double> center() const;
    double volume() const;
    int min_depth() const;
};

/// Half-diagonal computed from the depth vector in a canonical summation order.
double half_diagonal(const std::vector<int>& depth);

struct DirectState {
    std::vector<Hyperrectangle> rects;
    double y_min = 0.0;
    double epsilon = 1e-4;
    std::size_t iteration = 0;
};

/// Indices of the potentially optimal rectangles: those for which some positive
/// rate constant K makes the rectangle's lower bound the lowest of all and at
/// least epsilon * |y_min| below the incumbent.
std::vector<std::size_t> identify_potentially_optimal(const DirectState& state);

/// Evaluates the given unit-cube points on the minimization axis. May return
/// fewer values than requested when the budget runs out.
using BatchObjective = std::function<std::vector<double>(const std::vector<std::vector<double>>&)>;

/// Samples c +- delta e_l along every longest side and divides the rectangle in
/// ascending order of the better sample per dimension. Returns the number of
/// evaluations used. If the budget ends early only fully sampled dimensions are
/// divided, so the partition stays valid.
std::size_t trisect(DirectState& state, std::size_t rect_index, const BatchObjective& objective);

struct DirectConfig {
    double epsilon = 1e-4;
    std::size_t max_iterations = 1000000;
    std::optional<PenaltyHook> penalty;
    bool record_iterations = false;
};

struct IterationDump {
    std::size_t iteration = 0;
    std::vector<Hyperrectangle> rects;
};

struct DirectResult {
    Trace trace;
    std::size_t iterations = 0;  ///< divide rounds run
    DirectState state;
    std::vector<IterationDump> dumps;
};

DirectResult run_direct(Evaluator& evaluator, const DirectConfig& config);

/// iteration, c_1..c_m, depth_1..depth_m, value, d
void write_dump_csv(std::ostream& out, const std::vector<IterationDump>& dumps);

} // namespace sbo::direct

#endif
