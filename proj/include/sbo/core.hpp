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

#ifndef SBO_CORE_HPP
#define SBO_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbo {

/// Toll-rate decision vector, in the problem's native units.
using DecisionVector = std::vector<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class BudgetExhausted : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

enum class Sense { minimize, maximize };

const char* to_string(Sense sense);

/// True when `candidate` is strictly better than `incumbent`.
bool improves(Sense sense, double candidate, double incumbent);

/// Maps an objective value onto the minimization axis used by the solvers.
inline double to_minimization(Sense sense, double value)
{
    return sense == Sense::minimize ? value : -value;
}

/// Box constraints on the decision vector.
class Bounds {
public:
    Bounds(DecisionVector lower, DecisionVector upper);

    static Bounds unit(std::size_t dim);
    static Bounds uniform(std::size_t dim, double lo, double hi);

    std::size_t dimension() const { return lower_.size(); }
    const DecisionVector& lower() const { return lower_; }
    const DecisionVector& upper() const { return upper_; }

    DecisionVector midpoint() const;
    bool contains(std::span<const double> tau) const;

    /// Affine map into [0,1]^m. Degenerate coordinates (lower == upper) map to 0.5.
    DecisionVector to_unit(std::span<const double> tau) const;
    DecisionVector from_unit(std::span<const double> u) const;

private:
    DecisionVector lower_;
    DecisionVector upper_;
};

/// Projection of `tau` onto the box. Throws DimensionError on mismatch.
DecisionVector clamp(std::span<const double> tau, const Bounds& bounds);

void check_dimension(std::size_t expected, std::size_t actual, const char* what);

/// Per-tolling-interval outputs of a traffic simulation.
struct SimAux {
    std::vector<double> k_bar;
    std::vector<double> q_bar;
};

/// What a black-box objective returns for one (tau, seed) pair.
struct ObjectiveValue {
    double value = 0.0;
    std::optional<SimAux> aux;
};

using Objective = std::function<ObjectiveValue(const DecisionVector&, std::uint64_t seed)>;

struct Evaluation {
    double value = 0.0;
    std::optional<SimAux> aux;
    std::uint64_t seed = 0;
    std::size_t eval_index = 0;
};

struct TraceRecord {
    DecisionVector tau;
    Evaluation eval;
};

/// Ordered evaluation history plus the running best value.
class Trace {
public:
    explicit Trace(Sense sense = Sense::minimize) : sense_(sense) {}

    /// Appends a record; eval_index must strictly increase.
    void append(DecisionVector tau, Evaluation eval);

    Sense sense() const { return sense_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const std::vector<TraceRecord>& records() const { return records_; }
    const std::vector<double>& best_curve() const { return best_curve_; }

    /// CSV with columns eval_index, seed, tau_1..tau_m, value, best_value.
    void write_csv(std::ostream& out) const;
    static Trace read_csv(std::istream& in, std::optional<Sense> sense = std::nullopt);

private:
    Sense sense_;
    std::vector<TraceRecord> records_;
    std::vector<double> best_curve_;
};

struct BestPoint {
    DecisionVector tau;
    double value = 0.0;
    std::size_t index = 0;  ///< position in the trace
};

/// Best record of the trace; earliest eval_index wins ties. Throws on empty trace.
BestPoint best_so_far(const Trace& trace, Sense sense);

/// Best record among those accepted by `filter`; nullopt when none qualifies.
std::optional<BestPoint> best_so_far_if(const Trace& trace, Sense sense,
                                        const std::function<bool(const DecisionVector&)>& filter);

struct EvaluatorOptions {
    std::size_t budget = 0;
    Sense sense = Sense::minimize;
    std::uint64_t seed = 0;     ///< sample-path seed used by evaluate(tau)
    std::size_t n_reps = 1;     ///< replications averaged per evaluation
    bool reentrant = false;     ///< objective may be called concurrently
};

/// Budgeted gateway to the objective. Every call lands in the trace exactly once.
class Evaluator {
public:
    Evaluator(Objective objective, Bounds bounds, EvaluatorOptions options);

    Evaluation evaluate(const DecisionVector& tau);
    Evaluation evaluate(const DecisionVector& tau, std::uint64_t seed);

    /// Evaluates as many points as the budget allows, in order. Indices are
    /// assigned before any call so that concurrent evaluation yields the same trace.
    std::vector<Evaluation> evaluate_batch(const std::vector<DecisionVector>& taus);

    std::size_t budget() const { return options_.budget; }
    std::size_t used() const { return trace_.size(); }
    std::size_t remaining() const { return options_.budget - trace_.size(); }
    bool exhausted() const { return remaining() == 0; }

    Sense sense() const { return options_.sense; }
    std::uint64_t seed() const { return options_.seed; }
    const Bounds& bounds() const { return bounds_; }
    const Trace& trace() const { return trace_; }

    /// Number of proposals that had to be projected back into the bounds.
    std::size_t clamp_events() const { return clamp_events_; }

private:
    DecisionVector admit(const DecisionVector& tau);
    Evaluation call(const DecisionVector& tau, std::uint64_t seed, std::size_t index) const;

    Objective objective_;
    Bounds bounds_;
    EvaluatorOptions options_;
    Trace trace_;
    std::size_t clamp_events_ = 0;
};

/// Feasible subset of the box used by the kriging infill search.
struct FeasibleRegion {
    std::function<bool(const DecisionVector&)> contains;
    /// Optional map of an arbitrary in-bounds point to a nearby feasible one.
    std::function<DecisionVector(const DecisionVector&)> repair;
};

} // namespace sbo

#endif
