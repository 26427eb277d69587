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

#include "sbo/core.hpp"
#include "sbo/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>

namespace sbo {

namespace io {

std::string format_number(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t'))
        text.remove_suffix(1);
    if (text == "nan") return std::nan("");
    if (text == "inf") return HUGE_VAL;
    if (text == "-inf") return -HUGE_VAL;
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw Error("not a number: '" + std::string(text) + "'");
    return v;
}

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    return out;
}

} // namespace io

const char* to_string(Sense sense)
{
    return sense == Sense::minimize ? "minimize" : "maximize";
}

bool improves(Sense sense, double candidate, double incumbent)
{
    return sense == Sense::minimize ? candidate < incumbent : candidate > incumbent;
}

void check_dimension(std::size_t expected, std::size_t actual, const char* what)
{
    if (expected != actual) {
        std::ostringstream msg;
        msg << what << ": dimension mismatch (expected " << expected << ", got " << actual << ")";
        throw DimensionError(msg.str());
    }
}

Bounds::Bounds(DecisionVector lower, DecisionVector upper)
    : lower_(std::move(lower)), upper_(std::move(upper))
{
    check_dimension(lower_.size(), upper_.size(), "Bounds");
    if (lower_.empty()) throw DimensionError("Bounds: empty");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || lower_[i] > upper_[i])
            throw ConfigError("Bounds: need finite lower <= upper at index " + std::to_string(i));
    }
}

Bounds Bounds::unit(std::size_t dim) { return uniform(dim, 0.0, 1.0); }

Bounds Bounds::uniform(std::size_t dim, double lo, double hi)
{
    return Bounds(DecisionVector(dim, lo), DecisionVector(dim, hi));
}

DecisionVector Bounds::midpoint() const
{
    DecisionVector mid(dimension());
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (lower_[i] + upper_[i]);
    return mid;
}

bool Bounds::contains(std::span<const double> tau) const
{
    if (tau.size() != dimension()) return false;
    for (std::size_t i = 0; i < tau.size(); ++i)
        if (!(tau[i] >= lower_[i] && tau[i] <= upper_[i])) return false;
    return true;
}

DecisionVector Bounds::to_unit(std::span<const double> tau) const
{
    check_dimension(dimension(), tau.size(), "Bounds::to_unit");
    DecisionVector u(tau.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double range = upper_[i] - lower_[i];
        u[i] = range > 0.0 ? (tau[i] - lower_[i]) / range : 0.5;
    }
    return u;
}

DecisionVector Bounds::from_unit(std::span<const double> u) const
{
    check_dimension(dimension(), u.size(), "Bounds::from_unit");
    DecisionVector tau(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        tau[i] = lower_[i] + u[i] * (upper_[i] - lower_[i]);
        // keep the unit cube's image inside the box despite rounding
        if (u[i] >= 0.0 && u[i] <= 1.0) tau[i] = std::clamp(tau[i], lower_[i], upper_[i]);
    }
    return tau;
}

DecisionVector clamp(std::span<const double> tau, const Bounds& bounds)
{
    check_dimension(bounds.dimension(), tau.size(), "clamp");
    DecisionVector out(tau.begin(), tau.end());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i], bounds.lower()[i], bounds.upper()[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Trace

void Trace::append(DecisionVector tau, Evaluation eval)
{
    if (!records_.empty() && eval.eval_index <= records_.back().eval.eval_index)
        throw Error("Trace: eval_index must strictly increase");
    double best = eval.value;
    if (!best_curve_.empty() && !improves(sense_, eval.value, best_curve_.back()))
        best = best_curve_.back();
    best_curve_.push_back(best);
    records_.push_back({std::move(tau), std::move(eval)});
}

void Trace::write_csv(std::ostream& out) const
{
    const std::size_t m = records_.empty() ? 0 : records_.front().tau.size();
    out << "eval_index,seed";
    for (std::size_t j = 0; j < m; ++j) out << ",tau_" << (j + 1);
    out << ",value,best_value\n";
    for (std::size_t r = 0; r < records_.size(); ++r) {
        const auto& rec = records_[r];
        out << rec.eval.eval_index << ',' << rec.eval.seed;
        for (double t : rec.tau) out << ',' << io::format_number(t);
        out << ',' << io::format_number(rec.eval.value) << ',' << io::format_number(best_curve_[r])
            << '\n';
    }
}

Trace Trace::read_csv(std::istream& in, std::optional<Sense> sense)
{
    std::string line;
    if (!std::getline(in, line)) throw Error("trace CSV: missing header");
    const auto header = io::split_csv_line(line);
    if (header.size() < 4 || header[0] != "eval_index" || header[1] != "seed")
        throw Error("trace CSV: unexpected header");
    const std::size_t m = header.size() - 4;

    std::vector<TraceRecord> rows;
    std::vector<double> best_column;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = io::split_csv_line(line);
        if (cells.size() != header.size()) throw Error("trace CSV: ragged row");
        TraceRecord rec;
        rec.eval.eval_index = static_cast<std::size_t>(std::stoull(cells[0]));
        rec.eval.seed = std::stoull(cells[1]);
        for (std::size_t j = 0; j < m; ++j) rec.tau.push_back(io::parse_number(cells[2 + j]));
        rec.eval.value = io::parse_number(cells[2 + m]);
        best_column.push_back(io::parse_number(cells[3 + m]));
        rows.push_back(std::move(rec));
    }

    Sense resolved = sense.value_or(Sense::minimize);
    if (!sense) {
        for (std::size_t i = 1; i < best_column.size(); ++i) {
            if (best_column[i] > best_column[i - 1]) {
                resolved = Sense::maximize;
                break;
            }
        }
    }
    Trace trace(resolved);
    for (auto& rec : rows) trace.append(std::move(rec.tau), std::move(rec.eval));
    return trace;
}

std::optional<BestPoint> best_so_far_if(const Trace& trace, Sense sense,
                                        const std::function<bool(const DecisionVector&)>& filter)
{
    std::optional<BestPoint> best;
    const auto& recs = trace.records();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (filter && !filter(recs[i].tau)) continue;
        if (!best || improves(sense, recs[i].eval.value, best->value))
            best = BestPoint{recs[i].tau, recs[i].eval.value, i};
    }
    return best;
}

BestPoint best_so_far(const Trace& trace, Sense sense)
{
    if (trace.empty()) throw Error("best_so_far: empty trace");
    return *best_so_far_if(trace, sense, nullptr);
}

// ---------------------------------------------------------------------------
// Evaluator

Evaluator::Evaluator(Objective objective, Bounds bounds, EvaluatorOptions options)
    : objective_(std::move(objective)), bounds_(std::move(bounds)), options_(options),
      trace_(options.sense)
{
    if (!objective_) throw ConfigError("Evaluator: missing objective");
    if (options_.n_reps == 0) throw ConfigError("Evaluator: n_reps must be >= 1");
}

DecisionVector Evaluator::admit(const DecisionVector& tau)
{
    check_dimension(bounds_.dimension(), tau.size(), "Evaluator::evaluate");
    for (double t : tau)
        if (!std::isfinite(t)) throw EvaluationError("Evaluator: non-finite decision vector");
    if (bounds_.contains(tau)) return tau;
    ++clamp_events_;
    return clamp(tau, bounds_);
}

Evaluation Evaluator::call(const DecisionVector& tau, std::uint64_t seed, std::size_t index) const
{
    Evaluation eval;
    eval.seed = seed;
    eval.eval_index = index;
    double sum = 0.0;
    for (std::size_t rep = 0; rep < options_.n_reps; ++rep) {
        ObjectiveValue ov = objective_(tau, seed + rep);
        if (!std::isfinite(ov.value))
            throw EvaluationError("objective returned a non-finite value at eval " +
                                  std::to_string(index));
        sum += ov.value;
        if (rep == 0) {
            eval.aux = std::move(ov.aux);
        } else if (eval.aux && ov.aux) {
            for (std::size_t h = 0; h < eval.aux->k_bar.size(); ++h) eval.aux->k_bar[h] += ov.aux->k_bar[h];
            for (std::size_t h = 0; h < eval.aux->q_bar.size(); ++h) eval.aux->q_bar[h] += ov.aux->q_bar[h];
        }
    }
    const double reps = static_cast<double>(options_.n_reps);
    eval.value = options_.n_reps == 1 ? sum : sum / reps;
    if (eval.aux && options_.n_reps > 1) {
        for (double& k : eval.aux->k_bar) k /= reps;
        for (double& q : eval.aux->q_bar) q /= reps;
    }
    return eval;
}

Evaluation Evaluator::evaluate(const DecisionVector& tau) { return evaluate(tau, options_.seed); }

Evaluation Evaluator::evaluate(const DecisionVector& tau, std::uint64_t seed)
{
    if (exhausted())
        throw BudgetExhausted("evaluation budget of " + std::to_string(options_.budget) +
                              " exhausted");
    DecisionVector admitted = admit(tau);
    Evaluation eval = call(admitted, seed, trace_.size());
    trace_.append(std::move(admitted), eval);
    return eval;
}

std::vector<Evaluation> Evaluator::evaluate_batch(const std::vector<DecisionVector>& taus)
{
    const std::size_t count = std::min(taus.size(), remaining());
    std::vector<DecisionVector> admitted;
    admitted.reserve(count);
    for (std::size_t i = 0; i < count; ++i) admitted.push_back(admit(taus[i]));

    const std::size_t first = trace_.size();
    std::vector<Evaluation> results(count);
    if (options_.reentrant && count > 1) {
        std::vector<std::future<Evaluation>> pending;
        pending.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            pending.push_back(std::async(std::launch::async, [this, &admitted, i, first] {
                return call(admitted[i], options_.seed, first + i);
            }));
        for (std::size_t i = 0; i < count; ++i) results[i] = pending[i].get();
    } else {
        for (std::size_t i = 0; i < count; ++i) results[i] = call(admitted[i], options_.seed, first + i);
    }
    for (std::size_t i = 0; i < count; ++i) trace_.append(std::move(admitted[i]), results[i]);
    return results;
}

} // namespace sbo
