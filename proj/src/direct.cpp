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

#include "sbo/direct.hpp"
#include "sbo/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace sbo::direct {

namespace {

constexpr int kMaxDepth = 38;  // 3^38 still fits in int64

double pow3(int p) { return std::pow(3.0, -p); }

} // namespace

std::vector<double> Hyperrectangle::center() const
{
    std::vector<double> c(index.size());
    for (std::size_t l = 0; l < c.size(); ++l)
        c[l] = (2.0 * static_cast<double>(index[l]) + 1.0) * 0.5 * pow3(depth[l]);
    return c;
}

double Hyperrectangle::volume() const
{
    double v = 1.0;
    for (int p : depth) v *= pow3(p);
    return v;
}

int Hyperrectangle::min_depth() const { return *std::min_element(depth.begin(), depth.end()); }

double half_diagonal(const std::vector<int>& depth)
{
    std::vector<int> sorted = depth;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (int p : sorted) sum += pow3(2 * p);
    return 0.5 * std::sqrt(sum);
}

std::vector<std::size_t> identify_potentially_optimal(const DirectState& state)
{
    const auto& rects = state.rects;
    if (rects.empty()) return {};

    // Minimum value per distinct size, with every rect tied at that minimum.
    std::map<double, std::pair<double, std::vector<std::size_t>>> groups;
    for (std::size_t j = 0; j < rects.size(); ++j) {
        auto [it, inserted] = groups.try_emplace(rects[j].d, rects[j].value, std::vector<std::size_t>{j});
        if (inserted) continue;
        auto& [best, members] = it->second;
        if (rects[j].value < best) {
            best = rects[j].value;
            members = {j};
        } else if (rects[j].value == best) {
            members.push_back(j);
        }
    }

    std::vector<double> ds, fs;
    for (const auto& [d, g] : groups) {
        ds.push_back(d);
        fs.push_back(g.first);
    }
    const double threshold = state.y_min - state.epsilon * std::abs(state.y_min);
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> selected;
    std::size_t gi = 0;
    for (const auto& [d, g] : groups) {
        double k_low = -inf;
        double k_high = inf;
        for (std::size_t o = 0; o < ds.size(); ++o) {
            if (o == gi) continue;
            const double slope = (fs[gi] - fs[o]) / (ds[gi] - ds[o]);
            if (ds[o] < ds[gi]) k_low = std::max(k_low, slope);
            else k_high = std::min(k_high, slope);
        }
        const bool hull = k_high > 0.0 && k_low <= k_high;
        const bool sufficient = k_high == inf || fs[gi] - k_high * ds[gi] <= threshold;
        if (hull && sufficient) selected.insert(selected.end(), g.second.begin(), g.second.end());
        ++gi;
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

std::size_t trisect(DirectState& state, std::size_t rect_index, const BatchObjective& objective)
{
    Hyperrectangle parent = state.rects.at(rect_index);
    const int shallow = parent.min_depth();
    if (shallow >= kMaxDepth) return 0;

    std::vector<std::size_t> dims;
    for (std::size_t l = 0; l < parent.depth.size(); ++l)
        if (parent.depth[l] == shallow) dims.push_back(l);

    const double delta = pow3(shallow + 1);
    const std::vector<double> c = parent.center();
    std::vector<std::vector<double>> points;
    for (std::size_t l : dims) {
        for (double sign : {-1.0, 1.0}) {
            std::vector<double> p = c;
            p[l] += sign * delta;
            points.push_back(std::move(p));
        }
    }
    const std::vector<double> values = objective(points);

    struct Split {
        std::size_t dim;
        double lower_value;
        double upper_value;
        double w;
    };
    std::vector<Split> splits;
    for (std::size_t k = 0; k < dims.size() && 2 * k + 1 < values.size(); ++k) {
        const double lo = values[2 * k];
        const double hi = values[2 * k + 1];
        splits.push_back({dims[k], lo, hi, std::min(lo, hi)});
    }
    std::stable_sort(splits.begin(), splits.end(), [](const Split& a, const Split& b) { return a.w < b.w; });

    Hyperrectangle middle = parent;
    for (const Split& s : splits) {
        middle.depth[s.dim] += 1;
        middle.index[s.dim] *= 3;
        Hyperrectangle lower = middle;
        Hyperrectangle upper = middle;
        upper.index[s.dim] += 2;
        middle.index[s.dim] += 1;
        lower.value = s.lower_value;
        upper.value = s.upper_value;
        lower.d = upper.d = half_diagonal(middle.depth);
        state.rects.push_back(std::move(lower));
        state.rects.push_back(std::move(upper));
    }
    middle.d = half_diagonal(middle.depth);
    state.rects[rect_index] = std::move(middle);

    for (double v : values) state.y_min = std::min(state.y_min, v);
    return values.size();
}

DirectResult run_direct(Evaluator& evaluator, const DirectConfig& config)
{
    if (evaluator.remaining() < 1) throw ConfigError("run_direct: need a budget of at least 1");
    if (!(config.epsilon >= 0.0)) throw ConfigError("run_direct: epsilon must be non-negative");
    if (config.penalty) {
        config.penalty->config.validate();
        check_dimension(config.penalty->spec.dimension(), evaluator.bounds().dimension(), "run_direct penalty");
    }
    const Bounds& bounds = evaluator.bounds();
    const Sense sense = evaluator.sense();
    const std::size_t m = bounds.dimension();

    auto score = [&](const DecisionVector& tau, double value) {
        double v = to_minimization(sense, value);
        if (config.penalty) v += config.penalty->cost(tau);
        return v;
    };
    BatchObjective objective = [&](const std::vector<std::vector<double>>& units) {
        std::vector<DecisionVector> taus;
        taus.reserve(units.size());
        for (const auto& u : units) taus.push_back(bounds.from_unit(u));
        const std::vector<Evaluation> evals = evaluator.evaluate_batch(taus);
        std::vector<double> out;
        out.reserve(evals.size());
        for (std::size_t i = 0; i < evals.size(); ++i) out.push_back(score(taus[i], evals[i].value));
        return out;
    };

    DirectResult result;
    DirectState& state = result.state;
    state.epsilon = config.epsilon;

    // Step 1: the midpoint of the unit hypercube.
    Hyperrectangle root;
    root.index.assign(m, 0);
    root.depth.assign(m, 0);
    root.d = half_diagonal(root.depth);
    root.value = objective({root.center()}).at(0);
    state.y_min = root.value;
    state.rects.push_back(root);
    state.iteration = 1;

    while (!evaluator.exhausted() && state.iteration <= config.max_iterations) {
        const std::vector<std::size_t> selected = identify_potentially_optimal(state);
        std::size_t used = 0;
        for (std::size_t idx : selected) {
            if (evaluator.exhausted()) break;
            used += trisect(state, idx, objective);
        }
        if (config.record_iterations) result.dumps.push_back({state.iteration, state.rects});
        if (used == 0) break;  // every selected cell is at the depth limit
        ++state.iteration;
    }
    result.iterations = state.iteration - 1;
    result.trace = evaluator.trace();
    return result;
}

void write_dump_csv(std::ostream& out, const std::vector<IterationDump>& dumps)
{
    const std::size_t m = dumps.empty() || dumps.front().rects.empty() ? 0 : dumps.front().rects.front().depth.size();
    out << "iteration";
    for (std::size_t l = 0; l < m; ++l) out << ",c_" << (l + 1);
    for (std::size_t l = 0; l < m; ++l) out << ",depth_" << (l + 1);
    out << ",value,d\n";
    for (const auto& dump : dumps) {
        for (const auto& r : dump.rects) {
            out << dump.iteration;
            for (double c : r.center()) out << ',' << io::format_number(c);
            for (int p : r.depth) out << ',' << p;
            out << ',' << io::format_number(r.value) << ',' << io::format_number(r.d) << '\n';
        }
    }
}

} // namespace sbo::direct
