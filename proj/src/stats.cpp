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

#include "sbo/stats.hpp"
#include "sbo/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace sbo::stats {

double quantile(std::span<const double> values, double p)
{
    if (values.empty()) throw Error("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw Error("quantile level outside [0, 1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

double iqr(std::span<const double> values) { return quantile(values, 0.75) - quantile(values, 0.25); }

RankTest mann_whitney_greater(std::span<const double> x, std::span<const double> y)
{
    if (x.empty() || y.empty()) throw Error("rank test needs two non-empty samples");
    const std::size_t n1 = x.size();
    const std::size_t n = x.size() + y.size();

    std::vector<std::pair<double, bool>> pooled;
    pooled.reserve(n);
    for (double v : x) pooled.emplace_back(v, true);
    for (double v : y) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Doubled mid-ranks keep every rank an integer.
    std::vector<long> rank2(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const long mid2 = static_cast<long>(i + j + 1);  // 2 * mean of ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) rank2[k] = mid2;
        i = j;
    }
    long observed = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (pooled[k].second) observed += rank2[k];

    const long max_sum = std::accumulate(rank2.begin(), rank2.end(), 0L);
    // ways[c][s]: number of c-subsets of the ranks seen so far with doubled rank sum s.
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto r = static_cast<std::size_t>(rank2[k]);
        for (std::size_t c = std::min(n1, k + 1); c >= 1; --c)
            for (std::size_t s = static_cast<std::size_t>(max_sum); s >= r; --s) ways[c][s] += ways[c - 1][s - r];
    }
    double total = 0.0;
    double tail = 0.0;
    for (std::size_t s = 0; s <= static_cast<std::size_t>(max_sum); ++s) {
        total += ways[n1][s];
        if (static_cast<long>(s) >= observed) tail += ways[n1][s];
    }
    RankTest out;
    out.u = 0.5 * static_cast<double>(observed) - 0.5 * static_cast<double>(n1 * (n1 + 1));
    out.p_value = tail / total;
    return out;
}

} // namespace sbo::stats
