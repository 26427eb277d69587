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

#ifndef SBO_STATS_HPP
#define SBO_STATS_HPP

#include <span>

namespace sbo::stats {

/// Linearly interpolated sample quantile (p in [0, 1]). Throws on empty input.
double quantile(std::span<const double> values, double p);
double median(std::span<const double> values);
/// Interquartile range q(0.75) - q(0.25).
double iqr(std::span<const double> values);

struct RankTest {
    double u = 0.0;        ///< Mann-Whitney U of the first sample
    double p_value = 1.0;  ///< exact one-sided p-value
};

/// Exact one-sided Mann-Whitney test of "x tends to exceed y". Ties use mid-ranks;
/// the null distribution is enumerated over all rank assignments.
RankTest mann_whitney_greater(std::span<const double> x, std::span<const double> y);

} // namespace sbo::stats

#endif
