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

#ifndef SBO_MFDSIM_HPP
#define SBO_MFDSIM_HPP

#include "sbo/core.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sbo::mfd {

class SimulationError : public Error {
public:
    using Error::Error;
};

enum class NfdShape { triangular, trapezoidal };

/// Piecewise-linear network fundamental diagram: linear rise to q_max at
/// k_cr_low, plateau to k_cr_high, linear fall to zero at k_jam.
struct NfdCurve {
    double k_cr_low = 15.0;   ///< vpkmpl
    double k_cr_high = 15.0;  ///< vpkmpl
    double k_jam = 80.0;      ///< vpkmpl
    double q_max = 600.0;     ///< vph per lane
    NfdShape shape = NfdShape::triangular;

    void validate() const;
    double free_flow_speed() const { return q_max / k_cr_low; }
};

/// Flow at density k; throws SimulationError outside [0, k_jam].
double nfd_flow(double k, const NfdCurve& curve);

struct DemandSegment {
    double duration_min = 0.0;
    double rate_vph = 0.0;  ///< potential trip starts per hour before toll response
};

/// Toll-dependent change of the fundamental diagram. The effective curve is
/// interpolated towards `shifted` by min(1, trip_toll / toll_ref).
struct NfdShift {
    bool enabled = false;
    NfdCurve shifted;
    double toll_ref = 1.0;  ///< $
};

struct ReservoirConfig {
    std::vector<DemandSegment> demand;  ///< warm-up, tolling horizon and cool-down
    double avg_trip_length_km = 5.0;
    double lane_km = 500.0;
    double toll_elasticity = 0.08;  ///< per $ of expected trip toll
    double value_of_time = 15.0;    ///< $/h; upper limit of the delay rate
    double dt_s = 1.0;
    double initial_density = 0.0;
    double max_delay_h = 1.0;
    double noise_amplitude = 0.0;      ///< deterministic non-smooth output noise (vpkmpl)
    double stochastic_noise_sd = 0.0;  ///< seed-driven log-normal demand noise per minute
    std::size_t series_stride = 60;    ///< steps between recorded series samples
    NfdShift shift;

    double horizon_min() const;
    void validate() const;
};

struct TollScheme {
    double start_min = 0.0;
    double interval_min = 30.0;
    std::vector<double> eta;    ///< $/km per interval
    std::vector<double> omega;  ///< $/h per interval, empty for distance-only tolling

    std::size_t intervals() const { return eta.size(); }
    double end_min() const { return start_min + interval_min * static_cast<double>(eta.size()); }
    void validate() const;
};

struct SeriesPoint {
    double t_min = 0.0;
    double n = 0.0;  ///< accumulation (veh)
    double k = 0.0;  ///< density (vpkmpl)
    double q = 0.0;  ///< flow (vph per lane)
};

struct SimOutput {
    std::vector<double> k_bar;  ///< per tolling interval
    std::vector<double> q_bar;
    std::vector<SeriesPoint> series;
    double initial_accumulation = 0.0;
    double final_accumulation = 0.0;
    double total_inflow = 0.0;   ///< vehicles admitted
    double total_outflow = 0.0;  ///< trips completed
};

/// Forward-Euler reservoir: n' = inflow - Q(K) lane_km / L with K = n / lane_km,
/// and inflow = demand * exp(-elasticity * (eta L + omega * delay)).
/// Deterministic for a fixed seed.
SimOutput run_reservoir(const ReservoirConfig& config, const NfdCurve& curve, const TollScheme& scheme,
                        std::uint64_t seed);

/// value + amplitude * u, with u in [-1, 1] a hash of (tau on a 1e-4 grid, seed, channel).
double apply_numerical_noise(double value, std::span<const double> tau, double amplitude,
                             std::uint64_t seed, std::uint64_t channel = 0);

struct LinkMeasurement {
    double lane_km = 0.0;
    double density = 0.0;
    double flow = 0.0;
};

/// Lane-km weighted average density and flow.
std::pair<double, double> network_average(std::span<const LinkMeasurement> links);

/// Mean absolute deviation of the interval densities from the set point.
double objective_density(const SimOutput& out, double k_cr);

/// Mean interval flow (to be maximized).
double objective_flow(const SimOutput& out);

/// t_min, n, K, Q
void write_series_csv(std::ostream& out, const SimOutput& sim);

// ---------------------------------------------------------------------------
// Toll problems on top of the reservoir

struct TollProblem {
    std::string name;
    NfdCurve curve;
    ReservoirConfig reservoir;
    double tolling_start_min = 30.0;
    double interval_min = 30.0;
    std::size_t m_intervals = 2;
    bool delay_rates = false;
    double eta_max = 1.0;  ///< $/km
    double k_cr = 15.0;    ///< density set point for the density objective

    std::size_t dimension() const { return delay_rates ? 2 * m_intervals : m_intervals; }
    Bounds bounds() const;
    TollScheme scheme(std::span<const double> tau) const;
    SimOutput simulate(std::span<const double> tau, std::uint64_t seed) const;
    void validate() const;
};

/// Two 30-minute intervals, distance toll only, triangular diagram with K_cr = 15.
TollProblem simple_fixture();

/// Eight 15-minute intervals, joint distance and delay toll, plateau 20-30 vpkmpl.
TollProblem complex_fixture();

std::string to_json(const TollProblem& problem);
TollProblem problem_from_json(const std::string& text);
TollProblem load_problem(const std::filesystem::path& path);

enum class TollObjective { density, flow };

/// Black-box objective: simulates tau and reports the chosen objective with
/// per-interval densities and flows as auxiliary output.
Objective make_objective(const TollProblem& problem, TollObjective kind);

} // namespace sbo::mfd

#endif
