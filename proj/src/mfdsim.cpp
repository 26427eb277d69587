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

#include "sbo/mfdsim.hpp"
#include "sbo/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace sbo::mfd {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Same shape as nfd_flow, with the density clipped into [0, k_jam].
double flow_clipped(double k, const NfdCurve& c)
{
    k = std::clamp(k, 0.0, c.k_jam);
    if (k <= c.k_cr_low) return c.q_max * k / c.k_cr_low;
    if (k <= c.k_cr_high) return c.q_max;
    return c.q_max * (c.k_jam - k) / (c.k_jam - c.k_cr_high);
}

NfdCurve blend(const NfdCurve& a, const NfdCurve& b, double s)
{
    NfdCurve c = a;
    c.k_cr_low = a.k_cr_low + s * (b.k_cr_low - a.k_cr_low);
    c.k_cr_high = a.k_cr_high + s * (b.k_cr_high - a.k_cr_high);
    c.k_jam = a.k_jam + s * (b.k_jam - a.k_jam);
    c.q_max = a.q_max + s * (b.q_max - a.q_max);
    return c;
}

} // namespace

void NfdCurve::validate() const
{
    if (!(k_cr_low > 0.0 && k_cr_low <= k_cr_high && k_cr_high < k_jam))
        throw ConfigError("NFD curve needs 0 < k_cr_low <= k_cr_high < k_jam");
    if (!(q_max > 0.0)) throw ConfigError("NFD curve needs q_max > 0");
    if (shape == NfdShape::triangular && k_cr_low != k_cr_high)
        throw ConfigError("triangular NFD curve needs k_cr_low == k_cr_high");
}

double nfd_flow(double k, const NfdCurve& curve)
{
    if (!(k >= 0.0 && k <= curve.k_jam)) throw SimulationError("nfd_flow: density outside [0, k_jam]");
    return flow_clipped(k, curve);
}

double ReservoirConfig::horizon_min() const
{
    double total = 0.0;
    for (const auto& seg : demand) total += seg.duration_min;
    return total;
}

void ReservoirConfig::validate() const
{
    if (demand.empty()) throw ConfigError("reservoir needs a demand profile");
    for (const auto& seg : demand)
        if (!(seg.duration_min > 0.0) || !(seg.rate_vph >= 0.0))
            throw ConfigError("demand segments need positive duration and non-negative rate");
    if (!(dt_s > 0.0)) throw ConfigError("reservoir needs dt > 0");
    if (!(avg_trip_length_km > 0.0)) throw ConfigError("reservoir needs a positive trip length");
    if (!(lane_km > 0.0)) throw ConfigError("reservoir needs positive lane-km");
    if (!(toll_elasticity >= 0.0)) throw ConfigError("toll elasticity must be non-negative");
    if (!(noise_amplitude >= 0.0) || !(stochastic_noise_sd >= 0.0))
        throw ConfigError("noise levels must be non-negative");
    if (!(max_delay_h > 0.0)) throw ConfigError("max delay must be positive");
    if (!(initial_density >= 0.0)) throw ConfigError("initial density must be non-negative");
    if (series_stride == 0) throw ConfigError("series stride must be positive");
    if (shift.enabled) {
        shift.shifted.validate();
        if (!(shift.toll_ref > 0.0)) throw ConfigError("NFD shift needs toll_ref > 0");
    }
}

void TollScheme::validate() const
{
    if (eta.empty()) throw ConfigError("toll scheme needs at least one interval");
    if (!(interval_min > 0.0)) throw ConfigError("toll scheme needs a positive interval length");
    if (!omega.empty() && omega.size() != eta.size())
        throw DimensionError("toll scheme: delay rates must match the interval count");
}

SimOutput run_reservoir(const ReservoirConfig& config, const NfdCurve& curve, const TollScheme& scheme,
                        std::uint64_t seed)
{
    config.validate();
    curve.validate();
    scheme.validate();
    if (scheme.start_min < 0.0 || scheme.end_min() > config.horizon_min() + 1e-9)
        throw ConfigError("toll scheme lies outside the simulation horizon");

    const double dt_h = config.dt_s / 3600.0;
    const double horizon = config.horizon_min();
    const auto steps = static_cast<std::size_t>(std::llround(horizon * 60.0 / config.dt_s));
    const std::size_t m = scheme.intervals();
    const double L = config.avg_trip_length_km;
    const double v_free = curve.free_flow_speed();
    const double n_jam = curve.k_jam * config.lane_km;

    std::vector<double> demand_noise;
    if (config.stochastic_noise_sd > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const double sd = config.stochastic_noise_sd;
        const auto minutes = static_cast<std::size_t>(std::ceil(horizon)) + 1;
        demand_noise.resize(minutes);
        for (double& f : demand_noise) f = std::exp(sd * gauss(rng) - 0.5 * sd * sd);
    }

    SimOutput out;
    out.k_bar.assign(m, 0.0);
    out.q_bar.assign(m, 0.0);
    std::vector<std::size_t> counts(m, 0);

    double n = config.initial_density * config.lane_km;
    out.initial_accumulation = n;
    std::size_t segment = 0;
    double segment_end = config.demand.front().duration_min;

    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * config.dt_s / 60.0;
        while (t >= segment_end && segment + 1 < config.demand.size()) {
            ++segment;
            segment_end += config.demand[segment].duration_min;
        }
        double demand = config.demand[segment].rate_vph;
        if (!demand_noise.empty()) demand *= demand_noise[static_cast<std::size_t>(t)];

        double eta = 0.0;
        double omega = 0.0;
        std::size_t h = m;
        if (t >= scheme.start_min && t < scheme.end_min()) {
            h = std::min(m - 1, static_cast<std::size_t>((t - scheme.start_min) / scheme.interval_min));
            eta = scheme.eta[h];
            omega = scheme.omega.empty() ? 0.0 : scheme.omega[h];
        }

        const double k = n / config.lane_km;
        const double q_base = flow_clipped(k, curve);
        const double speed = k > 0.0 ? q_base / k : v_free;
        const double delay = speed > 0.0 ? std::min(config.max_delay_h, L / speed - L / v_free)
                                         : config.max_delay_h;
        const double trip_toll = eta * L + omega * std::max(0.0, delay);

        NfdCurve effective = curve;
        if (config.shift.enabled && trip_toll > 0.0)
            effective = blend(curve, config.shift.shifted, std::min(1.0, trip_toll / config.shift.toll_ref));
        const double q = flow_clipped(k, effective);

        const double response = trip_toll > 0.0 ? std::exp(-config.toll_elasticity * trip_toll) : 1.0;
        const double inflow = std::min(demand * response * dt_h, std::max(0.0, n_jam - n));
        const double outflow = std::min(q * config.lane_km / L * dt_h, n);

        if (h < m) {
            out.k_bar[h] += k;
            out.q_bar[h] += q;
            ++counts[h];
        }
        if (s % config.series_stride == 0) out.series.push_back({t, n, k, q});

        n += inflow - outflow;
        out.total_inflow += inflow;
        out.total_outflow += outflow;
        if (!std::isfinite(n))
            throw SimulationError("reservoir state became non-finite at step " + std::to_string(s));
    }
    out.final_accumulation = n;

    std::vector<double> tau(scheme.eta);
    tau.insert(tau.end(), scheme.omega.begin(), scheme.omega.end());
    const double flow_amplitude = config.noise_amplitude * v_free;
    for (std::size_t h = 0; h < m; ++h) {
        if (counts[h] == 0) throw SimulationError("tolling interval shorter than one time step");
        out.k_bar[h] /= static_cast<double>(counts[h]);
        out.q_bar[h] /= static_cast<double>(counts[h]);
        if (config.noise_amplitude > 0.0) {
            out.k_bar[h] = std::max(0.0, apply_numerical_noise(out.k_bar[h], tau, config.noise_amplitude, seed, h));
            out.q_bar[h] = std::max(0.0, apply_numerical_noise(out.q_bar[h], tau, flow_amplitude, seed, m + h));
        }
    }
    return out;
}

double apply_numerical_noise(double value, std::span<const double> tau, double amplitude,
                             std::uint64_t seed, std::uint64_t channel)
{
    if (amplitude < 0.0) throw ConfigError("noise amplitude must be non-negative");
    if (amplitude == 0.0) return value;
    std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
    for (double t : tau) {
        const auto cell = static_cast<std::int64_t>(std::llround(t * 1e4));
        h = splitmix64(h ^ static_cast<std::uint64_t>(cell));
    }
    h = splitmix64(h ^ (channel * 0x9e3779b97f4a7c15ULL + 1));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
    return value + amplitude * (2.0 * u - 1.0);
}

std::pair<double, double> network_average(std::span<const LinkMeasurement> links)
{
    if (links.empty()) throw Error("network_average: no links");
    double w = 0.0, k = 0.0, q = 0.0;
    for (const auto& link : links) {
        if (!(link.lane_km > 0.0)) throw Error("network_average: lane-km must be positive");
        w += link.lane_km;
        k += link.lane_km * link.density;
        q += link.lane_km * link.flow;
    }
    return {k / w, q / w};
}

double objective_density(const SimOutput& out, double k_cr)
{
    if (out.k_bar.empty()) throw Error("objective_density: no tolling intervals");
    double sum = 0.0;
    for (double k : out.k_bar) sum += std::abs(k - k_cr);
    return sum / static_cast<double>(out.k_bar.size());
}

double objective_flow(const SimOutput& out)
{
    if (out.q_bar.empty()) throw Error("objective_flow: no tolling intervals");
    double sum = 0.0;
    for (double q : out.q_bar) sum += q;
    return sum / static_cast<double>(out.q_bar.size());
}

void write_series_csv(std::ostream& out, const SimOutput& sim)
{
    out << "t_min,n,K,Q\n";
    for (const auto& p : sim.series)
        out << io::format_number(p.t_min) << ',' << io::format_number(p.n) << ','
            << io::format_number(p.k) << ',' << io::format_number(p.q) << '\n';
}

// ---------------------------------------------------------------------------
// Toll problems

Bounds TollProblem::bounds() const
{
    DecisionVector lo(dimension(), 0.0);
    DecisionVector hi(dimension(), eta_max);
    if (delay_rates)
        std::fill(hi.begin() + static_cast<std::ptrdiff_t>(m_intervals), hi.end(), reservoir.value_of_time);
    return Bounds(std::move(lo), std::move(hi));
}

TollScheme TollProblem::scheme(std::span<const double> tau) const
{
    check_dimension(dimension(), tau.size(), "toll scheme");
    TollScheme s;
    s.start_min = tolling_start_min;
    s.interval_min = interval_min;
    s.eta.assign(tau.begin(), tau.begin() + static_cast<std::ptrdiff_t>(m_intervals));
    if (delay_rates) s.omega.assign(tau.begin() + static_cast<std::ptrdiff_t>(m_intervals), tau.end());
    return s;
}

SimOutput TollProblem::simulate(std::span<const double> tau, std::uint64_t seed) const
{
    return run_reservoir(reservoir, curve, scheme(tau), seed);
}

void TollProblem::validate() const
{
    curve.validate();
    reservoir.validate();
    if (m_intervals == 0) throw ConfigError("toll problem needs at least one interval");
    if (!(eta_max > 0.0)) throw ConfigError("toll problem needs eta_max > 0");
    scheme(DecisionVector(dimension(), 0.0)).validate();
    if (tolling_start_min + interval_min * static_cast<double>(m_intervals) > reservoir.horizon_min() + 1e-9)
        throw ConfigError("tolling horizon exceeds the simulation horizon");
}

TollProblem simple_fixture()
{
    TollProblem p;
    p.name = "simple";
    p.curve = {15.0, 15.0, 80.0, 600.0, NfdShape::triangular};
    p.reservoir.demand = {{30.0, 48000.0}, {30.0, 68000.0}, {30.0, 78000.0}, {30.0, 40000.0}};
    p.reservoir.avg_trip_length_km = 5.0;
    p.reservoir.lane_km = 500.0;
    p.reservoir.toll_elasticity = 0.08;
    p.reservoir.noise_amplitude = 0.02;
    p.tolling_start_min = 30.0;
    p.interval_min = 30.0;
    p.m_intervals = 2;
    p.delay_rates = false;
    p.eta_max = 1.0;
    p.k_cr = 15.0;
    return p;
}

TollProblem complex_fixture()
{
    TollProblem p;
    p.name = "complex";
    p.curve = {20.0, 30.0, 90.0, 600.0, NfdShape::trapezoidal};
    p.reservoir.demand = {{30.0, 64000.0}, {15.0, 70000.0}, {15.0, 72000.0}, {15.0, 74000.0},
                          {15.0, 76000.0}, {15.0, 76000.0}, {15.0, 74000.0}, {15.0, 72000.0},
                          {15.0, 70000.0}, {30.0, 40000.0}};
    p.reservoir.avg_trip_length_km = 5.0;
    p.reservoir.lane_km = 500.0;
    p.reservoir.toll_elasticity = 0.15;
    p.reservoir.noise_amplitude = 0.3;
    p.reservoir.stochastic_noise_sd = 0.02;
    p.reservoir.shift.enabled = false;
    p.reservoir.shift.shifted = {10.0, 15.0, 60.0, 600.0, NfdShape::trapezoidal};
    p.reservoir.shift.toll_ref = 0.5;
    p.tolling_start_min = 30.0;
    p.interval_min = 15.0;
    p.m_intervals = 8;
    p.delay_rates = true;
    p.eta_max = 1.0;
    p.k_cr = 25.0;
    return p;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

json curve_json(const NfdCurve& c)
{
    return {{"k_cr_low", c.k_cr_low},
            {"k_cr_high", c.k_cr_high},
            {"k_jam", c.k_jam},
            {"q_max", c.q_max},
            {"shape", c.shape == NfdShape::triangular ? "triangular" : "trapezoidal"}};
}

NfdCurve curve_from(const json& j)
{
    NfdCurve c;
    c.k_cr_low = j.at("k_cr_low").get<double>();
    c.k_cr_high = j.at("k_cr_high").get<double>();
    c.k_jam = j.at("k_jam").get<double>();
    c.q_max = j.at("q_max").get<double>();
    const std::string shape = j.at("shape").get<std::string>();
    if (shape == "triangular") c.shape = NfdShape::triangular;
    else if (shape == "trapezoidal") c.shape = NfdShape::trapezoidal;
    else throw ConfigError("unknown NFD shape '" + shape + "'");
    return c;
}

} // namespace

std::string to_json(const TollProblem& p)
{
    json demand = json::array();
    for (const auto& seg : p.reservoir.demand)
        demand.push_back({{"duration_min", seg.duration_min}, {"rate_vph", seg.rate_vph}});
    const auto& r = p.reservoir;
    json j = {
        {"name", p.name},
        {"curve", curve_json(p.curve)},
        {"reservoir",
         {{"demand", demand},
          {"avg_trip_length_km", r.avg_trip_length_km},
          {"lane_km", r.lane_km},
          {"toll_elasticity", r.toll_elasticity},
          {"value_of_time", r.value_of_time},
          {"dt_s", r.dt_s},
          {"initial_density", r.initial_density},
          {"max_delay_h", r.max_delay_h},
          {"noise_amplitude", r.noise_amplitude},
          {"stochastic_noise_sd", r.stochastic_noise_sd},
          {"series_stride", r.series_stride},
          {"nfd_shift",
           {{"enabled", r.shift.enabled}, {"curve", curve_json(r.shift.shifted)}, {"toll_ref", r.shift.toll_ref}}}}},
        {"tolling",
         {{"start_min", p.tolling_start_min},
          {"interval_min", p.interval_min},
          {"intervals", p.m_intervals},
          {"delay_rates", p.delay_rates},
          {"eta_max", p.eta_max}}},
        {"k_cr", p.k_cr}};
    return j.dump(2) + "\n";
}

TollProblem problem_from_json(const std::string& text)
{
    try {
        const json j = json::parse(text);
        TollProblem p;
        p.name = j.at("name").get<std::string>();
        p.curve = curve_from(j.at("curve"));
        const json& r = j.at("reservoir");
        for (const auto& seg : r.at("demand"))
            p.reservoir.demand.push_back({seg.at("duration_min").get<double>(), seg.at("rate_vph").get<double>()});
        p.reservoir.avg_trip_length_km = r.at("avg_trip_length_km").get<double>();
        p.reservoir.lane_km = r.at("lane_km").get<double>();
        p.reservoir.toll_elasticity = r.at("toll_elasticity").get<double>();
        p.reservoir.value_of_time = r.value("value_of_time", 15.0);
        p.reservoir.dt_s = r.value("dt_s", 1.0);
        p.reservoir.initial_density = r.value("initial_density", 0.0);
        p.reservoir.max_delay_h = r.value("max_delay_h", 1.0);
        p.reservoir.noise_amplitude = r.value("noise_amplitude", 0.0);
        p.reservoir.stochastic_noise_sd = r.value("stochastic_noise_sd", 0.0);
        p.reservoir.series_stride = r.value("series_stride", std::size_t{60});
        if (r.contains("nfd_shift")) {
            const json& s = r.at("nfd_shift");
            p.reservoir.shift.enabled = s.at("enabled").get<bool>();
            p.reservoir.shift.shifted = curve_from(s.at("curve"));
            p.reservoir.shift.toll_ref = s.at("toll_ref").get<double>();
        }
        const json& t = j.at("tolling");
        p.tolling_start_min = t.at("start_min").get<double>();
        p.interval_min = t.at("interval_min").get<double>();
        p.m_intervals = t.at("intervals").get<std::size_t>();
        p.delay_rates = t.at("delay_rates").get<bool>();
        p.eta_max = t.value("eta_max", 1.0);
        p.k_cr = j.value("k_cr", 15.0);
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("toll problem JSON: ") + e.what());
    }
}

TollProblem load_problem(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return problem_from_json(text.str());
}

Objective make_objective(const TollProblem& problem, TollObjective kind)
{
    problem.validate();
    return [problem, kind](const DecisionVector& tau, std::uint64_t seed) {
        SimOutput out = problem.simulate(tau, seed);
        ObjectiveValue v;
        v.value = kind == TollObjective::density ? objective_density(out, problem.k_cr) : objective_flow(out);
        v.aux = SimAux{std::move(out.k_bar), std::move(out.q_bar)};
        return v;
    };
}

} // namespace sbo::mfd
