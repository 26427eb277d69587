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

#include "sbo/bench.hpp"
#include "sbo/constraints.hpp"
#include "sbo/direct.hpp"
#include "sbo/kriging.hpp"
#include "sbo/mfdsim.hpp"
#include "sbo/pi_control.hpp"
#include "sbo/spsa.hpp"
#include "sbo/stats.hpp"
#include "sbo/test_functions.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sbo;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id = 0;
    std::string title;
    double time_limit_s = 0.0;
    std::function<Outcome()> check;
};

std::string fmt(const char* pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

VectorXd row(const MatrixXd& X, Eigen::Index i) { return X.row(i).transpose(); }

double smooth2d(const VectorXd& x) { return std::sin(3.0 * x[0]) + std::cos(2.0 * x[1]) + x[0] * x[1]; }

VectorXd responses(const MatrixXd& X)
{
    VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) y[i] = smooth2d(row(X, i));
    return y;
}

Objective plain(std::function<double(const DecisionVector&)> f)
{
    return [f](const DecisionVector& t, std::uint64_t) { return ObjectiveValue{f(t), {}}; };
}

double median_of(std::vector<double> v) { return stats::median(v); }

// ---------------------------------------------------------------------------
// Surrogate

Outcome interpolation_limit()
{
    const auto X = kriging::maximin_lhs(11, 2, 3).points;
    const VectorXd y = responses(X);
    kriging::FitConfig fc;
    fc.fixed_lambda = 0.0;
    const auto model = kriging::Model::fit(X, y, fc);
    double max_err = 0.0, max_s2 = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto p = model.predict(row(X, i));
        max_err = std::max(max_err, std::abs(p.y_hat - y[i]));
        max_s2 = std::max(max_s2, p.s2_hat);
    }
    return {model.params().lambda == 0.0 && max_err < 1e-8 && max_s2 < 1e-8,
            fmt("max |y_hat - y| = %.2e, max s2 = %.2e", max_err, max_s2)};
}

double ei_quadrature(double y_hat, double s, double y_min)
{
    using boost::math::quadrature::gauss_kronrod;
    auto integrand = [&](double y) {
        const double z = (y - y_hat) / s;
        return (y_min - y) * std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
    };
    return gauss_kronrod<double, 61>::integrate(integrand, -std::numeric_limits<double>::infinity(), y_min, 15,
                                                1e-13);
}

Outcome ei_equivalence()
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> mean(-5.0, 5.0), sd(0.05, 3.0), gap(-2.0, 3.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const double y_hat = mean(rng), s = sd(rng), y_min = y_hat + s * gap(rng);
        const double closed = kriging::expected_improvement(y_hat, s * s, y_min);
        const double reference = ei_quadrature(y_hat, s, y_min);
        worst = std::max(worst, std::abs(closed - reference) / reference);
    }
    return {worst < 1e-6, fmt("max relative error %.2e over 20 triples", worst)};
}

Outcome reinterpolation()
{
    const auto X = kriging::maximin_lhs(11, 2, 6).points;
    const VectorXd y = responses(X);
    kriging::FitConfig fc;
    double max_ri = 0.0, max_ei = 0.0;
    for (double lambda : {1e-6, 1e-2, 0.1}) {
        fc.fixed_lambda = lambda;
        const auto model = kriging::Model::fit(X, y, fc);
        const double y_min = y.minCoeff();
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            max_ri = std::max(max_ri, model.reinterp_error(row(X, i)));
            max_ei = std::max(max_ei, kriging::expected_improvement(model, row(X, i), y_min, true));
        }
    }
    return {max_ri < 1e-8 && max_ei == 0.0, fmt("max re-interpolated s2 %.2e, max EI at samples %.2e", max_ri, max_ei)};
}

// ---------------------------------------------------------------------------
// Stochastic approximation

Outcome spsa_gradient()
{
    auto squared = [](const DecisionVector& t) { return t[0] * t[0] + t[1] * t[1]; };
    const spsa::SearchSpace space2(Bounds::uniform(2, -2.0, 2.0), false);
    Evaluator ev2(plain(squared), Bounds::uniform(2, -2.0, 2.0), {8});
    std::vector<double> mean2(2, 0.0);
    for (double d1 : {-1.0, 1.0})
        for (double d2 : {-1.0, 1.0}) {
            const auto g = spsa::approx_gradient(ev2, space2, {1.0, 0.0}, 0.1, {d1, d2});
            mean2[0] += g.g_hat[0] / 4.0;
            mean2[1] += g.g_hat[1] / 4.0;
        }
    const bool exhaustive_ok = std::abs(mean2[0] - 2.0) < 1e-12 && std::abs(mean2[1]) < 1e-12;

    auto quartic = [](const DecisionVector& t) {
        double s = t[0] * t[0] * t[1] * t[1];
        for (double v : t) s += v * v * v * v;
        return s;
    };
    const DecisionVector x{0.5, -0.3, 0.8, 0.1, -0.6};
    std::vector<double> truth(5);
    for (std::size_t l = 0; l < 5; ++l) truth[l] = 4.0 * x[l] * x[l] * x[l];
    truth[0] += 2.0 * x[0] * x[1] * x[1];
    truth[1] += 2.0 * x[1] * x[0] * x[0];

    const std::size_t draws = 100000;
    const spsa::SearchSpace space5(Bounds::uniform(5, -1.0, 1.0), false);
    Evaluator ev5(plain(quartic), Bounds::uniform(5, -1.0, 1.0), {2 * draws});
    std::mt19937_64 rng(17);
    std::vector<double> sum(5, 0.0), sum_sq(5, 0.0);
    for (std::size_t k = 0; k < draws; ++k) {
        const auto g = spsa::approx_gradient(ev5, space5, x, 1e-3, spsa::perturbation(5, rng));
        for (std::size_t l = 0; l < 5; ++l) {
            sum[l] += g.g_hat[l];
            sum_sq[l] += g.g_hat[l] * g.g_hat[l];
        }
    }
    double worst_z = 0.0;
    for (std::size_t l = 0; l < 5; ++l) {
        const double m = sum[l] / draws;
        const double se = std::sqrt((sum_sq[l] / draws - m * m) / draws);
        worst_z = std::max(worst_z, std::abs(m - truth[l]) / se);
    }
    return {exhaustive_ok && worst_z <= 3.0,
            fmt("exhaustive mean [%.15g, %.3g]; Monte Carlo max |bias|/SE = %.2f", mean2[0], mean2[1], worst_z)};
}

Outcome spsa_convergence()
{
    const spsa::SpsaGains defaults;
    const bool defaults_ok = defaults.a == 0.1 && defaults.big_a == 5.0 && defaults.alpha == 0.602 &&
                             defaults.c == 0.1 && defaults.gamma == 0.101;
    testfn::NoisyQuadratic f;
    std::vector<double> errors;
    bool iterations_ok = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Evaluator ev(testfn::make_objective(f), f.bounds(), {400});
        spsa::SpsaConfig cfg;
        cfg.seed = seed;
        const auto r = spsa::run_spsa(ev, cfg);
        iterations_ok = iterations_ok && r.iterations == 200;
        double d = 0.0;
        for (std::size_t l = 0; l < 2; ++l) d += (r.final_tau[l] - f.center[l]) * (r.final_tau[l] - f.center[l]);
        errors.push_back(std::sqrt(d));
    }
    const double med = median_of(errors);
    return {defaults_ok && iterations_ok && med < 0.02, fmt("median final error %.4f over 20 seeds", med)};
}

// ---------------------------------------------------------------------------
// Dividing rectangles

bool odd_over_power_of_three(double u)
{
    for (int p = 0; p <= 30; ++p) {
        const double scaled = u * 2.0 * std::pow(3.0, p);
        const double nearest = std::round(scaled);
        if (std::abs(scaled - nearest) < 1e-9 * std::max(1.0, scaled) && std::fmod(nearest, 2.0) == 1.0) return true;
    }
    return false;
}

Outcome direct_counts()
{
    testfn::NarrowStrip f;
    Evaluator ev(testfn::make_objective(f), f.bounds(), {1000000});
    direct::DirectConfig cfg;
    cfg.max_iterations = 20;
    cfg.record_iterations = true;
    const auto r = direct::run_direct(ev, cfg);

    const std::vector<DecisionVector> first{{0.5, 0.5}, {1.0 / 6, 0.5}, {5.0 / 6, 0.5}, {0.5, 1.0 / 6}, {0.5, 5.0 / 6}};
    bool first_ok = r.trace.size() >= 5;
    for (std::size_t k = 0; k < 5 && first_ok; ++k) {
        bool found = false;
        for (std::size_t i = 0; i < 5; ++i) {
            const auto& t = r.trace.records()[i].tau;
            found = found || (std::abs(t[0] - first[k][0]) < 1e-12 && std::abs(t[1] - first[k][1]) < 1e-12);
        }
        first_ok = found;
    }

    double worst_volume = 0.0;
    bool centers_ok = true;
    for (const auto& dump : r.dumps) {
        double volume = 0.0;
        for (const auto& rect : dump.rects) {
            double v = 1.0;
            for (int dp : rect.depth) v *= std::pow(3.0, -dp);
            volume += v;
            for (std::size_t l = 0; l < rect.depth.size(); ++l) {
                const double expected = static_cast<double>(2 * rect.index[l] + 1) / (2.0 * std::pow(3.0, rect.depth[l]));
                const double c = rect.center()[l];
                centers_ok = centers_ok && std::abs(c - expected) < 1e-12 && odd_over_power_of_three(c);
            }
        }
        worst_volume = std::max(worst_volume, std::abs(volume - 1.0));
    }
    for (const auto& rec : r.trace.records())
        for (double u : rec.tau) centers_ok = centers_ok && odd_over_power_of_three(u);

    const bool ok = first_ok && r.dumps.size() == 20 && worst_volume < 1e-12 && centers_ok;
    return {ok, fmt("first five points %s, %zu iterations, max |volume - 1| = %.1e, centers %s",
                    first_ok ? "match" : "differ", r.dumps.size(), worst_volume, centers_ok ? "valid" : "invalid")};
}

Outcome direct_global()
{
    testfn::NarrowStrip f;
    Evaluator ev(testfn::make_objective(f), f.bounds(), {700});
    const auto r = direct::run_direct(ev, direct::DirectConfig{});
    const auto& curve = r.trace.best_curve();
    const double target = 1.01 * f.minimum();
    std::size_t reached = 0;
    for (std::size_t i = 0; i < curve.size() && reached == 0; ++i)
        if (curve[i] <= target) reached = i + 1;
    const double best = curve.back();
    return {r.trace.size() <= 700 && best <= target,
            fmt("best %.5f (optimum %.1f) first within 1%% at evaluation %zu of %zu, %zu iterations", best,
                f.minimum(), reached, r.trace.size(), r.iterations)};
}

// ---------------------------------------------------------------------------
// Feedback control

pi::PIResult run_plant(double p_p, double p_i)
{
    testfn::LinearPlant plant;
    Evaluator ev(testfn::make_objective(plant), plant.bounds(), {50});
    pi::PIConfig cfg;
    cfg.p_p = p_p;
    cfg.p_i = p_i;
    cfg.k_cr = plant.k_cr;
    cfg.n_max = 50;
    cfg.m_intervals = plant.intervals;
    return pi::run_pi(ev, cfg);
}

double successive_difference_variance(const pi::PIResult& r)
{
    std::vector<double> d;
    for (std::size_t i = 2; i < r.log.size(); ++i) d.push_back(r.log[i].tau[0] - r.log[i - 1].tau[0]);
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    double var = 0.0;
    for (double v : d) var += (v - mean) * (v - mean);
    return var / static_cast<double>(d.size());
}

Outcome pi_loop()
{
    const testfn::LinearPlant plant;
    const auto smooth = run_plant(0.02, 0.005);
    const auto aggressive = run_plant(0.1, 0.03);
    std::size_t settled_at = 0;
    for (std::size_t i = 0; i < smooth.log.size() && settled_at == 0; ++i) {
        bool all = true;
        for (double k : smooth.log[i].k_bar) all = all && std::abs(k - plant.k_cr) < 0.5;
        if (all) settled_at = i + 1;
    }
    double final_dev = 0.0;
    for (double k : smooth.log.back().k_bar) final_dev = std::max(final_dev, std::abs(k - plant.k_cr));
    const double v_smooth = successive_difference_variance(smooth);
    const double v_aggr = successive_difference_variance(aggressive);
    const bool ok = smooth.trace.size() <= 50 && settled_at > 0 && final_dev < 0.5 && v_aggr >= 3.0 * v_smooth;
    return {ok, fmt("|K - K_cr| < 0.5 from evaluation %zu (final %.2e); variance ratio %.1f", settled_at, final_dev,
                    v_aggr / v_smooth)};
}

// ---------------------------------------------------------------------------
// Benchmarks on the toll fixtures

std::map<std::string, bench::RunReport> complex_reports;

const bench::RunReport& complex_report(const std::string& solver)
{
    auto it = complex_reports.find(solver);
    if (it != complex_reports.end()) return it->second;
    auto cfg = bench::parse_config(R"({"problem": "complex", "solver": ")" + solver +
                                   R"(", "budget": 100, "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]})");
    cfg.write_files = false;
    return complex_reports.emplace(solver, bench::run_experiment(cfg)).first->second;
}

/// Independent check of the interval-to-interval jump limits.
double max_jump_excess(const DecisionVector& tau, std::size_t m, double alpha, double beta)
{
    double excess = 0.0;
    for (std::size_t h = 0; h + 1 < m; ++h) {
        excess = std::max(excess, std::abs(tau[h + 1] - tau[h]) - alpha);
        if (tau.size() == 2 * m) excess = std::max(excess, std::abs(tau[m + h + 1] - tau[m + h]) - beta);
    }
    return excess;
}

Outcome constraint_feasibility()
{
    const double tol = 1e-6;
    bool ok = true;
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t checked = 0;
    for (const char* solver : {"rk", "direct", "spsa"}) {
        const auto& report = complex_report(solver);
        ok = ok && report.constrained;
        for (const auto& s : report.seeds) {
            ok = ok && s.feasible && s.best_tau.size() == 16;
            if (s.best_tau.size() != 16) continue;
            const double excess = max_jump_excess(s.best_tau, 8, 0.33, 5.0);
            worst = std::max(worst, excess);
            ok = ok && excess <= tol;
            ++checked;
        }
    }
    return {ok && checked == 30, fmt("%zu final solutions, max jump excess %.3g", checked, worst)};
}

Outcome cross_comparison()
{
    const auto& rk = complex_report("rk");
    const auto& sp = complex_report("spsa");
    const auto& di = complex_report("direct");
    const auto rk_final = rk.final_values();
    const auto di_final = di.final_values();
    const auto test = stats::mann_whitney_greater(rk_final, di_final);
    const bool ok = rk.final_median > sp.final_median && sp.final_median > di.final_median && test.p_value < 0.05;
    return {ok, fmt("median flow RK %.1f, SPSA %.1f, DIRECT %.1f; RK > DIRECT U = %.1f p = %.2e", rk.final_median,
                    sp.final_median, di.final_median, test.u, test.p_value)};
}

Outcome simple_parity()
{
    bench::ExperimentConfig base;
    base.problem = bench::ProblemKind::simple;
    const auto problem = bench::make_problem(base);
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<double> untolled;
    for (auto s : seeds) untolled.push_back(problem.objective(DecisionVector(problem.bounds.dimension(), 0.0), s).value);
    const double reference = median_of(untolled);
    bool ok = true;
    std::string detail = fmt("no-toll %.2f;", reference);
    for (const char* solver : {"pi", "rk", "direct", "spsa"}) {
        auto cfg = bench::parse_config(R"({"problem": "simple", "solver": ")" + std::string(solver) +
                                       R"(", "budget": 100, "seeds": [1, 2, 3, 4, 5]})");
        cfg.write_files = false;
        const auto r = bench::run_experiment(cfg);
        bool within_budget = true;
        for (const auto& s : r.seeds) within_budget = within_budget && s.evaluations <= 100;
        const double ratio = r.final_median / reference;
        ok = ok && within_budget && ratio < 0.1;
        detail += fmt(" %s %.1f%%", solver, 100.0 * ratio);
    }
    return {ok, detail};
}

Outcome nfd_shift()
{
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    std::vector<double> gaps;
    std::string detail;
    std::map<std::string, std::vector<double>> flows;
    for (const char* objective : {"density", "flow"}) {
        auto cfg = bench::parse_config(R"({"problem": "complex", "solver": "rk", "budget": 100, "seeds": [1, 2, 3],
                                          "nfd_shift": true, "k_cr": 25, "objective": ")" +
                                       std::string(objective) + "\"}");
        cfg.write_files = false;
        const auto problem = bench::make_problem(cfg);
        const auto r = bench::run_experiment(cfg);
        for (const auto& s : r.seeds) {
            if (!s.feasible) {
                flows[objective].push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            flows[objective].push_back(mfd::objective_flow(problem.toll->simulate(s.best_tau, s.seed)));
        }
    }
    const double q_density = median_of(flows["density"]);
    const double q_flow = median_of(flows["flow"]);
    const double gap = (q_flow - q_density) / q_flow;
    return {gap >= 0.15, fmt("median Q at density optimum %.1f, at flow optimum %.1f, gap %.1f%%", q_density, q_flow,
                             100.0 * gap)};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "kriging interpolation limit", 1.0, interpolation_limit},
        {2, "closed-form EI equals quadrature", 1.0, ei_equivalence},
        {3, "re-interpolation removes sample uncertainty", 1.0, reinterpolation},
        {4, "SPSA gradient estimate", 10.0, spsa_gradient},
        {5, "SPSA convergence with default gains", 10.0, spsa_convergence},
        {6, "DIRECT first division and tiling", 1.0, direct_counts},
        {7, "DIRECT finds the narrow strip", 30.0, direct_global},
        {8, "PI loop on the linear plant", 5.0, pi_loop},
        {10, "complex fixture ordering RK > SPSA > DIRECT", 600.0, cross_comparison},
        {9, "final complex solutions respect smoothing limits", 1.0, constraint_feasibility},
        {11, "simple fixture parity across solvers", 300.0, simple_parity},
        {12, "density set point lowers network flow", 300.0, nfd_shift},
    };

    std::map<int, std::string> lines;
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.check();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = elapsed < c.time_limit_s;
        const bool pass = out.pass && in_time;
        failures += pass ? 0 : 1;
        const std::string line = fmt("%s criterion %2d: %s | %s | %.2fs (limit %.0fs)%s", pass ? "PASS" : "FAIL", c.id,
                                     c.title.c_str(), out.detail.c_str(), elapsed, c.time_limit_s,
                                     in_time ? "" : " over time");
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
        lines[c.id] = line;
    }
    std::printf("\nsummary (%d failed):\n", failures);
    for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
    return failures == 0 ? 0 : 1;
}
