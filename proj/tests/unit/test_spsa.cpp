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
#include "sbo/spsa.hpp"
#include "sbo/test_functions.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace sbo;
using namespace sbo::spsa;

namespace {

Objective plain(std::function<double(const DecisionVector&)> f)
{
    return [f](const DecisionVector& t, std::uint64_t) { return ObjectiveValue{f(t), {}}; };
}

double squared_norm(const DecisionVector& t)
{
    double s = 0.0;
    for (double v : t) s += v * v;
    return s;
}

double distance(const DecisionVector& a, const DecisionVector& b)
{
    double s = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) s += (a[l] - b[l]) * (a[l] - b[l]);
    return std::sqrt(s);
}

} // namespace

TEST_CASE("Bernoulli perturbations")
{
    std::mt19937_64 rng(17);
    const std::size_t draws = 100000;
    std::vector<double> sum(3, 0.0);
    for (std::size_t k = 0; k < draws; ++k) {
        const auto d = perturbation(3, rng);
        REQUIRE(d.size() == 3);
        for (std::size_t l = 0; l < 3; ++l) {
            REQUIRE((d[l] == 1.0 || d[l] == -1.0));
            REQUIRE(1.0 / d[l] == d[l]);
            sum[l] += d[l];
        }
    }
    for (double s : sum) CHECK(std::abs(s / draws) < 0.02);
}

TEST_CASE("gain sequences decrease")
{
    SpsaGains g;
    for (std::size_t i = 1; i < 500; ++i) {
        CHECK(g.a_i(i + 1) < g.a_i(i));
        CHECK(g.c_i(i + 1) < g.c_i(i));
        CHECK(g.a_i(i) > 0.0);
    }
    CHECK(g.a_i(1) == doctest::Approx(0.1 / std::pow(6.0, 0.602)));
    CHECK(g.c_i(1) == doctest::Approx(0.1 / std::pow(2.0, 0.101)));
    SpsaGains bad;
    bad.c = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("gradient estimate examples")
{
    const SearchSpace space(Bounds::uniform(2, -2.0, 2.0), false);
    Evaluator ev(plain(squared_norm), Bounds::uniform(2, -2.0, 2.0), {100});
    const auto g = approx_gradient(ev, space, {1.0, 0.0}, 0.1, {1.0, 1.0});
    CHECK(ev.used() == 2);
    CHECK(g.y_plus == doctest::Approx(1.22));
    CHECK(g.y_minus == doctest::Approx(0.82));
    CHECK(g.g_hat[0] == doctest::Approx(2.0));
    CHECK(g.g_hat[1] == doctest::Approx(2.0));
    CHECK_FALSE(g.clamped);

    std::vector<double> mean(2, 0.0);
    for (double d1 : {-1.0, 1.0})
        for (double d2 : {-1.0, 1.0}) {
            const auto s = approx_gradient(ev, space, {1.0, 0.0}, 0.1, {d1, d2});
            mean[0] += s.g_hat[0] / 4.0;
            mean[1] += s.g_hat[1] / 4.0;
        }
    CHECK(mean[0] == doctest::Approx(2.0));
    CHECK(std::abs(mean[1]) < 1e-12);
}

TEST_CASE("linear functions")
{
    const std::vector<double> b{0.7, -1.3, 2.1, 0.4, -0.2};
    auto f = [&](const DecisionVector& t) {
        double s = 0.0;
        for (std::size_t l = 0; l < t.size(); ++l) s += b[l] * t[l];
        return s;
    };

    // One input: the estimate is the slope for either sign.
    const SearchSpace line(Bounds::uniform(1, -1.0, 1.0), false);
    Evaluator ev1(plain(f), Bounds::uniform(1, -1.0, 1.0), {4});
    for (double d : {-1.0, 1.0}) CHECK(approx_gradient(ev1, line, {0.3}, 0.05, {d}).g_hat[0] == doctest::Approx(b[0]));

    // Several inputs: each draw gives (b . delta) delta, and the average over all
    // sign patterns is b.
    const SearchSpace space(Bounds::uniform(5, -1.0, 1.0), false);
    Evaluator ev(plain(f), Bounds::uniform(5, -1.0, 1.0), {64});
    std::vector<double> mean(5, 0.0);
    for (int pattern = 0; pattern < 32; ++pattern) {
        std::vector<double> delta(5);
        for (std::size_t l = 0; l < 5; ++l) delta[l] = (pattern >> l) & 1 ? 1.0 : -1.0;
        const std::size_t before = ev.used();
        const auto g = approx_gradient(ev, space, {0.1, 0.2, -0.3, 0.0, 0.5}, 0.05, delta);
        CHECK(ev.used() - before == 2);
        double dot = 0.0;
        for (std::size_t l = 0; l < 5; ++l) dot += b[l] * delta[l];
        for (std::size_t l = 0; l < 5; ++l) {
            CHECK(g.g_hat[l] == doctest::Approx(dot * delta[l]).epsilon(1e-9));
            mean[l] += g.g_hat[l] / 32.0;
        }
    }
    for (std::size_t l = 0; l < 5; ++l) CHECK(mean[l] == doctest::Approx(b[l]).epsilon(1e-9));
}

TEST_CASE("gradient estimate is unbiased on a quadratic")
{
    auto f = [](const DecisionVector& t) { return t[0] * t[0] + 3.0 * t[0] * t[1] + 2.0 * t[1] * t[1] - t[1]; };
    const DecisionVector x{0.2, -0.4};
    const std::vector<double> truth{2.0 * 0.2 + 3.0 * -0.4, 3.0 * 0.2 + 4.0 * -0.4 - 1.0};
    const SearchSpace space(Bounds::uniform(2, -1.0, 1.0), false);
    const std::size_t draws = 100000;
    Evaluator ev(plain(f), Bounds::uniform(2, -1.0, 1.0), {2 * draws});
    std::mt19937_64 rng(11);
    std::vector<double> sum(2, 0.0), sum_sq(2, 0.0);
    for (std::size_t k = 0; k < draws; ++k) {
        const auto g = approx_gradient(ev, space, x, 0.1, perturbation(2, rng));
        for (std::size_t l = 0; l < 2; ++l) {
            sum[l] += g.g_hat[l];
            sum_sq[l] += g.g_hat[l] * g.g_hat[l];
        }
    }
    for (std::size_t l = 0; l < 2; ++l) {
        const double mean = sum[l] / draws;
        const double se = std::sqrt((sum_sq[l] / draws - mean * mean) / draws);
        CHECK(std::abs(mean - truth[l]) <= 3.0 * se);
    }
}

TEST_CASE("perturbed points outside the bounds are clamped")
{
    const SearchSpace space(Bounds::unit(2), false);
    Evaluator ev(plain(squared_norm), Bounds::unit(2), {4});
    const auto g = approx_gradient(ev, space, {0.95, 0.5}, 0.1, {1.0, -1.0});
    CHECK(g.clamped);
    CHECK(ev.trace().records()[0].tau[0] == 1.0);
    CHECK(g.g_hat[0] == doctest::Approx((g.y_plus - g.y_minus) / 0.2));
    CHECK_THROWS_AS(approx_gradient(ev, space, {0.5, 0.5}, 0.0, {1.0, 1.0}), ConfigError);
}

TEST_CASE("update step examples")
{
    const SearchSpace space(Bounds::unit(2), false);
    SpsaState st;
    st.iteration = 4;
    st.x = {0.5, 0.5};
    const auto same = spsa_step(st, {0.0, 0.0}, space);
    CHECK(same.x == st.x);
    CHECK(same.iteration == 5);

    SpsaState fixed;
    fixed.x = {0.5, 0.5};
    fixed.gains.a = 0.05;
    fixed.gains.big_a = 0.0;
    fixed.gains.alpha = 0.0;
    const auto next = spsa_step(fixed, {2.0, 2.0}, space);
    CHECK(next.x[0] == doctest::Approx(0.4));
    CHECK(next.x[1] == doctest::Approx(0.4));

    const auto low = spsa_step(fixed, {100.0, -100.0}, space);
    CHECK(low.x == std::vector<double>{0.0, 1.0});
    CHECK_THROWS_AS(spsa_step(fixed, {std::nan(""), 0.0}, space), EvaluationError);
}

TEST_CASE("budget of two gives one iteration")
{
    testfn::NoisyQuadratic f;
    Evaluator ev(testfn::make_objective(f), f.bounds(), {2});
    const auto r = run_spsa(ev, SpsaConfig{});
    CHECK(r.iterations == 1);
    CHECK(r.trace.size() == 2);
    Evaluator one(testfn::make_objective(f), f.bounds(), {1});
    CHECK_THROWS_AS(run_spsa(one, SpsaConfig{}), ConfigError);
}

TEST_CASE("two evaluations per iteration in any dimension")
{
    for (std::size_t m : {1u, 2u, 7u}) {
        testfn::NoisyQuadratic f;
        f.center.assign(m, 0.4);
        Evaluator ev(testfn::make_objective(f), f.bounds(), {41});
        const auto r = run_spsa(ev, SpsaConfig{});
        CHECK(r.iterations == 20);
        CHECK(r.trace.size() == 2 * r.iterations);
        CHECK(r.log.size() == r.iterations);
    }
}

TEST_CASE("converges on the noiseless quadratic")
{
    testfn::NoisyQuadratic f;
    std::vector<double> dist;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Evaluator ev(testfn::make_objective(f), f.bounds(), {400});
        SpsaConfig cfg;
        cfg.seed = seed;
        const auto r = run_spsa(ev, cfg);
        CHECK(r.iterations == 200);
        dist.push_back(distance(r.final_tau, f.center));
    }
    std::nth_element(dist.begin(), dist.begin() + 10, dist.end());
    CHECK(dist[10] < 0.02);
}

TEST_CASE("gradient scale only rescales the step")
{
    testfn::NarrowStrip f;
    auto run = [&](double a, double scale) {
        Evaluator ev(testfn::make_objective(f), f.bounds(), {60});
        SpsaConfig cfg;
        cfg.gains.a = a;
        cfg.gradient_scale = scale;
        cfg.seed = 8;
        return run_spsa(ev, cfg);
    };
    const auto x = run(0.1, 0.25);
    const auto y = run(0.1 * 0.25, 1.0);
    REQUIRE(x.trace.size() == y.trace.size());
    for (std::size_t i = 0; i < x.trace.size(); ++i) CHECK(x.trace.records()[i].tau == y.trace.records()[i].tau);
    CHECK(x.final_tau == y.final_tau);
}

TEST_CASE("best point comes from the perturbed evaluations")
{
    testfn::NoisyQuadratic f;
    Evaluator ev(testfn::make_objective(f), f.bounds(), {30});
    SpsaConfig cfg;
    cfg.seed = 2;
    const auto r = run_spsa(ev, cfg);
    const auto best = best_so_far(r.trace, Sense::minimize);
    CHECK(r.best_tau == best.tau);
    CHECK(r.best_score == best.value);
}

TEST_CASE("small-gradient stop")
{
    Evaluator ev(plain([](const DecisionVector&) { return 3.0; }), Bounds::unit(2), {100});
    SpsaConfig cfg;
    cfg.stop.g_tol = 1e-9;
    cfg.stop.k_stall = 5;
    const auto r = run_spsa(ev, cfg);
    CHECK(r.iterations == 5);
    CHECK(r.trace.size() == 10);
}

TEST_CASE("final evaluation is optional")
{
    testfn::NoisyQuadratic f;
    Evaluator ev(testfn::make_objective(f), f.bounds(), {11});
    SpsaConfig cfg;
    cfg.evaluate_final = true;
    const auto r = run_spsa(ev, cfg);
    CHECK(r.trace.size() == 11);
    CHECK(r.trace.records().back().tau == r.final_tau);
}

TEST_CASE("penalty enters the scores but not the trace")
{
    SmoothingSpec spec;
    spec.m_intervals = 2;
    spec.delay_rates = false;
    const PenaltyHook hook{spec, PenaltyConfig{5.0, 2}};
    testfn::NoisyQuadratic f;
    f.center = {0.0, 1.0};
    Evaluator ev(testfn::make_objective(f), f.bounds(), {40});
    SpsaConfig cfg;
    cfg.penalty = hook;
    cfg.tau0 = {0.1, 0.9};
    const auto r = run_spsa(ev, cfg);
    for (std::size_t i = 0; i < r.log.size(); ++i) {
        const auto& plus = r.trace.records()[2 * i];
        const auto& minus = r.trace.records()[2 * i + 1];
        CHECK(plus.eval.value == doctest::Approx(f(plus.tau, 0)));
        CHECK(r.log[i].y_plus == doctest::Approx(plus.eval.value + hook.cost(plus.tau)));
        CHECK(r.log[i].y_minus == doctest::Approx(minus.eval.value + hook.cost(minus.tau)));
    }
}

TEST_CASE("iteration log layout")
{
    testfn::NoisyQuadratic f;
    Evaluator ev(testfn::make_objective(f), f.bounds(), {6});
    const auto r = run_spsa(ev, SpsaConfig{});
    std::ostringstream out;
    write_log_csv(out, r.log);
    const std::string text = out.str();
    CHECK(text.rfind("i,a_i,c_i,delta_1,delta_2,y_plus,y_minus,g_norm,boundary_bias,tau_next_1,tau_next_2\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("a tiny perturbation gets lost in non-smooth output noise")
{
    auto problem = mfd::simple_fixture();
    problem.reservoir.noise_amplitude = 1.0;
    auto clean = problem;
    clean.reservoir.noise_amplitude = 0.0;
    const auto objective = mfd::make_objective(problem, mfd::TollObjective::density);
    auto successes = [&](double c) {
        int hits = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            Evaluator ev(objective, problem.bounds(), {100, Sense::minimize, seed});
            SpsaConfig cfg;
            cfg.gains.c = c;
            cfg.tau0 = {0.75, 0.75};
            cfg.gradient_scale = 0.2;
            cfg.seed = seed;
            const auto r = run_spsa(ev, cfg);
            if (mfd::objective_density(clean.simulate(r.final_tau, seed), clean.k_cr) < 1.0) ++hits;
        }
        return hits;
    };
    CHECK(successes(0.1) > successes(0.025));
}
