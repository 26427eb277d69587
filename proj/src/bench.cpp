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
#include "sbo/direct.hpp"
#include "sbo/io.hpp"
#include "sbo/kriging.hpp"
#include "sbo/pi_control.hpp"
#include "sbo/spsa.hpp"
#include "sbo/stats.hpp"
#include "sbo/test_functions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace sbo::bench {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFeasTol = 1e-6;

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "'");
    }
}

std::string seed_file(const char* stem, std::uint64_t seed, const char* ext)
{
    return std::string(stem) + "_seed" + std::to_string(seed) + ext;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    auto out = io::open_output(path);
    out << text;
    if (!out) throw Error("failed to write '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

/// Quantile over the finite entries; NaN when there are none.
double finite_quantile(const std::vector<double>& values, double p)
{
    std::vector<double> v;
    for (double x : values)
        if (std::isfinite(x)) v.push_back(x);
    return v.empty() ? kNaN : stats::quantile(v, p);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json curve_json(const std::vector<double>& curve)
{
    json a = json::array();
    for (double v : curve) a.push_back(number_or_null(v));
    return a;
}

std::vector<double> curve_from(const json& j)
{
    std::vector<double> out;
    for (const auto& v : j) out.push_back(number_from(v));
    return out;
}

/// Carry-forward extension of a best curve to `length` points.
std::vector<double> extend(std::vector<double> curve, std::size_t length)
{
    const double last = curve.empty() ? kNaN : curve.back();
    if (curve.size() < length) curve.resize(length, last);
    return curve;
}

} // namespace

const char* to_string(ProblemKind kind)
{
    switch (kind) {
    case ProblemKind::simple: return "simple";
    case ProblemKind::complex: return "complex";
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::strip: return "strip";
    }
    return "?";
}

const char* to_string(SolverKind kind)
{
    switch (kind) {
    case SolverKind::pi: return "pi";
    case SolverKind::rk: return "rk";
    case SolverKind::direct: return "direct";
    case SolverKind::spsa: return "spsa";
    }
    return "?";
}

ProblemKind parse_problem(const std::string& name)
{
    if (name == "simple") return ProblemKind::simple;
    if (name == "complex") return ProblemKind::complex;
    if (name == "quadratic") return ProblemKind::quadratic;
    if (name == "strip") return ProblemKind::strip;
    throw ConfigError("unknown problem '" + name + "'");
}

SolverKind parse_solver(const std::string& name)
{
    if (name == "pi") return SolverKind::pi;
    if (name == "rk") return SolverKind::rk;
    if (name == "direct") return SolverKind::direct;
    if (name == "spsa") return SolverKind::spsa;
    throw ConfigError("unknown solver '" + name + "'");
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const
{
    const bool toll = problem == ProblemKind::simple || problem == ProblemKind::complex;
    if (solver == SolverKind::pi && problem == ProblemKind::complex)
        throw ConfigError("the PI controller cannot handle the smoothing constraints of the complex problem");
    if (solver == SolverKind::pi && !toll)
        throw ConfigError("the PI controller needs a toll problem with interval densities");
    if (toll && !objective.empty() && objective != "density" && objective != "flow")
        throw ConfigError("objective must be 'density' or 'flow'");
    if (!toll && !objective.empty() && objective != "value")
        throw ConfigError("analytic problems only have the 'value' objective");
    if (!toll && (k_cr || nfd_shift || problem_file))
        throw ConfigError("k_cr, nfd_shift and problem_file apply to toll problems only");
    if (budget == 0) throw ConfigError("budget must be positive");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
        throw ConfigError("seeds must be distinct");
    if (penalty_weight && !(*penalty_weight >= 0.0)) throw ConfigError("penalty weight must be non-negative");
    PenaltyConfig{1.0, penalty_exponent}.validate();

    static const std::set<std::string> pi_keys{"p_p", "p_i", "n_max"};
    static const std::set<std::string> rk_keys{"n_init",       "lhs_candidates", "fit_starts",
                                               "refit_starts", "n_candidates",   "n_local",
                                               "use_reinterp", "fixed_lambda",   "final_diagnostics"};
    static const std::set<std::string> direct_keys{"epsilon", "max_iterations", "record_iterations"};
    static const std::set<std::string> spsa_keys{"a",         "A",          "alpha", "c",
                                                 "gamma",     "gradient_scale", "tau0", "normalize",
                                                 "max_iterations", "g_tol", "k_stall", "evaluate_final"};
    switch (solver) {
    case SolverKind::pi: require_keys(params, pi_keys, "pi params"); break;
    case SolverKind::rk: require_keys(params, rk_keys, "rk params"); break;
    case SolverKind::direct: require_keys(params, direct_keys, "direct params"); break;
    case SolverKind::spsa: require_keys(params, spsa_keys, "spsa params"); break;
    }
    if (params.contains("gradient_scale")) {
        const auto& g = params.at("gradient_scale");
        if (!(g.is_number() || g == "auto")) throw ConfigError("gradient_scale must be a number or \"auto\"");
    }
}

ExperimentConfig parse_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment config is not valid JSON: ") + e.what());
    }
    require_keys(j,
                 {"problem", "problem_file", "objective", "k_cr", "nfd_shift", "solver", "params", "budget", "seeds",
                  "output_dir", "penalty", "label", "parallel"},
                 "experiment config");
    if (!j.contains("problem") || !j.contains("solver")) throw ConfigError("config needs 'problem' and 'solver'");

    ExperimentConfig c;
    c.problem = parse_problem(get_or<std::string>(j, "problem", ""));
    c.solver = parse_solver(get_or<std::string>(j, "solver", ""));
    if (j.contains("problem_file")) c.problem_file = get_or<std::string>(j, "problem_file", "");
    c.objective = get_or<std::string>(j, "objective", "");
    if (j.contains("k_cr")) c.k_cr = get_or<double>(j, "k_cr", 0.0);
    if (j.contains("nfd_shift")) c.nfd_shift = get_or<bool>(j, "nfd_shift", false);
    if (j.contains("params")) c.params = j.at("params");
    const auto budget = get_or<long long>(j, "budget", 100);
    if (budget <= 0) throw ConfigError("budget must be positive");
    c.budget = static_cast<std::size_t>(budget);
    if (j.contains("seeds")) {
        if (!j.at("seeds").is_array()) throw ConfigError("'seeds' must be an array");
        c.seeds.clear();
        for (const auto& s : j.at("seeds")) {
            if (!s.is_number_unsigned()) throw ConfigError("seeds must be non-negative integers");
            c.seeds.push_back(s.get<std::uint64_t>());
        }
    }
    c.output_dir = get_or<std::string>(j, "output_dir", "out");
    if (j.contains("penalty")) {
        const json& p = j.at("penalty");
        require_keys(p, {"weight", "exponent"}, "penalty");
        if (p.contains("weight")) {
            const json& w = p.at("weight");
            if (w.is_string()) {
                if (w.get<std::string>() != "auto") throw ConfigError("penalty weight must be a number or \"auto\"");
            } else if (w.is_number()) {
                c.penalty_weight = w.get<double>();
            } else {
                throw ConfigError("penalty weight must be a number or \"auto\"");
            }
        }
        c.penalty_exponent = get_or<int>(p, "exponent", 2);
    }
    c.label = get_or<std::string>(j, "label", "");
    c.parallel = get_or<bool>(j, "parallel", true);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

// ---------------------------------------------------------------------------
// Problems

Problem make_problem(const ExperimentConfig& config)
{
    config.validate();
    Problem p;
    p.name = to_string(config.problem);
    switch (config.problem) {
    case ProblemKind::simple:
    case ProblemKind::complex: {
        mfd::TollProblem toll;
        if (config.problem_file) toll = mfd::load_problem(*config.problem_file);
        else toll = config.problem == ProblemKind::simple ? mfd::simple_fixture() : mfd::complex_fixture();
        if (config.k_cr) toll.k_cr = *config.k_cr;
        if (config.nfd_shift) toll.reservoir.shift.enabled = *config.nfd_shift;
        toll.validate();
        std::string objective = config.objective;
        if (objective.empty()) objective = config.problem == ProblemKind::simple ? "density" : "flow";
        const auto kind = objective == "density" ? mfd::TollObjective::density : mfd::TollObjective::flow;
        p.objective_name = objective;
        p.objective = mfd::make_objective(toll, kind);
        p.sense = kind == mfd::TollObjective::density ? Sense::minimize : Sense::maximize;
        p.bounds = toll.bounds();
        p.k_cr = toll.k_cr;
        if (config.problem == ProblemKind::complex) {
            SmoothingSpec spec;
            spec.m_intervals = toll.m_intervals;
            spec.delay_rates = toll.delay_rates;
            spec.beta = toll.reservoir.value_of_time / 3.0;
            p.constraints = spec;
        }
        p.toll = std::move(toll);
        break;
    }
    case ProblemKind::quadratic: {
        testfn::NoisyQuadratic f;
        f.noise_sd = 0.01;
        p.objective_name = "value";
        p.objective = testfn::make_objective(f);
        p.bounds = f.bounds();
        break;
    }
    case ProblemKind::strip: {
        testfn::NarrowStrip f;
        p.objective_name = "value";
        p.objective = testfn::make_objective(f);
        p.bounds = f.bounds();
        break;
    }
    }
    return p;
}

std::vector<double> probe_constant_profiles(const Problem& problem, std::uint64_t seed)
{
    constexpr int kProbe = 20;
    std::vector<double> values;
    const auto& lo = problem.bounds.lower();
    const auto& hi = problem.bounds.upper();
    for (int k = 0; k < kProbe; ++k) {
        const double frac = (k + 0.5) / kProbe;
        DecisionVector tau(lo.size());
        for (std::size_t l = 0; l < tau.size(); ++l) tau[l] = lo[l] + frac * (hi[l] - lo[l]);
        values.push_back(problem.objective(tau, seed).value);
    }
    return values;
}

SeedSetup prepare_seed(const ExperimentConfig& config, const Problem& problem, std::uint64_t seed)
{
    SeedSetup setup;
    const bool auto_scale = config.solver == SolverKind::spsa && problem.toll &&
                            (!config.params.contains("gradient_scale") || config.params.at("gradient_scale") == "auto");
    const bool auto_weight = problem.constraints && !config.penalty_weight;
    if (problem.constraints && config.penalty_weight) setup.penalty_weight = *config.penalty_weight;
    if (!auto_scale && !auto_weight) return setup;

    const auto values = probe_constant_profiles(problem, seed);
    if (auto_weight) setup.penalty_weight = calibrate_penalty_weight(values);
    if (auto_scale) {
        std::vector<double> magnitude;
        for (double v : values) magnitude.push_back(std::abs(v));
        const double typical = stats::median(magnitude);
        if (typical > 0.0) setup.gradient_scale = 1.0 / typical;
    }
    return setup;
}

// ---------------------------------------------------------------------------
// Running

SeedRun run_seed(const ExperimentConfig& config, const Problem& problem, std::uint64_t seed, const SeedSetup& setup)
{
    EvaluatorOptions options;
    options.budget = config.budget;
    options.sense = problem.sense;
    options.seed = seed;
    options.reentrant = true;
    Evaluator evaluator(problem.objective, problem.bounds, options);

    std::optional<PenaltyHook> penalty;
    if (problem.constraints) penalty = PenaltyHook{*problem.constraints, {setup.penalty_weight, config.penalty_exponent}};

    const json& prm = config.params;
    SeedRun run;
    run.seed = seed;
    std::ostringstream diag;

    switch (config.solver) {
    case SolverKind::pi: {
        pi::PIConfig pc;
        pc.p_p = get_or<double>(prm, "p_p", pc.p_p);
        pc.p_i = get_or<double>(prm, "p_i", pc.p_i);
        pc.k_cr = problem.k_cr;
        pc.n_max = get_or<std::size_t>(prm, "n_max", config.budget - 1);
        pc.m_intervals = problem.bounds.dimension();
        auto result = pi::run_pi(evaluator, pc);
        pi::write_log_csv(diag, result.log);
        run.diagnostics.emplace_back(seed_file("pi_log", seed, ".csv"), diag.str());
        break;
    }
    case SolverKind::rk: {
        kriging::RkConfig rc;
        rc.n_init = get_or<std::size_t>(prm, "n_init", rc.n_init);
        rc.lhs_candidates = get_or<int>(prm, "lhs_candidates", rc.lhs_candidates);
        rc.fit.n_starts = get_or<int>(prm, "fit_starts", rc.fit.n_starts);
        rc.refit_starts = get_or<int>(prm, "refit_starts", rc.refit_starts);
        rc.infill.n_candidates = get_or<int>(prm, "n_candidates", rc.infill.n_candidates);
        rc.infill.n_local = get_or<int>(prm, "n_local", rc.infill.n_local);
        rc.infill.use_reinterp = get_or<bool>(prm, "use_reinterp", rc.infill.use_reinterp);
        if (prm.contains("fixed_lambda")) rc.fit.fixed_lambda = get_or<double>(prm, "fixed_lambda", 0.0);
        rc.final_diagnostics = get_or<bool>(prm, "final_diagnostics", rc.final_diagnostics);
        std::optional<FeasibleRegion> region;
        if (problem.constraints) region = smoothing_region(*problem.constraints, problem.bounds);
        auto result = kriging::run_rk(evaluator, rc, region ? &*region : nullptr, seed);
        diag << "infill,ei\n";
        for (std::size_t i = 0; i < result.ei_history.size(); ++i)
            diag << i + 1 << ',' << io::format_number(result.ei_history[i]) << '\n';
        run.diagnostics.emplace_back(seed_file("rk_ei", seed, ".csv"), diag.str());
        if (!result.loo.empty()) {
            std::ostringstream loo;
            loo << "sample,observed,prediction,std_error,residual,degenerate,outside\n";
            for (std::size_t i = 0; i < result.loo.size(); ++i) {
                const auto& e = result.loo[i];
                loo << i << ',' << io::format_number(e.observed) << ',' << io::format_number(e.prediction) << ','
                    << io::format_number(e.std_error) << ',' << io::format_number(e.residual) << ','
                    << (e.degenerate ? 1 : 0) << ',' << (e.outside ? 1 : 0) << '\n';
            }
            run.diagnostics.emplace_back(seed_file("rk_loo", seed, ".csv"), loo.str());
        }
        if (result.final_model)
            run.diagnostics.emplace_back(seed_file("rk_model", seed, ".json"), result.final_model->dump_json());
        break;
    }
    case SolverKind::direct: {
        direct::DirectConfig dc;
        dc.epsilon = get_or<double>(prm, "epsilon", dc.epsilon);
        dc.max_iterations = get_or<std::size_t>(prm, "max_iterations", dc.max_iterations);
        dc.record_iterations = get_or<bool>(prm, "record_iterations", false);
        dc.penalty = penalty;
        auto result = direct::run_direct(evaluator, dc);
        if (dc.record_iterations) {
            direct::write_dump_csv(diag, result.dumps);
            run.diagnostics.emplace_back(seed_file("direct_dump", seed, ".csv"), diag.str());
        }
        break;
    }
    case SolverKind::spsa: {
        spsa::SpsaConfig sc;
        sc.gains.a = get_or<double>(prm, "a", sc.gains.a);
        sc.gains.big_a = get_or<double>(prm, "A", sc.gains.big_a);
        sc.gains.alpha = get_or<double>(prm, "alpha", sc.gains.alpha);
        sc.gains.c = get_or<double>(prm, "c", sc.gains.c);
        sc.gains.gamma = get_or<double>(prm, "gamma", sc.gains.gamma);
        sc.gradient_scale = prm.contains("gradient_scale") && prm.at("gradient_scale").is_number()
                                ? prm.at("gradient_scale").get<double>()
                                : setup.gradient_scale;
        sc.tau0 = get_or<std::vector<double>>(prm, "tau0", {});
        sc.normalize = get_or<bool>(prm, "normalize", sc.normalize);
        sc.stop.max_iterations = get_or<std::size_t>(prm, "max_iterations", sc.stop.max_iterations);
        sc.stop.g_tol = get_or<double>(prm, "g_tol", sc.stop.g_tol);
        sc.stop.k_stall = get_or<std::size_t>(prm, "k_stall", sc.stop.k_stall);
        sc.evaluate_final = get_or<bool>(prm, "evaluate_final", sc.evaluate_final);
        sc.penalty = penalty;
        sc.seed = seed;
        auto result = spsa::run_spsa(evaluator, sc);
        spsa::write_log_csv(diag, result.log);
        run.diagnostics.emplace_back(seed_file("spsa_log", seed, ".csv"), diag.str());
        break;
    }
    }
    run.trace = evaluator.trace();
    return run;
}

// ---------------------------------------------------------------------------
// Reports

std::vector<double> RunReport::final_values() const
{
    std::vector<double> out;
    for (const auto& s : seeds) out.push_back(s.final_best);
    return out;
}

std::vector<double> feasible_best_curve(const Trace& trace, Sense sense, const std::optional<SmoothingSpec>& spec)
{
    std::vector<double> curve;
    curve.reserve(trace.size());
    double best = kNaN;
    for (const auto& r : trace.records()) {
        const bool ok = !spec || is_feasible(r.tau, *spec, kFeasTol);
        if (ok && (std::isnan(best) || improves(sense, r.eval.value, best))) best = r.eval.value;
        curve.push_back(best);
    }
    return curve;
}

RunReport build_report(const std::string& problem, const std::string& objective, const std::string& solver,
                       const std::string& label, Sense sense, std::size_t budget,
                       const std::optional<SmoothingSpec>& spec,
                       const std::vector<std::pair<std::uint64_t, Trace>>& traces,
                       const std::vector<std::string>& trace_files)
{
    if (traces.empty()) throw Error("a report needs at least one trace");
    RunReport r;
    r.problem = problem;
    r.objective = objective;
    r.solver = solver;
    r.label = label.empty() ? solver : label;
    r.sense = sense;
    r.budget = budget;
    r.constrained = spec.has_value();

    std::vector<std::vector<double>> curves;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& [seed, trace] = traces[i];
        if (trace.size() > budget) throw Error("trace longer than the budget");
        SeedSummary s;
        s.seed = seed;
        s.evaluations = trace.size();
        s.trace_file = i < trace_files.size() ? trace_files[i] : "";
        auto best = best_so_far_if(trace, sense, [&](const DecisionVector& tau) {
            return !spec || is_feasible(tau, *spec, kFeasTol);
        });
        s.feasible = best.has_value();
        s.final_best = best ? best->value : kNaN;
        if (best) s.best_tau = best->tau;
        r.seeds.push_back(std::move(s));
        curves.push_back(extend(feasible_best_curve(trace, sense, spec), budget));
    }
    for (std::size_t e = 0; e < budget; ++e) {
        std::vector<double> column;
        for (const auto& c : curves) column.push_back(c[e]);
        r.median_curve.push_back(finite_quantile(column, 0.5));
        r.q25_curve.push_back(finite_quantile(column, 0.25));
        r.q75_curve.push_back(finite_quantile(column, 0.75));
    }
    const auto finals = r.final_values();
    r.final_median = finite_quantile(finals, 0.5);
    r.final_iqr = finite_quantile(finals, 0.75) - finite_quantile(finals, 0.25);
    return r;
}

json to_json(const RunReport& r, const std::optional<SmoothingSpec>& spec)
{
    json seeds = json::array();
    for (const auto& s : r.seeds)
        seeds.push_back({{"seed", s.seed},
                         {"evaluations", s.evaluations},
                         {"feasible", s.feasible},
                         {"final_best", number_or_null(s.final_best)},
                         {"best_tau", s.best_tau},
                         {"trace_file", s.trace_file}});
    json j = {{"problem", r.problem},
              {"objective", r.objective},
              {"solver", r.solver},
              {"label", r.label},
              {"sense", to_string(r.sense)},
              {"budget", r.budget},
              {"constrained", r.constrained},
              {"seeds", seeds},
              {"final_median", number_or_null(r.final_median)},
              {"final_iqr", number_or_null(r.final_iqr)},
              {"median_curve", curve_json(r.median_curve)},
              {"q25_curve", curve_json(r.q25_curve)},
              {"q75_curve", curve_json(r.q75_curve)}};
    if (spec)
        j["constraints"] = {{"alpha", spec->alpha},
                            {"beta", spec->beta},
                            {"m_intervals", spec->m_intervals},
                            {"delay_rates", spec->delay_rates}};
    return j;
}

std::optional<SmoothingSpec> spec_from_report_json(const json& j)
{
    if (!j.contains("constraints")) return std::nullopt;
    const json& c = j.at("constraints");
    SmoothingSpec spec;
    spec.alpha = c.at("alpha").get<double>();
    spec.beta = c.at("beta").get<double>();
    spec.m_intervals = c.at("m_intervals").get<std::size_t>();
    spec.delay_rates = c.at("delay_rates").get<bool>();
    return spec;
}

RunReport report_from_json(const json& j)
{
    try {
        RunReport r;
        r.problem = j.at("problem").get<std::string>();
        r.objective = j.at("objective").get<std::string>();
        r.solver = j.at("solver").get<std::string>();
        r.label = j.at("label").get<std::string>();
        r.sense = j.at("sense").get<std::string>() == "maximize" ? Sense::maximize : Sense::minimize;
        r.budget = j.at("budget").get<std::size_t>();
        r.constrained = j.at("constrained").get<bool>();
        for (const auto& s : j.at("seeds")) {
            SeedSummary ss;
            ss.seed = s.at("seed").get<std::uint64_t>();
            ss.evaluations = s.at("evaluations").get<std::size_t>();
            ss.feasible = s.at("feasible").get<bool>();
            ss.final_best = number_from(s.at("final_best"));
            ss.best_tau = s.at("best_tau").get<std::vector<double>>();
            ss.trace_file = s.at("trace_file").get<std::string>();
            r.seeds.push_back(std::move(ss));
        }
        r.final_median = number_from(j.at("final_median"));
        r.final_iqr = number_from(j.at("final_iqr"));
        r.median_curve = curve_from(j.at("median_curve"));
        r.q25_curve = curve_from(j.at("q25_curve"));
        r.q75_curve = curve_from(j.at("q75_curve"));
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
}

RunReport run_experiment(const ExperimentConfig& config)
{
    const Problem problem = make_problem(config);
    const std::string label = config.label.empty() ? to_string(config.solver) : config.label;

    auto one = [&](std::uint64_t seed) { return run_seed(config, problem, seed, prepare_seed(config, problem, seed)); };

    std::vector<SeedRun> runs(config.seeds.size());
    const std::size_t workers =
        config.parallel ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : std::size_t{1};
    for (std::size_t start = 0; start < config.seeds.size(); start += workers) {
        const std::size_t stop = std::min(config.seeds.size(), start + workers);
        if (workers == 1) {
            runs[start] = one(config.seeds[start]);
            continue;
        }
        std::vector<std::future<SeedRun>> pending;
        for (std::size_t i = start; i < stop; ++i) pending.push_back(std::async(std::launch::async, one, config.seeds[i]));
        for (std::size_t i = start; i < stop; ++i) runs[i] = pending[i - start].get();
    }

    std::vector<std::pair<std::uint64_t, Trace>> traces;
    std::vector<std::string> files;
    for (const auto& run : runs) {
        traces.emplace_back(run.seed, run.trace);
        files.push_back(seed_file("trace", run.seed, ".csv"));
    }
    RunReport report = build_report(problem.name, problem.objective_name, to_string(config.solver), label,
                                    problem.sense, config.budget, problem.constraints, traces, files);
    if (!config.write_files) return report;

    const auto& dir = config.output_dir;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& run = runs[i];
        {
            auto out = io::open_output(dir / files[i]);
            run.trace.write_csv(out);
        }
        emit_best_curve_csv(run.trace, dir / seed_file("best_curve", run.seed, ".csv"));
        for (const auto& [name, text] : run.diagnostics) write_text(dir / name, text);
        if (problem.toll && report.seeds[i].feasible) {
            const auto sim = problem.toll->simulate(report.seeds[i].best_tau, run.seed);
            emit_nfd_scatter_csv(sim, dir / seed_file("nfd_best", run.seed, ".csv"));
        }
    }
    if (problem.toll) {
        const auto sim = problem.toll->simulate(DecisionVector(problem.bounds.dimension(), 0.0), config.seeds.front());
        emit_nfd_scatter_csv(sim, dir / "nfd_notoll.csv");
    }
    std::vector<double> grid(config.budget);
    for (std::size_t e = 0; e < grid.size(); ++e) grid[e] = static_cast<double>(e + 1);
    write_text(dir / "best_curve.svg",
               render_svg({{label, grid, report.median_curve}}, problem.name + " / " + label, "evaluations",
                          "median best " + problem.objective_name));
    write_text(dir / "report.json", to_json(report, problem.constraints).dump(2) + "\n");
    return report;
}

std::string regenerate_report(const std::filesystem::path& report_path)
{
    const json j = json::parse(read_text(report_path));
    const RunReport stored = report_from_json(j);
    const auto spec = spec_from_report_json(j);
    const auto dir = report_path.parent_path();
    std::vector<std::pair<std::uint64_t, Trace>> traces;
    std::vector<std::string> files;
    for (const auto& s : stored.seeds) {
        std::ifstream in(dir / s.trace_file);
        if (!in) throw Error("cannot open trace '" + (dir / s.trace_file).string() + "'");
        traces.emplace_back(s.seed, Trace::read_csv(in, stored.sense));
        files.push_back(s.trace_file);
    }
    const RunReport rebuilt = build_report(stored.problem, stored.objective, stored.solver, stored.label,
                                           stored.sense, stored.budget, spec, traces, files);
    return to_json(rebuilt, spec).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Comparison

ComparisonReport compare(const std::vector<RunReport>& reports)
{
    if (reports.empty()) throw ConfigError("nothing to compare");
    const auto& first = reports.front();
    ComparisonReport out;
    out.problem = first.problem;
    out.objective = first.objective;
    out.sense = first.sense;
    out.budget = first.budget;
    for (const auto& r : reports) {
        if (r.problem != first.problem || r.objective != first.objective || r.sense != first.sense)
            throw ConfigError("reports refer to different problems");
        if (r.budget != first.budget) throw ConfigError("reports use different evaluation budgets");
        for (const auto& s : r.seeds)
            if (s.evaluations > r.budget) throw ConfigError("a run exceeded the shared budget");
    }
    for (const auto& r : reports) {
        ComparisonEntry e;
        e.label = r.label;
        e.solver = r.solver;
        e.median_curve = extend(r.median_curve, out.budget);
        e.q25_curve = extend(r.q25_curve, out.budget);
        e.q75_curve = extend(r.q75_curve, out.budget);
        e.final_values = r.final_values();
        e.final_median = r.final_median;
        e.final_iqr = r.final_iqr;
        for (const auto& s : r.seeds) e.all_feasible = e.all_feasible && s.feasible;
        out.entries.push_back(std::move(e));
    }
    for (std::size_t a = 0; a < out.entries.size(); ++a)
        for (std::size_t b = 0; b < out.entries.size(); ++b) {
            if (a == b) continue;
            std::vector<double> x, y;
            for (double v : out.entries[a].final_values)
                if (std::isfinite(v)) x.push_back(-to_minimization(out.sense, v));
            for (double v : out.entries[b].final_values)
                if (std::isfinite(v)) y.push_back(-to_minimization(out.sense, v));
            if (x.empty() || y.empty()) continue;
            const auto t = stats::mann_whitney_greater(x, y);
            out.tests.push_back({out.entries[a].label, out.entries[b].label, t.u, t.p_value});
        }
    return out;
}

json to_json(const ComparisonReport& report)
{
    json entries = json::array();
    for (const auto& e : report.entries) {
        json finals = json::array();
        for (double v : e.final_values) finals.push_back(number_or_null(v));
        entries.push_back({{"label", e.label},
                           {"solver", e.solver},
                           {"final_values", finals},
                           {"final_median", number_or_null(e.final_median)},
                           {"final_iqr", number_or_null(e.final_iqr)},
                           {"all_feasible", e.all_feasible}});
    }
    json tests = json::array();
    for (const auto& t : report.tests)
        tests.push_back({{"better", t.better}, {"worse", t.worse}, {"u", t.u}, {"p_value", t.p_value}});
    return {{"problem", report.problem},
            {"objective", report.objective},
            {"sense", to_string(report.sense)},
            {"budget", report.budget},
            {"entries", entries},
            {"rank_tests", tests}};
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report)
{
    out << "eval";
    for (const auto& e : report.entries) out << ',' << e.label << "_median," << e.label << "_q25," << e.label << "_q75";
    out << '\n';
    for (std::size_t i = 0; i < report.budget; ++i) {
        out << i + 1;
        for (const auto& e : report.entries)
            out << ',' << io::format_number(e.median_curve[i]) << ',' << io::format_number(e.q25_curve[i]) << ','
                << io::format_number(e.q75_curve[i]);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Plot data

void emit_best_curve_csv(const Trace& trace, const std::filesystem::path& path)
{
    if (trace.empty()) throw Error("cannot plot an empty trace");
    auto out = io::open_output(path);
    out << "eval_index,value,best_value\n";
    const auto& records = trace.records();
    for (std::size_t i = 0; i < records.size(); ++i)
        out << records[i].eval.eval_index << ',' << io::format_number(records[i].eval.value) << ','
            << io::format_number(trace.best_curve()[i]) << '\n';
    if (!out) throw Error("failed to write '" + path.string() + "'");
}

void emit_nfd_scatter_csv(const mfd::SimOutput& sim, const std::filesystem::path& path)
{
    if (sim.series.empty()) throw Error("simulation has no recorded series");
    auto out = io::open_output(path);
    out << "K,Q\n";
    for (const auto& p : sim.series) out << io::format_number(p.k) << ',' << io::format_number(p.q) << '\n';
    if (!out) throw Error("failed to write '" + path.string() + "'");
}

std::string render_svg(const std::vector<SvgSeries>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label, bool scatter)
{
    constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw Error("plot series with unequal x and y lengths");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!std::isfinite(x0)) throw Error("nothing to plot");
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
        << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << x_label << "</text>\n"
        << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
        << ")\" text-anchor=\"middle\" font-size=\"12\">" << y_label << "</text>\n";
    for (auto [v, anchor_x, anchor_y, align] :
         {std::tuple{x0, px(x0), H - B + 16, "start"}, std::tuple{x1, px(x1), H - B + 16, "end"}})
        svg << "<text x=\"" << anchor_x << "\" y=\"" << anchor_y << "\" text-anchor=\"" << align
            << "\" font-size=\"10\">" << io::format_number(v) << "</text>\n";
    for (auto [v, anchor_y] : {std::pair{y0, py(y0)}, std::pair{y1, py(y1) + 10}})
        svg << "<text x=\"" << L - 4 << "\" y=\"" << anchor_y << "\" text-anchor=\"end\" font-size=\"10\">"
            << io::format_number(v) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = colors[k % std::size(colors)];
        if (scatter) {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                    svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2\" fill=\"" << color
                        << "\"/>\n";
        } else {
            svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            svg << "\"/>\n";
        }
        svg << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" "
            << "fill=\"" << color << "\">" << s.name << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace sbo::bench
