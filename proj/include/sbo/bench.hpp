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

#ifndef SBO_BENCH_HPP
#define SBO_BENCH_HPP

#include "sbo/constraints.hpp"
#include "sbo/core.hpp"
#include "sbo/mfdsim.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sbo::bench {

enum class ProblemKind { simple, complex, quadratic, strip };
enum class SolverKind { pi, rk, direct, spsa };

const char* to_string(ProblemKind kind);
const char* to_string(SolverKind kind);
ProblemKind parse_problem(const std::string& name);
SolverKind parse_solver(const std::string& name);

struct ExperimentConfig {
    ProblemKind problem = ProblemKind::simple;
    std::optional<std::filesystem::path> problem_file;  ///< overrides the built-in toll fixture
    std::string objective;                              ///< "density" | "flow"; empty picks the default
    std::optional<double> k_cr;
    std::optional<bool> nfd_shift;
    SolverKind solver = SolverKind::rk;
    nlohmann::json params = nlohmann::json::object();
    std::size_t budget = 100;
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path output_dir = "out";
    std::optional<double> penalty_weight;  ///< empty calibrates the weight from a probe
    int penalty_exponent = 2;
    std::string label;  ///< defaults to the solver name
    bool parallel = true;
    bool write_files = true;

    void validate() const;
};

/// Parses and validates a JSON experiment description. Unknown keys, bad
/// values and incompatible solver/problem pairs raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// A configured optimization problem.
struct Problem {
    std::string name;
    std::string objective_name;
    Objective objective;
    Bounds bounds = Bounds::unit(1);
    Sense sense = Sense::minimize;
    std::optional<SmoothingSpec> constraints;
    std::optional<mfd::TollProblem> toll;
    double k_cr = 0.0;
};

Problem make_problem(const ExperimentConfig& config);

/// Objective values at 20 constant toll profiles spread across the bounds.
/// The probe runs outside any solver budget.
std::vector<double> probe_constant_profiles(const Problem& problem, std::uint64_t seed);

/// Per-seed settings derived from the probe.
struct SeedSetup {
    double penalty_weight = 0.0;
    double gradient_scale = 1.0;  ///< used by SPSA when its params ask for "auto"
};

SeedSetup prepare_seed(const ExperimentConfig& config, const Problem& problem, std::uint64_t seed);

/// Outcome of one solver run on one seed.
struct SeedRun {
    std::uint64_t seed = 0;
    Trace trace;
    /// Solver diagnostics as (file name, CSV or JSON text), written next to the trace.
    std::vector<std::pair<std::string, std::string>> diagnostics;
};

SeedRun run_seed(const ExperimentConfig& config, const Problem& problem, std::uint64_t seed,
                 const SeedSetup& setup);

struct SeedSummary {
    std::uint64_t seed = 0;
    std::size_t evaluations = 0;
    bool feasible = false;  ///< a feasible point was evaluated
    double final_best = 0.0;
    DecisionVector best_tau;
    std::string trace_file;
};

struct RunReport {
    std::string problem;
    std::string objective;
    std::string solver;
    std::string label;
    Sense sense = Sense::minimize;
    std::size_t budget = 0;
    bool constrained = false;
    std::vector<SeedSummary> seeds;
    std::vector<double> median_curve;  ///< best feasible value per evaluation count
    std::vector<double> q25_curve;
    std::vector<double> q75_curve;
    double final_median = 0.0;
    double final_iqr = 0.0;

    std::vector<double> final_values() const;
};

/// Best value among feasible records after each evaluation (NaN before the first).
std::vector<double> feasible_best_curve(const Trace& trace, Sense sense, const std::optional<SmoothingSpec>& spec);

/// Report statistics from stored traces; the same traces always give the same report.
RunReport build_report(const std::string& problem, const std::string& objective, const std::string& solver,
                       const std::string& label, Sense sense, std::size_t budget,
                       const std::optional<SmoothingSpec>& spec,
                       const std::vector<std::pair<std::uint64_t, Trace>>& traces,
                       const std::vector<std::string>& trace_files);

nlohmann::json to_json(const RunReport& report, const std::optional<SmoothingSpec>& spec);
RunReport report_from_json(const nlohmann::json& j);
std::optional<SmoothingSpec> spec_from_report_json(const nlohmann::json& j);

/// Runs every seed, writes per-seed traces, best curves, solver diagnostics,
/// NFD scatter data for toll problems, and report.json into output_dir.
RunReport run_experiment(const ExperimentConfig& config);

/// Rebuilds report.json text from the trace files it references.
std::string regenerate_report(const std::filesystem::path& report_path);

struct ComparisonEntry {
    std::string label;
    std::string solver;
    std::vector<double> median_curve;  ///< on the common evaluation grid
    std::vector<double> q25_curve;
    std::vector<double> q75_curve;
    std::vector<double> final_values;
    double final_median = 0.0;
    double final_iqr = 0.0;
    bool all_feasible = true;
};

struct PairTest {
    std::string better;  ///< hypothesis: this label beats `worse`
    std::string worse;
    double u = 0.0;
    double p_value = 1.0;
};

struct ComparisonReport {
    std::string problem;
    std::string objective;
    Sense sense = Sense::minimize;
    std::size_t budget = 0;
    std::vector<ComparisonEntry> entries;
    std::vector<PairTest> tests;
};

/// Aligns best curves on the grid 1..budget by carry-forward and summarizes
/// them. Reports must share problem, objective and budget.
ComparisonReport compare(const std::vector<RunReport>& reports);

nlohmann::json to_json(const ComparisonReport& report);
/// eval, then median/q25/q75 columns per entry.
void write_comparison_csv(std::ostream& out, const ComparisonReport& report);

// ---------------------------------------------------------------------------
// Plot data

/// eval_index, value, best_value. Throws before creating the file if the trace is empty.
void emit_best_curve_csv(const Trace& trace, const std::filesystem::path& path);
/// K, Q pairs of the simulated time series.
void emit_nfd_scatter_csv(const mfd::SimOutput& sim, const std::filesystem::path& path);

struct SvgSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static SVG with line series (or markers only when `scatter` is set).
std::string render_svg(const std::vector<SvgSeries>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label, bool scatter = false);

} // namespace sbo::bench

#endif
