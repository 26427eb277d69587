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
#include "sbo/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw sbo::Error("cannot open '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::size_t> budget,
            std::optional<std::string> out_dir)
{
    auto config = sbo::bench::load_config(config_path);
    if (seed) config.seeds = {*seed};
    if (budget) config.budget = *budget;
    if (out_dir) config.output_dir = *out_dir;
    config.validate();
    const auto report = sbo::bench::run_experiment(config);
    std::cout << report.label << " on " << report.problem << " (" << report.objective << ", "
              << sbo::to_string(report.sense) << "), budget " << report.budget << '\n';
    for (const auto& s : report.seeds)
        std::cout << "  seed " << s.seed << ": best " << sbo::io::format_number(s.final_best) << " after "
                  << s.evaluations << " evaluations" << (s.feasible ? "" : " (no feasible point)") << '\n';
    std::cout << "  median " << sbo::io::format_number(report.final_median) << ", IQR "
              << sbo::io::format_number(report.final_iqr) << '\n'
              << "  report: " << (config.output_dir / "report.json").string() << '\n';
    return 0;
}

int cmd_compare(const std::vector<std::string>& paths, std::optional<std::string> csv_path)
{
    std::vector<sbo::bench::RunReport> reports;
    for (const auto& p : paths) reports.push_back(sbo::bench::report_from_json(nlohmann::json::parse(slurp(p))));
    const auto cmp = sbo::bench::compare(reports);
    std::cout << sbo::bench::to_json(cmp).dump(2) << '\n';
    if (csv_path) {
        auto out = sbo::io::open_output(*csv_path);
        sbo::bench::write_comparison_csv(out, cmp);
    }
    return 0;
}

int cmd_plot(const std::string& trace_path, std::optional<std::string> out_dir)
{
    std::ifstream in(trace_path);
    if (!in) throw sbo::Error("cannot open '" + trace_path + "'");
    const auto trace = sbo::Trace::read_csv(in);
    const std::filesystem::path src(trace_path);
    const std::filesystem::path dir = out_dir ? std::filesystem::path(*out_dir) : src.parent_path();
    const std::string stem = src.stem().string();
    sbo::bench::emit_best_curve_csv(trace, dir / (stem + "_best.csv"));
    std::vector<double> x, value;
    for (const auto& r : trace.records()) {
        x.push_back(static_cast<double>(r.eval.eval_index));
        value.push_back(r.eval.value);
    }
    const std::string svg = sbo::bench::render_svg({{"value", x, value}, {"best", x, trace.best_curve()}}, stem,
                                                   "evaluation", "objective");
    auto out = sbo::io::open_output(dir / (stem + "_best.svg"));
    out << svg;
    std::cout << (dir / (stem + "_best.csv")).string() << '\n' << (dir / (stem + "_best.svg")).string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulation-based toll optimization benchmarks"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> budget;
    std::optional<std::string> out_dir;
    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    run->add_option("--config", config_path, "Experiment config")->required();
    run->add_option("--seed", seed, "Run a single seed instead of the configured list");
    run->add_option("--budget", budget, "Override the evaluation budget");
    run->add_option("--out", out_dir, "Override the output directory");

    std::vector<std::string> reports;
    std::optional<std::string> csv_path;
    auto* cmp = app.add_subcommand("compare", "Compare report.json files of several solvers");
    cmp->add_option("reports", reports, "Report files")->required();
    cmp->add_option("--csv", csv_path, "Write aligned best curves to this CSV");

    std::string trace_path;
    std::optional<std::string> plot_dir;
    auto* plot = app.add_subcommand("plot", "Best-curve CSV and SVG from a trace");
    plot->add_option("trace", trace_path, "Trace CSV")->required();
    plot->add_option("--out", plot_dir, "Output directory (default: next to the trace)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*run) return cmd_run(config_path, seed, budget, out_dir);
        if (*cmp) return cmd_compare(reports, csv_path);
        if (*plot) return cmd_plot(trace_path, plot_dir);
    } catch (const sbo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return 0;
}
