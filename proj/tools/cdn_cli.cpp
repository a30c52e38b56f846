#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cdn/experiment.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitMissingFile = 2;
constexpr int kExitViolations = 4;

struct TraceContext
{
    std::string method;
    std::string problem_id;
    std::optional<double> F_star;
};

// Method, problem id and F* come from summary.json next to the trace when present.
TraceContext Describe(const std::string& path)
{
    TraceContext context;
    const fs::path p(path);
    std::string stem = p.stem().string();
    const auto seed_pos = stem.rfind("_seed");
    context.method = seed_pos == std::string::npos ? stem : stem.substr(0, seed_pos);

    const fs::path summary = p.parent_path() / "summary.json";
    if (!fs::exists(summary))
    {
        return context;
    }
    const Json root = Json::parse(cdn::read_file(summary.string()));
    context.problem_id = root.value("problem_id", "");
    if (root.contains("F_star") && root.at("F_star").is_number())
    {
        context.F_star = root.at("F_star").get<double>();
    }
    for (const Json& run : root.value("runs", Json::array()))
    {
        if (run.value("csv", "") == p.filename().string() || run.value("json", "") == p.filename().string())
        {
            context.method = run.value("method", context.method);
        }
    }
    return context;
}

int CmdRun(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed_override,
           std::optional<double> eps)
{
    cdn::ExperimentConfig config = cdn::load_config(config_path);
    if (!out.empty())
    {
        config.run.output_dir = out;
    }
    for (cdn::MethodSpec& method : config.methods)
    {
        if (seed_override)
        {
            method.seed = *seed_override;
        }
        if (eps)
        {
            method.eps = *eps;
        }
    }
    const cdn::ExperimentResult result = cdn::run_experiment(config, true);
    for (const cdn::RunSummary& run : result.runs)
    {
        std::cout << run.method << " seed=" << run.seed << " F=" << cdn::format_double(run.final_F);
        if (run.residual)
        {
            std::cout << " residual=" << cdn::format_double(*run.residual);
        }
        if (run.final_cert)
        {
            std::cout << " cert=" << cdn::format_double(*run.final_cert);
        }
        std::cout << " status=" << run.status << '\n';
    }
    std::cout << "wrote " << (fs::path(config.run.output_dir) / "summary.json").string() << '\n';
    return 0;
}

int CmdCertify(const std::vector<std::string>& files, std::optional<double> F_star, double tol,
               const std::vector<std::int64_t>& window)
{
    Json report = Json::array();
    bool violated = false;
    for (const std::string& file : files)
    {
        const cdn::RunTrace trace = cdn::load_trace(file);
        const TraceContext context = Describe(file);
        const std::optional<double> reference = F_star ? F_star : context.F_star;
        if (!reference)
        {
            throw cdn::Error("no reference F* for " + file + " (pass --fstar or keep summary.json beside it)");
        }
        const cdn::CertifyReport r = cdn::certify_trace(trace, *reference, tol, window[0], window[1]);
        Json item;
        item["file"] = file;
        item["rows_checked"] = r.rows_checked;
        item["violations"] = r.violations;
        item["max_violation"] = r.max_violation;
        item["slope"] = r.slope ? Json(*r.slope) : Json(nullptr);
        report.push_back(item);
        violated = violated || r.violations > 0;
    }
    std::cout << report.dump(2) << '\n';
    return violated ? kExitViolations : 0;
}

int CmdPlotdata(const std::vector<std::string>& files, const std::string& axis, const std::string& out,
                std::optional<double> F_star)
{
    std::vector<cdn::LabelledTrace> traces;
    std::optional<double> reference = F_star;
    for (const std::string& file : files)
    {
        const TraceContext context = Describe(file);
        traces.push_back({context.method, context.problem_id, cdn::load_trace(file)});
        if (!reference)
        {
            reference = context.F_star;
        }
    }
    const std::string csv = cdn::plot_series(traces, cdn::plot_axis_from_string(axis), reference);
    if (out.empty())
    {
        std::cout << csv;
    }
    else
    {
        cdn::write_file_atomic(out, csv);
    }
    return 0;
}

int CmdTune(const std::string& config_path, const std::string& method_name, const std::vector<double>& grid,
            const std::string& out)
{
    cdn::ExperimentConfig config = cdn::load_config(config_path);
    const cdn::MethodSpec* spec = nullptr;
    for (const cdn::MethodSpec& m : config.methods)
    {
        if (m.name == method_name)
        {
            spec = &m;
        }
    }
    if (spec == nullptr || (method_name != "sgd" && method_name != "svrg"))
    {
        throw cdn::Error("tune needs an sgd or svrg entry named '" + method_name + "' in the config");
    }
    const std::vector<double> steps = grid.empty() ? (spec->step_grid.empty() ? cdn::geometric_grid(1e-3, 1e2)
                                                                               : spec->step_grid)
                                                   : grid;
    const cdn::Problem problem = cdn::build_problem(config.problem);
    const std::int64_t iters = spec->max_iters.value_or(config.run.max_iters) * problem.oracle->size();
    const cdn::TuneResult tuned = cdn::tune_step(
        [&](double step) {
            cdn::StochasticBaselineConfig sc;
            sc.step = step;
            sc.seed = spec->seed;
            sc.epoch_len = spec->epoch_len;
            sc.max_iters = iters;
            sc.timing = false;
            return method_name == "sgd" ? cdn::sgd_run(*problem.oracle, *problem.composite, sc, problem.x0)
                                        : cdn::svrg_run(*problem.oracle, *problem.composite, sc, problem.x0);
        },
        steps);
    Json result;
    result["method"] = method_name;
    result["best_step"] = tuned.best_step;
    Json scores = Json::array();
    for (const auto& [step, score] : tuned.scores)
    {
        scores.push_back({{"step", step}, {"final_F", std::isfinite(score) ? Json(score) : Json(nullptr)}});
    }
    result["scores"] = scores;
    const std::string text = result.dump(2) + "\n";
    if (!out.empty())
    {
        cdn::write_file_atomic((fs::path(out) / ("tune_" + method_name + ".json")).string(), text);
    }
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Contracting-domain Newton experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed_override;
    std::optional<double> eps;
    CLI::App* run = app.add_subcommand("run", "Run the methods of a JSON config and write traces");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", out, "Output directory (overrides run.output_dir)");
    run->add_option("--seed-override", seed_override, "Seed for every method");
    run->add_option("--eps", eps, "Subsolver accuracy for every method");

    std::vector<std::string> files;
    std::optional<double> F_star;
    double tol = 1e-8;
    std::vector<std::int64_t> window{8, 128};
    CLI::App* certify = app.add_subcommand("certify", "Check 0 <= F - F* <= cert + tol along traces");
    certify->add_option("traces", files, "Trace files (.csv or .json)")->required();
    certify->add_option("--fstar", F_star, "Reference optimal value");
    certify->add_option("--tol", tol, "Absolute tolerance");
    certify->add_option("--window", window, "k-window for the slope fit")->expected(2);

    std::string axis = "iterations";
    std::string plot_out;
    CLI::App* plot = app.add_subcommand("plotdata", "Merge traces into a long-format CSV");
    plot->add_option("traces", files, "Trace files");
    plot->add_option("--x-axis", axis, "iterations, time or samples");
    plot->add_option("--out", plot_out, "Output CSV (default stdout)");
    plot->add_option("--fstar", F_star, "Reference optimal value");

    std::string method_name;
    std::vector<double> grid;
    CLI::App* tune = app.add_subcommand("tune", "Grid-search a constant step for sgd or svrg");
    tune->add_option("--config", config_path, "Experiment config (JSON)")->required();
    tune->add_option("--method", method_name, "sgd or svrg")->required();
    tune->add_option("--grid", grid, "Step sizes")->delimiter(',');
    tune->add_option("--out", out, "Directory for tune_<method>.json");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            return CmdRun(config_path, out, seed_override, eps);
        }
        if (*certify)
        {
            return CmdCertify(files, F_star, tol, window);
        }
        if (*plot)
        {
            if (files.empty())
            {
                throw cdn::Error("no trace files given");
            }
            return CmdPlotdata(files, axis, plot_out, F_star);
        }
        if (*tune)
        {
            return CmdTune(config_path, method_name, grid, out);
        }
    }
    catch (const cdn::MissingFileError& error)
    {
        std::cerr << "error: " << error.what() << '\n';
        return kExitMissingFile;
    }
    catch (const std::exception& error)
    {
        std::cerr << "error: " << error.what() << '\n';
        return 1;
    }
    return 0;
}
