#ifndef CDN_EXPERIMENT_HPP_
#define CDN_EXPERIMENT_HPP_

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdn/baselines.hpp"
#include "cdn/composite.hpp"
#include "cdn/core.hpp"
#include "cdn/methods.hpp"
#include "cdn/models.hpp"
#include "cdn/oracles.hpp"

namespace cdn {

struct SynthSpec
{
    Index M = 200;
    int n = 10;
    std::uint64_t seed = 0;
    double conditioning = 1.0;

    bool operator==(const SynthSpec&) const = default;
};

struct DatasetSpec
{
    std::string path;
    std::optional<int> n;

    bool operator==(const DatasetSpec&) const = default;
};

struct ProblemConfig
{
    // Exactly one of the two.
    std::optional<SynthSpec> synth;
    std::optional<DatasetSpec> dataset;
    // Multiply each feature row by its label.
    bool label_fold = true;

    std::string p = "2";  // "1", "2" or "inf"
    double D = 8.0;
    std::vector<double> center;  // empty: origin
    double mu = 0.0;
    std::vector<double> anchor;  // empty: ball center
    double nu = 1.0;
    // Holder constant; absent means the oracle's certified bound.
    std::optional<double> H;
    // No valid constant known: certificates of the aggregated model are partial.
    bool holder_unknown = false;
    std::vector<double> x0;  // empty: ball center

    bool operator==(const ProblemConfig&) const = default;
};

struct MethodSpec
{
    // cdn1, cdn2, aggregating, stoch_newton, svr_newton, geometric,
    // frank_wolfe, gm, fgm, sgd, svrg
    std::string name;
    std::string schedule = "power";  // power, geometric, newton
    int power = 3;
    std::optional<double> omega;
    double eps = kDefaultInnerEps;
    std::uint64_t seed = 0;
    bool with_replacement = true;
    bool cap_at_M = true;
    std::optional<std::int64_t> max_iters;
    // sgd / svrg
    double step = 0.0;
    std::vector<double> step_grid;
    std::int64_t epoch_len = 0;
    // gm / fgm
    std::optional<double> initial_L;

    bool operator==(const MethodSpec&) const = default;
};

struct RunOptions
{
    std::int64_t max_iters = 100;
    std::optional<double> time_budget_s;
    std::int64_t cert_every = 1;
    std::optional<double> cert_tol;
    std::string output_dir = "out";
    int replications = 1;
    bool timing = true;
    bool reference = true;
    std::int64_t slope_lo = 8;
    std::int64_t slope_hi = 128;

    bool operator==(const RunOptions&) const = default;
};

struct ExperimentConfig
{
    ProblemConfig problem;
    std::vector<MethodSpec> methods;
    RunOptions run;

    bool operator==(const ExperimentConfig&) const = default;

    void validate() const;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

// Missing input file (dataset, config, trace); the CLI maps it to exit code 2.
class MissingFileError : public Error
{
public:
    explicit MissingFileError(const std::string& path) : Error("file not found: " + path), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

bool is_stochastic_method(const std::string& name);

struct Problem
{
    std::unique_ptr<LogisticOracle> oracle;
    std::unique_ptr<Composite> composite;
    Vector x0;
    HolderClass holder;
    bool holder_certified = true;
    std::string id;
};

Problem build_problem(const ProblemConfig& config);

// Stable human-readable identifier of a problem configuration.
std::string problem_id(const ProblemConfig& config);

struct RunSummary
{
    std::string method;
    std::uint64_t seed = 0;
    double final_F = 0.0;
    std::optional<double> final_cert;
    std::optional<double> slope;
    std::uint64_t grad_samples_total = 0;
    std::uint64_t hess_samples_total = 0;
    double wall_s = 0.0;
    std::string status;
    std::optional<double> residual;
    std::string csv_file;
    std::string json_file;
};

struct ExperimentResult
{
    std::string problem_id;
    std::optional<double> F_star;
    std::vector<RunSummary> runs;
    std::vector<RunTrace> traces;
};

// Runs every (method, seed) pair; writes traces and summary.json when write_files.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files = true);

std::string summary_json(const ExperimentResult& result);

// Temp file plus rename.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

RunTrace load_trace(const std::string& path);

struct CertifyReport
{
    std::size_t rows_checked = 0;
    std::size_t violations = 0;
    double max_violation = 0.0;
    std::optional<double> slope;
};

/*
    Checks 0 <= F - F* <= cert + tol on every row carrying a certificate.
    Throws when no row has one.
*/
CertifyReport certify_trace(const RunTrace& trace, double F_star, double tol, std::int64_t k_lo,
                            std::int64_t k_hi);

enum class PlotAxis
{
    Iterations,
    Time,
    Samples
};

PlotAxis plot_axis_from_string(const std::string& name);

struct LabelledTrace
{
    std::string method;
    std::string problem_id;
    RunTrace trace;
};

/*
    Long-format CSV `method,k,x,median,q25,q75,count` of F - F* (or F when
    F* is absent) across seeds, truncated to the longest common prefix of
    rows per method.
*/
std::string plot_series(const std::vector<LabelledTrace>& traces, PlotAxis axis, std::optional<double> F_star);

// Linear-interpolated quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

}  // namespace cdn

#endif  // CDN_EXPERIMENT_HPP_
