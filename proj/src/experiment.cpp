#include "cdn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include "cdn/data_ingest.hpp"
#include "json.hpp"

namespace cdn {

using Json = nlohmann::ordered_json;

namespace {

const std::set<std::string> kMethods = {"cdn1", "cdn2",        "aggregating", "stoch_newton", "svr_newton", "geometric",
                                        "frank_wolfe", "gm", "fgm", "sgd", "svrg"};

void RejectUnknownKeys(const Json& object, const std::set<std::string>& allowed, const std::string& where)
{
    if (!object.is_object())
    {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& item : object.items())
    {
        if (allowed.count(item.key()) == 0)
        {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <class T>
T Get(const Json& object, const std::string& key, const std::string& where)
{
    try
    {
        return object.at(key).get<T>();
    }
    catch (const nlohmann::json::exception&)
    {
        throw ConfigError("invalid or missing '" + key + "' in " + where);
    }
}

template <class T>
void Read(const Json& object, const std::string& key, const std::string& where, T* out)
{
    if (object.contains(key))
    {
        *out = Get<T>(object, key, where);
    }
}

template <class T>
void ReadOptional(const Json& object, const std::string& key, const std::string& where, std::optional<T>* out)
{
    if (object.contains(key) && !object.at(key).is_null())
    {
        *out = Get<T>(object, key, where);
    }
}

std::string NormP(const Json& value)
{
    if (value.is_number())
    {
        const double p = value.get<double>();
        if (p == 1.0)
        {
            return "1";
        }
        if (p == 2.0)
        {
            return "2";
        }
    }
    else if (value.is_string())
    {
        const std::string p = value.get<std::string>();
        if (p == "1" || p == "2" || p == "inf")
        {
            return p;
        }
    }
    throw ConfigError("ball p must be 1, 2 or \"inf\"");
}

NormKind ToNormKind(const std::string& p)
{
    return p == "1" ? NormKind::L1 : (p == "2" ? NormKind::L2 : NormKind::Linf);
}

Vector ToVector(const std::vector<double>& values)
{
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace

bool is_stochastic_method(const std::string& name)
{
    return name == "stoch_newton" || name == "svr_newton" || name == "sgd" || name == "svrg";
}

void ExperimentConfig::validate() const
{
    if (problem.synth.has_value() == problem.dataset.has_value())
    {
        throw ConfigError("problem needs exactly one of 'synth' and 'dataset'");
    }
    if (problem.synth && (problem.synth->M < 1 || problem.synth->n < 1 || !(problem.synth->conditioning > 0.0)))
    {
        throw ConfigError("synth needs M >= 1, n >= 1 and conditioning > 0");
    }
    if (!(problem.D > 0.0) || !std::isfinite(problem.D))
    {
        throw ConfigError("ball diameter D must be positive");
    }
    if (!(problem.mu >= 0.0))
    {
        throw ConfigError("mu must be nonnegative");
    }
    if (!(problem.nu >= 0.0 && problem.nu <= 1.0))
    {
        throw ConfigError("nu must lie in [0, 1]");
    }
    if (problem.H && !(*problem.H >= 0.0))
    {
        throw ConfigError("Holder constant must be nonnegative");
    }
    if (methods.empty())
    {
        throw ConfigError("at least one method is required");
    }
    for (const MethodSpec& m : methods)
    {
        if (kMethods.count(m.name) == 0)
        {
            throw ConfigError("unknown method '" + m.name + "'");
        }
        if (m.schedule != "power" && m.schedule != "geometric" && m.schedule != "newton")
        {
            throw ConfigError("unknown schedule '" + m.schedule + "'");
        }
        if (m.schedule == "power" && m.power < 1)
        {
            throw ConfigError("power schedule needs p >= 1");
        }
        if (m.schedule == "geometric" && !(m.omega && *m.omega > 0.0))
        {
            throw ConfigError("geometric schedule needs omega > 0");
        }
        if (!(m.eps > 0.0))
        {
            throw ConfigError("eps must be positive");
        }
        if (m.max_iters && *m.max_iters < 1)
        {
            throw ConfigError("max_iters must be at least 1");
        }
        if ((m.name == "sgd" || m.name == "svrg") && !(m.step > 0.0) && m.step_grid.empty())
        {
            throw ConfigError(m.name + " needs a positive 'step' or a 'step_grid'");
        }
        if ((m.name == "cdn2" || m.name == "frank_wolfe") && problem.mu > 0.0)
        {
            throw ConfigError(m.name + " is incompatible with a strongly convex composite (mu > 0)");
        }
        if (m.name == "geometric" && !(problem.mu > 0.0))
        {
            throw ConfigError("geometric needs mu > 0");
        }
    }
    if (run.max_iters < 1)
    {
        throw ConfigError("run.max_iters must be at least 1");
    }
    if (run.replications < 1)
    {
        throw ConfigError("replications must be at least 1");
    }
    if (run.cert_every < 0)
    {
        throw ConfigError("cert_every must be nonnegative");
    }
}

ExperimentConfig parse_config(const std::string& json_text)
{
    Json root;
    try
    {
        root = Json::parse(json_text);
    }
    catch (const nlohmann::json::exception& error)
    {
        throw ConfigError(std::string("config is not valid JSON: ") + error.what());
    }
    RejectUnknownKeys(root, {"problem", "methods", "run"}, "config");
    ExperimentConfig config;

    if (!root.contains("problem"))
    {
        throw ConfigError("config needs a 'problem' section");
    }
    const Json& pj = root.at("problem");
    RejectUnknownKeys(pj, {"synth", "dataset", "label_fold", "ball", "mu", "anchor", "holder", "x0"}, "problem");
    ProblemConfig& problem = config.problem;
    if (pj.contains("synth"))
    {
        const Json& sj = pj.at("synth");
        RejectUnknownKeys(sj, {"M", "n", "seed", "conditioning"}, "problem.synth");
        SynthSpec synth;
        Read(sj, "M", "problem.synth", &synth.M);
        Read(sj, "n", "problem.synth", &synth.n);
        Read(sj, "seed", "problem.synth", &synth.seed);
        Read(sj, "conditioning", "problem.synth", &synth.conditioning);
        problem.synth = synth;
    }
    if (pj.contains("dataset"))
    {
        const Json& dj = pj.at("dataset");
        RejectUnknownKeys(dj, {"path", "n"}, "problem.dataset");
        DatasetSpec dataset;
        dataset.path = Get<std::string>(dj, "path", "problem.dataset");
        ReadOptional(dj, "n", "problem.dataset", &dataset.n);
        problem.dataset = dataset;
    }
    Read(pj, "label_fold", "problem", &problem.label_fold);
    if (pj.contains("ball"))
    {
        const Json& bj = pj.at("ball");
        RejectUnknownKeys(bj, {"p", "D", "center"}, "problem.ball");
        if (bj.contains("p"))
        {
            problem.p = NormP(bj.at("p"));
        }
        Read(bj, "D", "problem.ball", &problem.D);
        Read(bj, "center", "problem.ball", &problem.center);
    }
    Read(pj, "mu", "problem", &problem.mu);
    Read(pj, "anchor", "problem", &problem.anchor);
    if (pj.contains("holder"))
    {
        const Json& hj = pj.at("holder");
        if (hj.is_string() && hj.get<std::string>() == "unknown")
        {
            problem.holder_unknown = true;
        }
        else
        {
            RejectUnknownKeys(hj, {"nu", "H"}, "problem.holder");
            Read(hj, "nu", "problem.holder", &problem.nu);
            ReadOptional(hj, "H", "problem.holder", &problem.H);
        }
    }
    Read(pj, "x0", "problem", &problem.x0);

    if (!root.contains("methods") || !root.at("methods").is_array())
    {
        throw ConfigError("config needs a 'methods' array");
    }
    for (const Json& mj : root.at("methods"))
    {
        if (mj.is_string())
        {
            MethodSpec spec;
            spec.name = mj.get<std::string>();
            config.methods.push_back(spec);
            continue;
        }
        RejectUnknownKeys(mj,
                          {"name", "schedule", "power", "omega", "eps", "seed", "batch_policy", "cap_at_M", "max_iters",
                           "step", "step_grid", "epoch_len", "initial_L"},
                          "methods[]");
        MethodSpec spec;
        spec.name = Get<std::string>(mj, "name", "methods[]");
        Read(mj, "schedule", "methods[]", &spec.schedule);
        Read(mj, "power", "methods[]", &spec.power);
        ReadOptional(mj, "omega", "methods[]", &spec.omega);
        Read(mj, "eps", "methods[]", &spec.eps);
        Read(mj, "seed", "methods[]", &spec.seed);
        if (mj.contains("batch_policy"))
        {
            const std::string policy = Get<std::string>(mj, "batch_policy", "methods[]");
            if (policy != "with_replacement" && policy != "without_replacement")
            {
                throw ConfigError("batch_policy must be with_replacement or without_replacement");
            }
            spec.with_replacement = policy == "with_replacement";
        }
        Read(mj, "cap_at_M", "methods[]", &spec.cap_at_M);
        ReadOptional(mj, "max_iters", "methods[]", &spec.max_iters);
        Read(mj, "step", "methods[]", &spec.step);
        Read(mj, "step_grid", "methods[]", &spec.step_grid);
        Read(mj, "epoch_len", "methods[]", &spec.epoch_len);
        ReadOptional(mj, "initial_L", "methods[]", &spec.initial_L);
        config.methods.push_back(spec);
    }

    if (root.contains("run"))
    {
        const Json& rj = root.at("run");
        RejectUnknownKeys(rj,
                          {"max_iters", "time_budget_s", "cert_every", "cert_tol", "output_dir", "replications", "timing",
                           "reference", "slope_window"},
                          "run");
        RunOptions& run = config.run;
        Read(rj, "max_iters", "run", &run.max_iters);
        ReadOptional(rj, "time_budget_s", "run", &run.time_budget_s);
        Read(rj, "cert_every", "run", &run.cert_every);
        ReadOptional(rj, "cert_tol", "run", &run.cert_tol);
        Read(rj, "output_dir", "run", &run.output_dir);
        Read(rj, "replications", "run", &run.replications);
        Read(rj, "timing", "run", &run.timing);
        Read(rj, "reference", "run", &run.reference);
        if (rj.contains("slope_window"))
        {
            const auto window = Get<std::vector<std::int64_t>>(rj, "slope_window", "run");
            if (window.size() != 2 || window[0] > window[1])
            {
                throw ConfigError("slope_window must be [lo, hi] with lo <= hi");
            }
            run.slope_lo = window[0];
            run.slope_hi = window[1];
        }
    }
    config.validate();
    return config;
}

std::string serialize_config(const ExperimentConfig& config)
{
    Json root;
    Json problem;
    const ProblemConfig& p = config.problem;
    if (p.synth)
    {
        problem["synth"] = {{"M", p.synth->M}, {"n", p.synth->n}, {"seed", p.synth->seed},
                            {"conditioning", p.synth->conditioning}};
    }
    if (p.dataset)
    {
        Json dataset = {{"path", p.dataset->path}};
        if (p.dataset->n)
        {
            dataset["n"] = *p.dataset->n;
        }
        problem["dataset"] = dataset;
    }
    problem["label_fold"] = p.label_fold;
    Json ball = {{"p", p.p}, {"D", p.D}};
    if (!p.center.empty())
    {
        ball["center"] = p.center;
    }
    problem["ball"] = ball;
    problem["mu"] = p.mu;
    if (!p.anchor.empty())
    {
        problem["anchor"] = p.anchor;
    }
    if (p.holder_unknown)
    {
        problem["holder"] = "unknown";
    }
    else
    {
        Json holder = {{"nu", p.nu}};
        if (p.H)
        {
            holder["H"] = *p.H;
        }
        problem["holder"] = holder;
    }
    if (!p.x0.empty())
    {
        problem["x0"] = p.x0;
    }
    root["problem"] = problem;

    Json methods = Json::array();
    for (const MethodSpec& m : config.methods)
    {
        Json mj = {{"name", m.name}, {"schedule", m.schedule}, {"power", m.power}};
        if (m.omega)
        {
            mj["omega"] = *m.omega;
        }
        mj["eps"] = m.eps;
        mj["seed"] = m.seed;
        mj["batch_policy"] = m.with_replacement ? "with_replacement" : "without_replacement";
        mj["cap_at_M"] = m.cap_at_M;
        if (m.max_iters)
        {
            mj["max_iters"] = *m.max_iters;
        }
        mj["step"] = m.step;
        if (!m.step_grid.empty())
        {
            mj["step_grid"] = m.step_grid;
        }
        mj["epoch_len"] = m.epoch_len;
        if (m.initial_L)
        {
            mj["initial_L"] = *m.initial_L;
        }
        methods.push_back(mj);
    }
    root["methods"] = methods;

    const RunOptions& r = config.run;
    Json run = {{"max_iters", r.max_iters}};
    if (r.time_budget_s)
    {
        run["time_budget_s"] = *r.time_budget_s;
    }
    run["cert_every"] = r.cert_every;
    if (r.cert_tol)
    {
        run["cert_tol"] = *r.cert_tol;
    }
    run["output_dir"] = r.output_dir;
    run["replications"] = r.replications;
    run["timing"] = r.timing;
    run["reference"] = r.reference;
    run["slope_window"] = {r.slope_lo, r.slope_hi};
    root["run"] = run;
    return root.dump(2) + "\n";
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw MissingFileError(path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

ExperimentConfig load_config(const std::string& path)
{
    return parse_config(read_file(path));
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path())
    {
        fs::create_directories(target.parent_path());
    }
    const fs::path temp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            throw Error("cannot write " + temp.string());
        }
        out << content;
        out.flush();
        if (!out)
        {
            throw Error("write failed for " + temp.string());
        }
    }
    fs::rename(temp, target);
}

std::string problem_id(const ProblemConfig& config)
{
    std::ostringstream id;
    if (config.synth)
    {
        id << "synth(M=" << config.synth->M << ",n=" << config.synth->n << ",seed=" << config.synth->seed
           << ",cond=" << format_double(config.synth->conditioning) << ")";
    }
    else if (config.dataset)
    {
        id << "dataset(" << std::filesystem::path(config.dataset->path).filename().string() << ")";
    }
    id << ";fold=" << (config.label_fold ? 1 : 0) << ";ball(p=" << config.p << ",D=" << format_double(config.D);
    if (!config.center.empty())
    {
        id << ",center=[";
        for (std::size_t i = 0; i < config.center.size(); ++i)
        {
            id << (i ? "," : "") << format_double(config.center[i]);
        }
        id << "]";
    }
    id << ");mu=" << format_double(config.mu);
    return id.str();
}

Problem build_problem(const ProblemConfig& config)
{
    Dataset data;
    if (config.synth)
    {
        data = synth_logistic(config.synth->M, config.synth->n, config.synth->seed, config.synth->conditioning);
    }
    else if (config.dataset)
    {
        if (!std::filesystem::exists(config.dataset->path))
        {
            throw MissingFileError(config.dataset->path);
        }
        data = load_libsvm(config.dataset->path, config.dataset->n);
    }
    else
    {
        throw ConfigError("problem needs 'synth' or 'dataset'");
    }

    Problem problem;
    problem.oracle = std::make_unique<LogisticOracle>(data, config.label_fold);
    const Index n = problem.oracle->dim();
    Vector center = Vector::Zero(n);
    if (!config.center.empty())
    {
        if (static_cast<Index>(config.center.size()) != n)
        {
            throw ConfigError("ball center has the wrong dimension");
        }
        center = ToVector(config.center);
    }
    BallIndicator ball(ToNormKind(config.p), center, 0.5 * config.D);
    Vector anchor = center;
    if (!config.anchor.empty())
    {
        if (static_cast<Index>(config.anchor.size()) != n)
        {
            throw ConfigError("anchor has the wrong dimension");
        }
        anchor = ToVector(config.anchor);
    }
    problem.composite = std::make_unique<Composite>(ball, config.mu, anchor);
    problem.x0 = center;
    if (!config.x0.empty())
    {
        if (static_cast<Index>(config.x0.size()) != n)
        {
            throw ConfigError("x0 has the wrong dimension");
        }
        problem.x0 = ToVector(config.x0);
        if (!ball.contains(problem.x0))
        {
            throw ConfigError("x0 lies outside the ball");
        }
    }
    problem.holder.nu = config.nu;
    if (config.holder_unknown)
    {
        problem.holder_certified = false;
        problem.holder.H = 0.0;
    }
    else if (config.H)
    {
        problem.holder.H = *config.H;
    }
    else
    {
        if (config.nu != 1.0)
        {
            throw ConfigError("the built-in Holder bound is for nu = 1; give holder.H explicitly");
        }
        problem.holder.H = problem.oracle->constants().L2;
    }
    problem.id = problem_id(config);
    return problem;
}

namespace {

MethodConfig ToMethodConfig(const MethodSpec& spec, const RunOptions& run, std::uint64_t seed)
{
    MethodConfig config;
    if (spec.schedule == "power")
    {
        config.schedule = Schedule::power(spec.power);
    }
    else if (spec.schedule == "geometric")
    {
        config.schedule = Schedule::geometric(*spec.omega);
    }
    else
    {
        config.schedule = Schedule::newton();
    }
    config.max_iters = spec.max_iters.value_or(run.max_iters);
    config.eps = spec.eps;
    config.cert_every = run.cert_every;
    config.cert_tol = run.cert_tol;
    config.time_budget_s = run.time_budget_s;
    config.seed = seed;
    config.sampling.with_replacement = spec.with_replacement;
    config.sampling.cap_at_M = spec.cap_at_M;
    config.timing = run.timing;
    return config;
}

RunTrace RunStochasticBaseline(const MethodSpec& spec, const Problem& problem, const RunOptions& run,
                               std::uint64_t seed, double step)
{
    StochasticBaselineConfig config;
    config.step = step;
    config.seed = seed;
    config.epoch_len = spec.epoch_len;
    config.max_iters = spec.max_iters.value_or(run.max_iters) * problem.oracle->size();
    config.timing = run.timing;
    if (spec.name == "sgd")
    {
        return sgd_run(*problem.oracle, *problem.composite, config, problem.x0);
    }
    return svrg_run(*problem.oracle, *problem.composite, config, problem.x0);
}

RunTrace RunMethod(const MethodSpec& spec, const Problem& problem, const RunOptions& run, std::uint64_t seed,
                   double* tuned_step)
{
    const LogisticOracle& oracle = *problem.oracle;
    const Composite& composite = *problem.composite;
    const MethodConfig config = ToMethodConfig(spec, run, seed);
    if (spec.name == "cdn1")
    {
        return cdn1_run(oracle, composite, config, problem.x0);
    }
    if (spec.name == "cdn2")
    {
        return cdn2_run(oracle, composite, config, problem.x0);
    }
    if (spec.name == "aggregating")
    {
        AggregatingOptions options;
        options.holder = problem.holder;
        options.partial = !problem.holder_certified;
        return aggregating_run(oracle, composite, config, problem.x0, options);
    }
    if (spec.name == "stoch_newton")
    {
        return stoch_newton_run(oracle, composite, config, problem.x0);
    }
    if (spec.name == "svr_newton")
    {
        return svr_newton_run(oracle, composite, config, problem.x0);
    }
    if (spec.name == "geometric")
    {
        if (!problem.holder_certified)
        {
            throw ConfigError("geometric needs a Holder constant");
        }
        return geometric_schedule_run(oracle, composite, config, problem.x0, problem.holder,
                                      euclidean_diameter(composite.ball()));
    }
    if (spec.name == "frank_wolfe" || spec.name == "gm" || spec.name == "fgm")
    {
        BaselineConfig baseline;
        baseline.max_iters = config.max_iters;
        baseline.timing = run.timing;
        baseline.initial_L = spec.initial_L.value_or(oracle.constants().L1);
        if (spec.name == "frank_wolfe")
        {
            return frank_wolfe_run(oracle, composite, baseline, problem.x0);
        }
        return spec.name == "gm" ? gm_run(oracle, composite, baseline, problem.x0)
                                 : fgm_run(oracle, composite, baseline, problem.x0);
    }
    // sgd / svrg
    double step = spec.step;
    if (!(step > 0.0))
    {
        if (!(*tuned_step > 0.0))
        {
            const TuneResult tuned = tune_step(
                [&](double s) { return RunStochasticBaseline(spec, problem, run, seed, s); }, spec.step_grid);
            *tuned_step = tuned.best_step;
        }
        step = *tuned_step;
    }
    RunTrace trace = RunStochasticBaseline(spec, problem, run, seed, step);
    trace.stats["step"] = step;
    return trace;
}

Json OptionalJson(const std::optional<double>& value)
{
    return value && std::isfinite(*value) ? Json(*value) : Json(nullptr);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files)
{
    config.validate();
    const Problem problem = build_problem(config.problem);
    ExperimentResult result;
    result.problem_id = problem.id;
    if (config.run.reference)
    {
        result.F_star = reference_solve(*problem.oracle, *problem.composite, problem.x0).F_star;
    }
    const std::filesystem::path out_dir(config.run.output_dir);

    for (const MethodSpec& spec : config.methods)
    {
        const int replications = is_stochastic_method(spec.name) ? config.run.replications : 1;
        double tuned_step = 0.0;
        for (int r = 0; r < replications; ++r)
        {
            const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(r);
            RunTrace trace = RunMethod(spec, problem, config.run, seed, &tuned_step);
            trace.set_method(spec.name);
            trace.seed = seed;

            RunSummary summary;
            summary.method = spec.name;
            summary.seed = seed;
            summary.status = trace.status;
            if (!trace.empty())
            {
                summary.final_F = trace.back().F;
                summary.grad_samples_total = trace.back().grad_samples;
                summary.hess_samples_total = trace.back().hess_samples;
                for (auto it = trace.rows().rbegin(); it != trace.rows().rend(); ++it)
                {
                    if (it->cert)
                    {
                        summary.final_cert = it->cert;
                        break;
                    }
                }
            }
            summary.slope = certificate_slope(trace, config.run.slope_lo, config.run.slope_hi);
            summary.wall_s = config.run.timing ? trace.stats["wall_s"] : 0.0;
            if (result.F_star)
            {
                summary.residual = summary.final_F - *result.F_star;
            }
            const std::string stem = spec.name + "_seed" + std::to_string(seed);
            summary.csv_file = stem + ".csv";
            summary.json_file = stem + ".json";
            if (write_files)
            {
                write_file_atomic((out_dir / summary.csv_file).string(), trace.to_csv());
                write_file_atomic((out_dir / summary.json_file).string(), trace.to_json());
            }
            result.runs.push_back(summary);
            result.traces.push_back(std::move(trace));
        }
    }
    if (write_files)
    {
        write_file_atomic((out_dir / "summary.json").string(), summary_json(result));
    }
    return result;
}

std::string summary_json(const ExperimentResult& result)
{
    Json root;
    root["problem_id"] = result.problem_id;
    root["F_star"] = OptionalJson(result.F_star);
    Json runs = Json::array();
    for (const RunSummary& s : result.runs)
    {
        Json item;
        item["method"] = s.method;
        item["seed"] = s.seed;
        item["final_F"] = s.final_F;
        item["final_cert"] = OptionalJson(s.final_cert);
        item["slope"] = OptionalJson(s.slope);
        item["grad_samples_total"] = s.grad_samples_total;
        item["hess_samples_total"] = s.hess_samples_total;
        item["wall_s"] = s.wall_s;
        item["status"] = s.status;
        item["residual"] = OptionalJson(s.residual);
        item["csv"] = s.csv_file;
        item["json"] = s.json_file;
        runs.push_back(item);
    }
    root["runs"] = runs;
    return root.dump(2) + "\n";
}

RunTrace load_trace(const std::string& path)
{
    const std::string text = read_file(path);
    if (std::filesystem::path(path).extension() == ".json")
    {
        return RunTrace::from_json(text);
    }
    return RunTrace::from_csv(text);
}

CertifyReport certify_trace(const RunTrace& trace, double F_star, double tol, std::int64_t k_lo,
                            std::int64_t k_hi)
{
    CertifyReport report;
    for (const TraceRow& row : trace.rows())
    {
        if (!row.cert)
        {
            continue;
        }
        ++report.rows_checked;
        const double gap = row.F - F_star;
        const double excess = std::max(-gap, gap - *row.cert);
        report.max_violation = std::max(report.max_violation, excess);
        if (gap < -tol || gap > *row.cert + tol)
        {
            ++report.violations;
        }
    }
    if (report.rows_checked == 0)
    {
        throw Error("trace has no certificate values");
    }
    report.slope = certificate_slope(trace, k_lo, k_hi);
    return report;
}

PlotAxis plot_axis_from_string(const std::string& name)
{
    if (name == "iterations")
    {
        return PlotAxis::Iterations;
    }
    if (name == "time")
    {
        return PlotAxis::Time;
    }
    if (name == "samples")
    {
        return PlotAxis::Samples;
    }
    throw Error("x-axis must be iterations, time or samples");
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty())
    {
        throw Error("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double position = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(position));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double weight = position - static_cast<double>(lo);
    return values[lo] + weight * (values[hi] - values[lo]);
}

std::string plot_series(const std::vector<LabelledTrace>& traces, PlotAxis axis, std::optional<double> F_star)
{
    if (traces.empty())
    {
        throw Error("no traces given");
    }
    std::set<std::string> ids;
    for (const LabelledTrace& t : traces)
    {
        if (!t.problem_id.empty())
        {
            ids.insert(t.problem_id);
        }
    }
    if (ids.size() > 1)
    {
        throw Error("traces come from different problems: " + *ids.begin() + " vs " + *std::next(ids.begin()));
    }

    std::map<std::string, std::vector<const RunTrace*>> groups;
    std::vector<std::string> order;
    for (const LabelledTrace& t : traces)
    {
        if (groups.count(t.method) == 0)
        {
            order.push_back(t.method);
        }
        groups[t.method].push_back(&t.trace);
    }

    std::ostringstream out;
    out << "method,k,x,median,q25,q75,count\n";
    for (const std::string& method : order)
    {
        const auto& group = groups[method];
        std::size_t common = group.front()->rows().size();
        for (const RunTrace* trace : group)
        {
            common = std::min(common, trace->rows().size());
        }
        for (std::size_t i = 0; i < common; ++i)
        {
            std::vector<double> xs;
            std::vector<double> ys;
            for (const RunTrace* trace : group)
            {
                const TraceRow& row = trace->rows()[i];
                switch (axis)
                {
                case PlotAxis::Iterations:
                    xs.push_back(static_cast<double>(row.k));
                    break;
                case PlotAxis::Time:
                    xs.push_back(row.elapsed_s);
                    break;
                case PlotAxis::Samples:
                    xs.push_back(static_cast<double>(row.grad_samples));
                    break;
                }
                ys.push_back(F_star ? row.F - *F_star : row.F);
            }
            out << method << ',' << group.front()->rows()[i].k << ',' << format_double(quantile(xs, 0.5)) << ','
                << format_double(quantile(ys, 0.5)) << ',' << format_double(quantile(ys, 0.25)) << ','
                << format_double(quantile(ys, 0.75)) << ',' << group.size() << '\n';
        }
    }
    return out.str();
}

}  // namespace cdn
