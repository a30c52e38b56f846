#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cdn/experiment.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cdn;
namespace fs = std::filesystem;

namespace {

fs::path Scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("cdn_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct Outcome
{
    int code;
    std::string out;
    std::string err;
};

Outcome Cli(const std::string& args, const fs::path& scratch)
{
    const fs::path out = scratch / "stdout.txt";
    const fs::path err = scratch / "stderr.txt";
    const std::string command =
        std::string(CDN_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(command.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(out.string()), read_file(err.string())};
}

void Write(const fs::path& path, const std::string& text)
{
    std::ofstream(path) << text;
}

const char* kSmallConfig = R"({
  "problem": {"synth": {"M": 200, "n": 10, "seed": 0}, "ball": {"p": 2, "D": 8}},
  "methods": ["cdn1"],
  "run": {"max_iters": 128, "timing": false}
})";

}  // namespace

TEST_CASE("config parsing")
{
    const ExperimentConfig c = parse_config(kSmallConfig);
    CHECK(c.methods.size() == 1);
    CHECK(c.methods[0].name == "cdn1");
    CHECK(c.problem.synth->M == 200);
    CHECK(c.problem.p == "2");
    CHECK(parse_config(serialize_config(c)) == c);

    ExperimentConfig rich = c;
    rich.problem.p = "inf";
    rich.problem.mu = 0.5;
    rich.problem.anchor = std::vector<double>(10, 0.1);
    rich.problem.holder_unknown = true;
    rich.methods.push_back(MethodSpec{.name = "svrg", .seed = 4, .step_grid = {0.1, 1.0}});
    rich.methods.push_back(MethodSpec{.name = "cdn1", .schedule = "geometric", .omega = 2.5});
    rich.run.cert_tol = 1e-9;
    rich.run.replications = 3;
    rich.run.slope_lo = 4;
    CHECK(parse_config(serialize_config(rich)) == rich);

    CHECK_THROWS_AS(parse_config(R"({"problem": {"synth": {}}, "methods": ["cdn1"], "bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"synth": {}}, "methods": ["newton9"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"synth": {}, "ball": {"D": -1}}, "methods": ["cdn1"]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"synth": {}, "mu": 1}, "methods": ["cdn2"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"synth": {}}, "methods": ["cdn1"], "run": {"replications": 0}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("run writes traces and a summary, deterministically")
{
    const fs::path dir = Scratch("run");
    Write(dir / "config.json", kSmallConfig);
    const Outcome first = Cli("run --config " + (dir / "config.json").string() + " --out " + (dir / "a").string(), dir);
    REQUIRE(first.code == 0);
    CHECK(fs::exists(dir / "a" / "cdn1_seed0.csv"));
    CHECK(fs::exists(dir / "a" / "cdn1_seed0.json"));
    REQUIRE(fs::exists(dir / "a" / "summary.json"));
    for (const auto& entry : fs::directory_iterator(dir / "a"))
    {
        CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
    }

    const nlohmann::json summary = nlohmann::json::parse(read_file((dir / "a" / "summary.json").string()));
    const nlohmann::json& run = summary.at("runs").at(0);
    for (const char* key : {"method", "seed", "final_F", "final_cert", "slope", "grad_samples_total",
                            "hess_samples_total", "wall_s"})
    {
        CHECK(run.contains(key));
    }
    CHECK(run.at("slope").get<double>() <= -1.7);

    const Outcome second = Cli("run --config " + (dir / "config.json").string() + " --out " + (dir / "b").string(), dir);
    REQUIRE(second.code == 0);
    CHECK(read_file((dir / "a" / "cdn1_seed0.csv").string()) == read_file((dir / "b" / "cdn1_seed0.csv").string()));

    SUBCASE("certify")
    {
        const Outcome c = Cli("certify " + (dir / "a" / "cdn1_seed0.csv").string(), dir);
        CHECK(c.code == 0);
        const nlohmann::json report = nlohmann::json::parse(c.out);
        CHECK(report.at(0).at("violations") == 0);
        CHECK(report.at(0).at("slope").get<double>() <= -1.7);
        // A wrong reference shows up as violations.
        CHECK(Cli("certify --fstar 1e3 " + (dir / "a" / "cdn1_seed0.csv").string(), dir).code == 4);
    }
    SUBCASE("plotdata")
    {
        const Outcome p = Cli("plotdata --x-axis samples " + (dir / "a" / "cdn1_seed0.csv").string() + " " +
                                  (dir / "b" / "cdn1_seed0.csv").string(),
                              dir);
        CHECK(p.code == 0);
        CHECK(p.out.rfind("method,k,x,median,q25,q75,count\n", 0) == 0);
        CHECK(Cli("plotdata", dir).code != 0);
        CHECK(Cli("plotdata --x-axis pixels " + (dir / "a" / "cdn1_seed0.csv").string(), dir).code != 0);
    }
}

TEST_CASE("missing inputs")
{
    const fs::path dir = Scratch("missing");
    const std::string absent = (dir / "no_such_file.svm").string();
    Write(dir / "config.json", R"({"problem": {"dataset": {"path": ")" + absent + R"("}}, "methods": ["cdn1"]})");
    const Outcome o = Cli("run --config " + (dir / "config.json").string() + " --out " + (dir / "o").string(), dir);
    CHECK(o.code == 2);
    CHECK(o.err.find(absent) != std::string::npos);
    CHECK(Cli("run --config " + (dir / "nope.json").string(), dir).code == 2);
    CHECK(Cli("certify --fstar 0 " + (dir / "nope.csv").string(), dir).code == 2);
}

TEST_CASE("certify needs certificates")
{
    const fs::path dir = Scratch("blank");
    Write(dir / "blank.csv", std::string(kTraceCsvHeader) + "\n0,0,1.5,,0,0,0\n1,0,1.2,,0,0,0\n");
    const Outcome o = Cli("certify --fstar 1 " + (dir / "blank.csv").string(), dir);
    CHECK(o.code == 1);
    CHECK(o.err.find("certificate") != std::string::npos);
    CHECK_THROWS_AS(certify_trace(load_trace((dir / "blank.csv").string()), 1.0, 1e-8, 8, 128), Error);
}

TEST_CASE("plot series aggregation")
{
    auto make = [](int rows, double shift) {
        RunTrace t("svr_newton");
        for (int k = 0; k < rows; ++k)
        {
            TraceRow row;
            row.k = k;
            row.F = 1.0 + shift + 1.0 / (k + 1);
            row.grad_samples = static_cast<std::uint64_t>(10 * k);
            t.append(row);
        }
        return t;
    };
    std::vector<LabelledTrace> traces;
    for (int seed = 0; seed < 10; ++seed)
    {
        traces.push_back({"svr_newton", "p", make(20 + seed, 0.01 * seed)});
    }
    const std::string csv = plot_series(traces, PlotAxis::Samples, 1.0);
    std::istringstream in(csv);
    std::string line;
    int lines = -1;
    std::string last;
    while (std::getline(in, line))
    {
        ++lines;
        last = line;
    }
    CHECK(lines == 20);
    CHECK(last.rfind("svr_newton,19,190,", 0) == 0);
    CHECK(last.substr(last.rfind(',') + 1) == "10");

    CHECK_THROWS_AS(plot_series({}, PlotAxis::Iterations, std::nullopt), Error);
    traces.push_back({"svr_newton", "q", make(5, 0)});
    CHECK_THROWS_AS(plot_series(traces, PlotAxis::Iterations, std::nullopt), Error);
    CHECK_THROWS_AS(plot_axis_from_string("pixels"), Error);
    CHECK(quantile({3, 1, 2, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({3, 1, 2, 4}, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("stochastic replications and tuning")
{
    const fs::path dir = Scratch("stoch");
    Write(dir / "config.json", R"({
      "problem": {"synth": {"M": 300, "n": 5, "seed": 1}, "ball": {"D": 4}},
      "methods": [{"name": "svr_newton", "seed": 0}, {"name": "svrg", "step": 0.5}],
      "run": {"max_iters": 16, "replications": 3, "timing": false}
    })");
    const Outcome o = Cli("run --config " + (dir / "config.json").string() + " --out " + (dir / "o").string(), dir);
    REQUIRE(o.code == 0);
    for (int seed = 0; seed < 3; ++seed)
    {
        CHECK(fs::exists(dir / "o" / ("svr_newton_seed" + std::to_string(seed) + ".csv")));
        CHECK(fs::exists(dir / "o" / ("svrg_seed" + std::to_string(seed) + ".csv")));
    }
    const Outcome t = Cli("tune --config " + (dir / "config.json").string() +
                              " --method svrg --grid 0.01,0.1,1 --out " + (dir / "o").string(),
                          dir);
    CHECK(t.code == 0);
    const nlohmann::json tuned = nlohmann::json::parse(read_file((dir / "o" / "tune_svrg.json").string()));
    CHECK(tuned.at("scores").size() == 3);
    CHECK(Cli("tune --config " + (dir / "config.json").string() + " --method cdn1", dir).code == 1);
}
