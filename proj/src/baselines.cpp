#include "cdn/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace cdn {

namespace {

class Clock
{
public:
    explicit Clock(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    double elapsed() const
    {
        return enabled_ ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count() : 0.0;
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

class Counter
{
public:
    explicit Counter(const SmoothOracle& oracle)
        : logistic_(dynamic_cast<const LogisticOracle*>(&oracle)),
          grad0_(logistic_ ? logistic_->grad_samples() : 0),
          hess0_(logistic_ ? logistic_->hess_samples() : 0)
    {
    }
    void fill(TraceRow* row) const
    {
        row->grad_samples = logistic_ ? logistic_->grad_samples() - grad0_ : 0;
        row->hess_samples = logistic_ ? logistic_->hess_samples() - hess0_ : 0;
    }

private:
    const LogisticOracle* logistic_;
    std::uint64_t grad0_;
    std::uint64_t hess0_;
};

void CheckStart(const SmoothOracle& oracle, const Composite& composite, std::int64_t max_iters, const Vector& x0)
{
    if (max_iters < 1)
    {
        throw Error("max_iters must be at least 1");
    }
    if (oracle.dim() != composite.dim() || x0.size() != composite.dim())
    {
        throw Error("dimension mismatch between oracle, composite and starting point");
    }
    if (!x0.allFinite() || !composite.ball().contains(x0))
    {
        throw Error("starting point is infeasible");
    }
}

Vector Inside(const BallIndicator& ball, const Vector& x)
{
    return ball.distance_from_center(x) <= ball.radius() ? x : ball.project(x);
}

double Objective(const Composite& composite, double f, const Vector& x)
{
    return f + composite.quadratic_part(x);
}

}  // namespace

RunTrace frank_wolfe_run(const SmoothOracle& oracle, const Composite& composite, const BaselineConfig& config,
                         const Vector& x0)
{
    if (!composite.is_indicator())
    {
        throw Error("Frank-Wolfe requires an indicator composite (mu = 0)");
    }
    CheckStart(oracle, composite, config.max_iters, x0);
    RunTrace trace("frank_wolfe");
    const Counter counter(oracle);
    const Clock clock(config.timing);
    const BallIndicator& ball = composite.ball();
    Vector x = x0;
    for (std::int64_t k = 0;; ++k)
    {
        TraceRow row;
        row.k = k;
        counter.fill(&row);
        const bool stepping = k < config.max_iters;
        Vector v;
        if (stepping)
        {
            const Evaluation e = oracle.evaluate(x, 1);
            row.F = e.f;
            v = ball.linear_minimizer(*e.grad);
            row.cert = e.grad->dot(x - v);
        }
        else
        {
            row.F = oracle.value(x);
        }
        row.elapsed_s = clock.elapsed();
        trace.append(row);
        if (!stepping)
        {
            break;
        }
        const double gamma = 2.0 / (static_cast<double>(k) + 2.0);
        x = Inside(ball, x + gamma * (v - x));
    }
    trace.status = "max_iters";
    trace.stats["wall_s"] = clock.elapsed();
    return trace;
}

RunTrace gm_run(const SmoothOracle& oracle, const Composite& composite, const BaselineConfig& config,
                const Vector& x0)
{
    CheckStart(oracle, composite, config.max_iters, x0);
    if (!(config.initial_L > 0.0))
    {
        throw Error("initial Lipschitz estimate must be positive");
    }
    RunTrace trace("gm");
    const Counter counter(oracle);
    const Clock clock(config.timing);
    LineSearchState search{config.initial_L};
    double backtracks = 0.0;
    Vector x = x0;
    for (std::int64_t k = 0;; ++k)
    {
        TraceRow row;
        row.k = k;
        counter.fill(&row);
        const bool stepping = k < config.max_iters;
        const Evaluation e = oracle.evaluate(x, stepping ? 1 : 0);
        row.F = Objective(composite, e.f, x);
        row.elapsed_s = clock.elapsed();
        trace.append(row);
        if (!stepping)
        {
            break;
        }
        const Vector& g = *e.grad;
        for (;;)
        {
            const Vector next = composite.prox(x - g / search.L, search.L);
            const Vector d = next - x;
            if (oracle.value(next) <= e.f + g.dot(d) + 0.5 * search.L * d.squaredNorm())
            {
                x = next;
                break;
            }
            search.L *= search.increase;
            backtracks += 1.0;
            if (!std::isfinite(search.L))
            {
                trace.status = "line_search_failure";
                trace.stats["backtracks"] = backtracks;
                return trace;
            }
        }
        search.L *= search.decrease;
    }
    trace.status = "max_iters";
    trace.stats["backtracks"] = backtracks;
    trace.stats["wall_s"] = clock.elapsed();
    return trace;
}

RunTrace fgm_run(const SmoothOracle& oracle, const Composite& composite, const BaselineConfig& config,
                 const Vector& x0)
{
    CheckStart(oracle, composite, config.max_iters, x0);
    if (!(config.initial_L > 0.0))
    {
        throw Error("initial Lipschitz estimate must be positive");
    }
    RunTrace trace("fgm");
    const Counter counter(oracle);
    const Clock clock(config.timing);
    LineSearchState search{config.initial_L};
    double backtracks = 0.0;
    double A = 0.0;
    Vector x = x0;
    Vector v = x0;
    for (std::int64_t k = 0;; ++k)
    {
        TraceRow row;
        row.k = k;
        counter.fill(&row);
        row.F = Objective(composite, oracle.value(x), x);
        row.elapsed_s = clock.elapsed();
        trace.append(row);
        if (k >= config.max_iters)
        {
            break;
        }
        for (;;)
        {
            const double a = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * search.L * A)) / search.L;
            const double A_next = A + a;
            const double tau = a / A_next;
            const Vector y = tau * v + (1.0 - tau) * x;
            const Evaluation e = oracle.evaluate(y, 1);
            const Vector& g = *e.grad;
            const Vector T = composite.prox(y - g / search.L, search.L);
            const Vector d = T - y;
            if (oracle.value(T) <= e.f + g.dot(d) + 0.5 * search.L * d.squaredNorm())
            {
                v = Inside(composite.ball(), T + (A / a) * (T - x));
                x = T;
                A = A_next;
                break;
            }
            search.L *= search.increase;
            backtracks += 1.0;
            if (!std::isfinite(search.L))
            {
                trace.status = "line_search_failure";
                trace.stats["backtracks"] = backtracks;
                return trace;
            }
        }
        search.L *= search.decrease;
    }
    trace.status = "max_iters";
    trace.stats["backtracks"] = backtracks;
    trace.stats["wall_s"] = clock.elapsed();
    return trace;
}

namespace {

void CheckStochastic(const StochasticBaselineConfig& config)
{
    if (!(config.step > 0.0) || !std::isfinite(config.step))
    {
        throw Error("step size must be positive");
    }
    if (config.epoch_len < 0 || config.record_every < 0)
    {
        throw Error("epoch length and record cadence must be nonnegative");
    }
}

}  // namespace

RunTrace sgd_run(const LogisticOracle& oracle, const Composite& composite, const StochasticBaselineConfig& config,
                 const Vector& x0)
{
    CheckStochastic(config);
    CheckStart(oracle, composite, config.max_iters, x0);
    RunTrace trace("sgd");
    trace.seed = config.seed;
    const Counter counter(oracle);
    const Clock clock(config.timing);
    const RandomStream stream = RandomStream(config.seed).derive(11);
    const auto M = static_cast<std::uint64_t>(oracle.size());
    const std::int64_t record = config.record_every > 0 ? config.record_every : oracle.size();
    const double L = 1.0 / config.step;
    Vector x = x0;
    for (std::int64_t t = 0;; ++t)
    {
        if (t % record == 0 || t == config.max_iters)
        {
            TraceRow row;
            row.k = t;
            counter.fill(&row);
            row.F = Objective(composite, oracle.value(x), x);
            row.elapsed_s = clock.elapsed();
            trace.append(row);
            if (!std::isfinite(row.F))
            {
                trace.status = "diverged";
                return trace;
            }
        }
        if (t == config.max_iters)
        {
            break;
        }
        const auto i = static_cast<Index>(stream.index(static_cast<std::uint64_t>(t), 0, M));
        x = composite.prox(x - config.step * oracle.component_gradient(i, x), L);
    }
    trace.status = "max_iters";
    trace.stats["wall_s"] = clock.elapsed();
    return trace;
}

RunTrace svrg_run(const LogisticOracle& oracle, const Composite& composite, const StochasticBaselineConfig& config,
                  const Vector& x0)
{
    CheckStochastic(config);
    CheckStart(oracle, composite, config.max_iters, x0);
    RunTrace trace("svrg");
    trace.seed = config.seed;
    const Counter counter(oracle);
    const Clock clock(config.timing);
    const RandomStream stream = RandomStream(config.seed).derive(12);
    const auto M = static_cast<std::uint64_t>(oracle.size());
    const std::int64_t epoch = config.epoch_len > 0 ? config.epoch_len : oracle.size();
    const std::int64_t record = config.record_every > 0 ? config.record_every : oracle.size();
    const double L = 1.0 / config.step;
    const Matrix& A = oracle.data();
    Vector x = x0;
    Vector snapshot;
    Vector snapshot_grad;
    for (std::int64_t t = 0;; ++t)
    {
        if (t % record == 0 || t == config.max_iters)
        {
            TraceRow row;
            row.k = t;
            counter.fill(&row);
            row.F = Objective(composite, oracle.value(x), x);
            row.elapsed_s = clock.elapsed();
            trace.append(row);
            if (!std::isfinite(row.F))
            {
                trace.status = "diverged";
                return trace;
            }
        }
        if (t == config.max_iters)
        {
            break;
        }
        if (t % epoch == 0)
        {
            snapshot = x;
            snapshot_grad = *oracle.evaluate(x, 1).grad;
        }
        const auto i = static_cast<Index>(stream.index(static_cast<std::uint64_t>(t), 0, M));
        const double diff = sigmoid(A.row(i).dot(x)) - sigmoid(A.row(i).dot(snapshot));
        oracle.add_grad_samples(2);
        const Vector g = snapshot_grad + diff * A.row(i).transpose();
        x = composite.prox(x - config.step * g, L);
    }
    trace.status = "max_iters";
    trace.stats["wall_s"] = clock.elapsed();
    return trace;
}

TuneResult tune_step(const std::function<RunTrace(double)>& run, const std::vector<double>& grid)
{
    if (grid.empty())
    {
        throw Error("step grid is empty");
    }
    TuneResult result;
    double best = std::numeric_limits<double>::infinity();
    result.best_step = grid.front();
    for (const double step : grid)
    {
        const RunTrace trace = run(step);
        double score = trace.empty() ? std::numeric_limits<double>::infinity() : trace.back().F;
        if (!std::isfinite(score) || trace.status == "diverged")
        {
            score = std::numeric_limits<double>::infinity();
        }
        result.scores.emplace_back(step, score);
        if (score < best)
        {
            best = score;
            result.best_step = step;
        }
    }
    return result;
}

std::vector<double> geometric_grid(double lo, double hi, double ratio)
{
    if (!(lo > 0.0 && hi >= lo && ratio > 1.0))
    {
        throw Error("invalid step grid");
    }
    std::vector<double> grid;
    for (double s = lo; s <= hi * (1.0 + 1e-12); s *= ratio)
    {
        grid.push_back(s);
    }
    return grid;
}

}  // namespace cdn
