#include "cdn/methods.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace cdn {

void MethodConfig::validate() const
{
    if (max_iters < 1)
    {
        throw Error("max_iters must be at least 1");
    }
    if (!(eps > 0.0))
    {
        throw Error("subsolver eps must be positive");
    }
    if (cert_every < 0)
    {
        throw Error("certificate cadence must be nonnegative");
    }
    if (time_budget_s && !(*time_budget_s > 0.0))
    {
        throw Error("time budget must be positive");
    }
}

namespace {

class Stopwatch
{
public:
    explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}

    double elapsed() const
    {
        if (!enabled_)
        {
            return 0.0;
        }
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

// Sample counts relative to the start of the run (zero for oracles without counters).
class SampleCounter
{
public:
    explicit SampleCounter(const SmoothOracle& oracle)
        : logistic_(dynamic_cast<const LogisticOracle*>(&oracle)),
          grad0_(logistic_ ? logistic_->grad_samples() : 0),
          hess0_(logistic_ ? logistic_->hess_samples() : 0)
    {
    }
    std::uint64_t grad() const { return logistic_ ? logistic_->grad_samples() - grad0_ : 0; }
    std::uint64_t hess() const { return logistic_ ? logistic_->hess_samples() - hess0_ : 0; }

private:
    const LogisticOracle* logistic_;
    std::uint64_t grad0_;
    std::uint64_t hess0_;
};

void CheckStart(const SmoothOracle& oracle, const Composite& composite, const MethodConfig& config,
                const Vector& x0)
{
    config.validate();
    if (oracle.dim() != composite.dim() || x0.size() != composite.dim())
    {
        throw Error("dimension mismatch between oracle, composite and starting point");
    }
    if (!x0.allFinite() || !composite.ball().contains(x0))
    {
        throw Error("starting point is infeasible");
    }
}

// Removes rounding excess beyond the radius; exact identity for points inside.
Vector KeepFeasible(const BallIndicator& ball, const Vector& x)
{
    return ball.distance_from_center(x) <= ball.radius() ? x : ball.project(x);
}

struct RowValues
{
    double F = 0.0;
    std::optional<double> cert;
};

struct StepResult
{
    Vector x_next;
    std::uint64_t inner_iters = 0;
};

bool WantCertificate(const MethodConfig& config, std::int64_t k)
{
    return config.cert_every > 0 && k >= 1 && k % config.cert_every == 0;
}

/*
    Shared iteration loop. Row k is recorded after prepare(k, x_k, stepping);
    sample counts on row k cover everything spent before evaluating at x_k.
*/
template <class Prepare, class Step>
RunTrace Drive(const std::string& name, const SmoothOracle& oracle, const Composite& composite,
               const MethodConfig& config, const Vector& x0, Prepare&& prepare, Step&& step)
{
    RunTrace trace(name);
    trace.seed = config.seed;
    SampleCounter counter(oracle);
    const Stopwatch clock(config.timing);
    const Stopwatch budget_clock(true);

    Vector x = x0;
    std::uint64_t inner = 0;
    for (std::int64_t k = 0;; ++k)
    {
        const bool stepping = k < config.max_iters;
        TraceRow row;
        row.k = k;
        row.grad_samples = counter.grad();
        row.hess_samples = counter.hess();
        row.inner_iters = inner;
        const RowValues values = prepare(k, x, stepping);
        row.F = values.F;
        row.cert = values.cert;
        row.elapsed_s = clock.elapsed();
        trace.append(row);
        if (config.record_iterates)
        {
            trace.iterates.push_back(x);
        }
        if (config.cert_tol && row.cert && *row.cert <= *config.cert_tol)
        {
            trace.status = "certificate_tolerance";
            break;
        }
        if (!stepping)
        {
            trace.status = "max_iters";
            break;
        }
        if (config.time_budget_s && budget_clock.elapsed() > *config.time_budget_s)
        {
            trace.status = "time_budget";
            break;
        }
        try
        {
            StepResult r = step(k, x);
            if (!r.x_next.allFinite())
            {
                throw Error("non-finite iterate");
            }
            x = KeepFeasible(composite.ball(), r.x_next);
            inner = r.inner_iters;
        }
        catch (const Error& error)
        {
            trace.status = std::string("subsolver_failure: ") + error.what();
            break;
        }
    }
    trace.stats["wall_s"] = clock.elapsed();
    return trace;
}

StepResult ScaledCompositeStep(const Composite& composite, const Vector& x, double gamma, const Vector& g,
                               const Matrix& H, double eps)
{
    if (composite.is_indicator())
    {
        const ContractedStep s = solve_contracted_step(x, gamma, g, H, composite.ball(), eps);
        return {s.x_next, s.report.inner_iters};
    }
    const SubsolverReport r = solve_composite_quadratic(g, gamma * H, composite, eps, &x);
    return {x + gamma * (r.solution - x), r.inner_iters};
}

struct Derivatives
{
    double f = 0.0;
    Vector g;
    Matrix H;
};

}  // namespace

RunTrace cdn1_run(const SmoothOracle& oracle, const Composite& composite, const MethodConfig& config,
                  const Vector& x0)
{
    CheckStart(oracle, composite, config, x0);
    LinearEstimator estimator(composite);
    Derivatives current;
    double cert_time = 0.0;

    auto prepare = [&](std::int64_t k, const Vector& x, bool stepping) {
        Evaluation e = oracle.evaluate(x, stepping ? 2 : 1);
        current.f = e.f;
        current.g = std::move(*e.grad);
        if (stepping)
        {
            current.H = std::move(*e.hess);
        }
        RowValues row;
        row.F = e.f + composite.quadratic_part(x);
        if (k >= 1)
        {
            estimator.update(config.schedule.gamma(k - 1), x, current.f, current.g);
            if (WantCertificate(config, k))
            {
                const Stopwatch watch(true);
                row.cert = estimator.certificate(row.F, config.eps);
                cert_time += watch.elapsed();
            }
        }
        return row;
    };
    auto step = [&](std::int64_t k, const Vector& x) {
        return ScaledCompositeStep(composite, x, config.schedule.gamma(k), current.g, current.H, config.eps);
    };
    RunTrace trace = Drive("cdn1", oracle, composite, config, x0, prepare, step);
    trace.stats["cert_time_s"] = config.timing ? cert_time : 0.0;
    return trace;
}

RunTrace cdn2_run(const SmoothOracle& oracle, const Composite& composite, const MethodConfig& config,
                  const Vector& x0)
{
    if (!composite.is_indicator())
    {
        throw Error("cdn2 requires an indicator composite (mu = 0)");
    }
    CheckStart(oracle, composite, config, x0);
    LinearEstimator estimator(composite);
    Derivatives current;

    auto prepare = [&](std::int64_t k, const Vector& x, bool stepping) {
        Evaluation e = oracle.evaluate(x, stepping ? 2 : 1);
        current.f = e.f;
        current.g = std::move(*e.grad);
        if (stepping)
        {
            current.H = std::move(*e.hess);
        }
        RowValues row;
        row.F = e.f;
        if (k >= 1)
        {
            estimator.update(config.schedule.gamma(k - 1), x, current.f, current.g);
            if (WantCertificate(config, k))
            {
                row.cert = estimator.certificate(row.F, config.eps);
            }
        }
        return row;
    };
    auto step = [&](std::int64_t k, const Vector& x) {
        const ContractedStep s = solve_contracted_domain_step(x, config.schedule.gamma(k), current.g, current.H,
                                                              composite.ball(), config.eps);
        return StepResult{s.x_next, s.report.inner_iters};
    };
    return Drive("cdn2", oracle, composite, config, x0, prepare, step);
}

RunTrace aggregating_run(const SmoothOracle& oracle, const Composite& composite, const MethodConfig& config,
                         const Vector& x0, const AggregatingOptions& options)
{
    CheckStart(oracle, composite, config, x0);
    QuadraticEstimator estimator(composite, options.holder, euclidean_diameter(composite.ball()));
    Derivatives current;
    std::optional<double> model_minimum;
    double violations = 0.0;
    double max_excess = -std::numeric_limits<double>::infinity();

    auto prepare = [&](std::int64_t k, const Vector& x, bool stepping) {
        RowValues row;
        if (stepping)
        {
            Evaluation e = oracle.evaluate(x, 2);
            current.f = e.f;
            current.g = std::move(*e.grad);
            current.H = std::move(*e.hess);
        }
        else
        {
            current.f = oracle.value(x);
        }
        row.F = current.f + composite.quadratic_part(x);
        if (k >= 1 && model_minimum)
        {
            const double excess = (row.F - 0.5 * estimator.normalized_gap()) - *model_minimum;
            max_excess = std::max(max_excess, excess);
            if (excess > options.sandwich_tol * std::max(1.0, std::abs(row.F)))
            {
                violations += 1.0;
            }
            if (WantCertificate(config, k))
            {
                row.cert = estimator.certificate(row.F, *model_minimum, options.partial);
            }
        }
        if (options.observer)
        {
            options.observer(k, x, row.F, estimator);
        }
        return row;
    };
    auto step = [&](std::int64_t k, const Vector& x) {
        const double gamma = config.schedule.gamma(k);
        estimator.update(gamma, x, current.f, current.g, current.H);
        const QuadraticEstimator::Minimum m = estimator.minimize(config.eps);
        model_minimum = m.value;
        return StepResult{x + gamma * (m.argmin - x), m.report.inner_iters};
    };
    RunTrace trace = Drive("aggregating", oracle, composite, config, x0, prepare, step);
    trace.stats["sandwich_violations"] = violations;
    trace.stats["sandwich_max_excess"] = std::isfinite(max_excess) ? max_excess : 0.0;
    return trace;
}

RunTrace stoch_newton_run(const LogisticOracle& oracle, const Composite& composite, const MethodConfig& config,
                          const Vector& x0)
{
    CheckStart(oracle, composite, config, x0);
    const RandomStream stream(config.seed);
    const Index M = oracle.size();

    auto prepare = [&](std::int64_t, const Vector& x, bool) {
        RowValues row;
        row.F = oracle.value(x) + composite.quadratic_part(x);
        return row;
    };
    auto step = [&](std::int64_t k, const Vector& x) {
        const double gamma = config.schedule.gamma(k);
        const Index m_g = batch_size(gamma, 4, M, config.sampling.cap_at_M);
        const Index m_h = batch_size(gamma, 2, M, config.sampling.cap_at_M);
        const StochEstimate est =
            sample_basic_estimators(oracle, x, m_g, m_h, stream, static_cast<std::uint64_t>(k), config.sampling);
        return ScaledCompositeStep(composite, x, gamma, est.g, est.H, config.eps);
    };
    return Drive("stoch_newton", oracle, composite, config, x0, prepare, step);
}

RunTrace svr_newton_run(const LogisticOracle& oracle, const Composite& composite, const MethodConfig& config,
                        const Vector& x0)
{
    CheckStart(oracle, composite, config, x0);
    const RandomStream stream(config.seed);
    const Index M = oracle.size();
    std::int64_t anchor_index = -1;
    Vector anchor;
    Vector anchor_grad;
    double refreshes = 0.0;

    auto prepare = [&](std::int64_t, const Vector& x, bool) {
        RowValues row;
        row.F = oracle.value(x) + composite.quadratic_part(x);
        return row;
    };
    auto step = [&](std::int64_t k, const Vector& x) {
        const auto target = static_cast<std::int64_t>(pi(static_cast<std::uint64_t>(k)));
        if (target != anchor_index)
        {
            // pi(k) moves only at k = 0 and powers of two, where pi(k) = k.
            anchor = x;
            anchor_grad = *oracle.evaluate(x, 1).grad;
            anchor_index = target;
            refreshes += 1.0;
        }
        const double gamma = config.schedule.gamma(k);
        const Index m = batch_size(gamma, 2, M, config.sampling.cap_at_M);
        Vector g;
        Matrix H;
        if (config.sampling.cap_at_M && m >= M)
        {
            // The full batch makes the correction cancel exactly.
            g = *oracle.evaluate(x, 1).grad;
            H = oracle.full_hessian(x);
        }
        else
        {
            const std::vector<Index> batch =
                sample_batch(M, m, stream, static_cast<std::uint64_t>(k), config.sampling);
            g = vr_gradient(oracle, x, anchor, anchor_grad, batch);
            H = oracle.batch_hessian(x, batch);
        }
        return ScaledCompositeStep(composite, x, gamma, g, H, config.eps);
    };
    RunTrace trace = Drive("svr_newton", oracle, composite, config, x0, prepare, step);
    trace.stats["anchor_refreshes"] = refreshes;
    return trace;
}

RunTrace geometric_schedule_run(const SmoothOracle& oracle, const Composite& composite, MethodConfig config,
                                const Vector& x0, const HolderClass& holder, double diameter)
{
    if (composite.is_indicator())
    {
        throw Error("geometric schedule requires a strongly convex composite (mu > 0)");
    }
    holder.validate();
    const double omega = condition_number(holder.H, diameter, holder.nu, composite.mu());
    config.schedule = omega == 0.0 ? Schedule::newton() : Schedule::geometric(omega);
    RunTrace trace = cdn1_run(oracle, composite, config, x0);
    trace.set_method("cdn1_geometric");
    trace.stats["omega"] = omega;
    return trace;
}

ReferenceSolution reference_solve(const SmoothOracle& oracle, const Composite& composite, const Vector& x0,
                                  std::int64_t iters, double eps)
{
    MethodConfig config;
    config.schedule = Schedule::power(3);
    config.max_iters = iters;
    config.eps = eps;
    config.cert_every = 0;
    config.record_iterates = true;
    config.timing = false;
    const RunTrace trace = cdn1_run(oracle, composite, config, x0);
    std::size_t best = 0;
    for (std::size_t i = 1; i < trace.rows().size(); ++i)
    {
        if (trace.rows()[i].F < trace.rows()[best].F)
        {
            best = i;
        }
    }
    return {trace.rows()[best].F, trace.iterates[best], trace.back().k};
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i)
    {
        if (!(x[i] > 0.0 && y[i] > 0.0))
        {
            continue;
        }
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 2)
    {
        return std::nullopt;
    }
    const double n = static_cast<double>(count);
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0)
    {
        return std::nullopt;
    }
    return (n * sxy - sx * sy) / denom;
}

std::optional<double> certificate_slope(const RunTrace& trace, std::int64_t k_lo, std::int64_t k_hi)
{
    std::vector<double> ks;
    std::vector<double> certs;
    for (const TraceRow& row : trace.rows())
    {
        if (row.k >= k_lo && row.k <= k_hi && row.cert)
        {
            ks.push_back(static_cast<double>(row.k));
            certs.push_back(*row.cert);
        }
    }
    return loglog_slope(ks, certs);
}

}  // namespace cdn
