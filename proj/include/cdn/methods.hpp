#ifndef CDN_METHODS_HPP_
#define CDN_METHODS_HPP_

#include <functional>
#include <optional>

#include "cdn/composite.hpp"
#include "cdn/core.hpp"
#include "cdn/models.hpp"
#include "cdn/oracles.hpp"
#include "cdn/subsolver.hpp"

namespace cdn {

struct MethodConfig
{
    Schedule schedule = Schedule::power(3);
    std::int64_t max_iters = 100;
    double eps = kDefaultInnerEps;
    // Certificate every cert_every rows (0 disables certificates).
    std::int64_t cert_every = 1;
    // Stop once the certificate drops to this value.
    std::optional<double> cert_tol;
    // Wall-clock budget for the iteration loop.
    std::optional<double> time_budget_s;
    std::uint64_t seed = 0;
    SamplingPolicy sampling;
    bool record_iterates = false;
    // When false, elapsed_s is written as 0 so traces are fully reproducible.
    bool timing = true;

    void validate() const;
};

/*
    Contracting-domain Newton, scaled-composite form: v minimizes
    <g, v - x> + (gamma/2) <H (v - x), v - x> + psi(v), x <- x + gamma (v - x).
    Row k carries F(x_k) and the linear-estimator certificate for k >= 1.
*/
RunTrace cdn1_run(const SmoothOracle& oracle, const Composite& composite, const MethodConfig& config,
                  const Vector& x0);

// Contracted-domain form; indicator composites only.
RunTrace cdn2_run(const SmoothOracle& oracle, const Composite& composite, const MethodConfig& config,
                  const Vector& x0);

struct AggregatingOptions
{
    HolderClass holder;
    // Holder constant not certified: report the certificate without the C_k term.
    bool partial = false;
    // Absolute slack when counting violations of Q_k* >= A_k F(x_k) - C_k / 2.
    double sandwich_tol = 1e-9;
    // Called once per row with (k, x_k, F(x_k), Q_k); Q_k is empty at k = 0.
    std::function<void(std::int64_t, const Vector&, double, const QuadraticEstimator&)> observer;
};

/*
    Aggregated quadratic models: v_{k+1} = argmin Q_{k+1}, x <- x + gamma (v - x).
    stats: sandwich_violations, sandwich_max_excess.
*/
RunTrace aggregating_run(const SmoothOracle& oracle, const Composite& composite, const MethodConfig& config,
                         const Vector& x0, const AggregatingOptions& options);

/*
    Contracting-domain Newton with subsampled gradient and Hessian on batches
    of size ceil(1/gamma^4) and ceil(1/gamma^2). No certificate.
*/
RunTrace stoch_newton_run(const LogisticOracle& oracle, const Composite& composite, const MethodConfig& config,
                          const Vector& x0);

/*
    Variance-reduced variant: anchor z_k = x_{pi(k)} with its full gradient,
    one batch of size ceil(1/gamma^2) shared by gradient and Hessian.
    stats: anchor_refreshes (full-gradient anchor computations).
*/
RunTrace svr_newton_run(const LogisticOracle& oracle, const Composite& composite, const MethodConfig& config,
                        const Vector& x0);

/*
    cdn1_run with Geometric(omega), omega from condition_number(H, D, nu, mu).
    H = 0 gives omega = 0, i.e. plain Newton steps. Requires mu > 0.
*/
RunTrace geometric_schedule_run(const SmoothOracle& oracle, const Composite& composite, MethodConfig config,
                                const Vector& x0, const HolderClass& holder, double diameter);

struct ReferenceSolution
{
    double F_star;
    Vector x_star;
    std::int64_t iterations;
};

inline constexpr std::int64_t kReferenceIters = 5000;
inline constexpr double kReferenceEps = 1e-14;

// Long CDN-I run with PowerP(3); F* is the smallest F seen along it.
ReferenceSolution reference_solve(const SmoothOracle& oracle, const Composite& composite, const Vector& x0,
                                  std::int64_t iters = kReferenceIters, double eps = kReferenceEps);

// Least-squares slope of log(cert) against log(k) over rows with k in [k_lo, k_hi] and cert > 0.
std::optional<double> certificate_slope(const RunTrace& trace, std::int64_t k_lo, std::int64_t k_hi);

// Least-squares slope of log(y) against log(x) over positive pairs.
std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cdn

#endif  // CDN_METHODS_HPP_
