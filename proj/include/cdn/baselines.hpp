#ifndef CDN_BASELINES_HPP_
#define CDN_BASELINES_HPP_

#include <functional>
#include <vector>

#include "cdn/composite.hpp"
#include "cdn/core.hpp"
#include "cdn/oracles.hpp"

namespace cdn {

struct BaselineConfig
{
    std::int64_t max_iters = 100;
    bool timing = true;
    // Initial Lipschitz estimate for the line-search methods.
    double initial_L = 1.0;
};

/*
    Conditional gradient with gamma_k = 2 / (k + 2). The certificate on row k
    is the gap <grad f(x_k), x_k - v_{k+1}>, so the last row carries none.
*/
RunTrace frank_wolfe_run(const SmoothOracle& oracle, const Composite& composite, const BaselineConfig& config,
                         const Vector& x0);

/*
    Lipschitz estimate for backtracking: doubled until
    f(x+) <= f(x) + <grad f(x), x+ - x> + (L/2) ||x+ - x||^2, halved after
    every accepted step.
*/
struct LineSearchState
{
    double L = 1.0;
    double increase = 2.0;
    double decrease = 0.5;
};

// Proximal gradient with backtracking. stats: backtracks.
RunTrace gm_run(const SmoothOracle& oracle, const Composite& composite, const BaselineConfig& config,
                const Vector& x0);

// Accelerated proximal gradient (two sequences) with the same backtracking. stats: backtracks.
RunTrace fgm_run(const SmoothOracle& oracle, const Composite& composite, const BaselineConfig& config,
                 const Vector& x0);

struct StochasticBaselineConfig
{
    double step = 1.0;
    // Inner updates per SVRG epoch; 0 means M.
    std::int64_t epoch_len = 0;
    std::uint64_t seed = 0;
    // Total component updates.
    std::int64_t max_iters = 1000;
    // Row every record_every updates (plus the last one); 0 means M.
    std::int64_t record_every = 0;
    bool timing = true;
};

// x+ = prox(x - step grad f_i(x)), i uniform.
RunTrace sgd_run(const LogisticOracle& oracle, const Composite& composite, const StochasticBaselineConfig& config,
                 const Vector& x0);

// Full gradient at each epoch start, then variance-reduced proximal steps.
RunTrace svrg_run(const LogisticOracle& oracle, const Composite& composite, const StochasticBaselineConfig& config,
                  const Vector& x0);

struct TuneResult
{
    double best_step = 0.0;
    // (step, score) per grid point; score is the final F, +inf on divergence.
    std::vector<std::pair<double, double>> scores;
};

// Grid search over constant step sizes by final objective value.
TuneResult tune_step(const std::function<RunTrace(double)>& run, const std::vector<double>& grid);

// Geometric grid lo, lo*ratio, ... up to hi.
std::vector<double> geometric_grid(double lo, double hi, double ratio = 10.0);

}  // namespace cdn

#endif  // CDN_BASELINES_HPP_
