#include <algorithm>
#include <cmath>
#include <vector>

#include "cdn/baselines.hpp"
#include "cdn/data_ingest.hpp"
#include "cdn/methods.hpp"
#include "doctest.h"

using namespace cdn;

namespace {

double Median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

BaselineConfig Config(std::int64_t iters)
{
    BaselineConfig c;
    c.max_iters = iters;
    c.timing = false;
    return c;
}

}  // namespace

TEST_CASE("Frank-Wolfe")
{
    SUBCASE("linear objective is solved by the first step")
    {
        const Vector c = (Vector(3) << 1, -2, 2).finished();
        const QuadraticOracle lin(Matrix::Zero(3, 3), -c);
        const Composite comp(BallIndicator(NormKind::L2, Vector::Zero(3), 1.5));
        const RunTrace t = frank_wolfe_run(lin, comp, Config(3), Vector::Zero(3));
        CHECK(t.rows()[1].F == doctest::Approx(-1.5 * c.norm()));
        CHECK(*t.rows()[0].cert == doctest::Approx(1.5 * c.norm()));
    }
    SUBCASE("gap bounds the residual")
    {
        const LogisticOracle f(synth_logistic(300, 5, 1), true);
        const Composite comp(BallIndicator::from_diameter(NormKind::L2, 5, 2.0));
        const ReferenceSolution ref = reference_solve(f, comp, Vector::Zero(5), 1000);
        const RunTrace t = frank_wolfe_run(f, comp, Config(100), Vector::Zero(5));
        CHECK(t.rows().size() == 101);
        CHECK_FALSE(t.back().cert.has_value());
        for (const TraceRow& row : t.rows())
        {
            if (row.cert)
            {
                CHECK(*row.cert >= row.F - ref.F_star - 1e-12);
            }
        }
        const Composite strong(comp.ball(), 1.0, Vector::Zero(5));
        CHECK_THROWS_AS(frank_wolfe_run(f, strong, Config(3), Vector::Zero(5)), Error);
    }
}

TEST_CASE("gradient methods")
{
    SUBCASE("quadratic with the true Lipschitz constant")
    {
        const Matrix A = (Vector(3) << 3, 1, 0.5).finished().asDiagonal();
        const QuadraticOracle q(A, (Vector(3) << 1, 1, 1).finished());
        const Composite comp(BallIndicator(NormKind::L2, Vector::Zero(3), 10.0));
        BaselineConfig c = Config(1);
        c.initial_L = 3.0;
        CHECK(gm_run(q, comp, c, Vector::Zero(3)).stats.at("backtracks") == 0.0);
        c.max_iters = 50;
        const RunTrace t = gm_run(q, comp, c, Vector::Zero(3));
        for (std::size_t i = 1; i < t.rows().size(); ++i)
        {
            CHECK(t.rows()[i].F <= t.rows()[i - 1].F + 1e-15);
        }
    }
    SUBCASE("monotone on logistic with a strongly convex term")
    {
        const LogisticOracle f(synth_logistic(300, 6, 2, 10.0), true);
        const Composite comp(BallIndicator::from_diameter(NormKind::L2, 6, 4.0), 0.1, Vector::Ones(6));
        const RunTrace gm = gm_run(f, comp, Config(200), Vector::Zero(6));
        for (std::size_t i = 1; i < gm.rows().size(); ++i)
        {
            CHECK(gm.rows()[i].F <= gm.rows()[i - 1].F + 1e-15);
        }
        const ReferenceSolution ref = reference_solve(f, comp, Vector::Zero(6), 500);
        const RunTrace fgm = fgm_run(f, comp, Config(200), Vector::Zero(6));
        CHECK(fgm.back().F - ref.F_star < gm.rows()[50].F - ref.F_star);
        CHECK(fgm.back().F - ref.F_star < 1e-6);
    }
    SUBCASE("slower than contracting Newton on an ill-conditioned instance")
    {
        const LogisticOracle f(synth_logistic(500, 8, 3, 100.0), true);
        const Composite comp(BallIndicator::from_diameter(NormKind::L2, 8, 8.0));
        const ReferenceSolution ref = reference_solve(f, comp, Vector::Zero(8), 2000);
        MethodConfig mc;
        mc.max_iters = 100;
        mc.timing = false;
        const RunTrace cdn = cdn1_run(f, comp, mc, Vector::Zero(8));
        auto first_below = [&](const RunTrace& t) {
            for (const TraceRow& row : t.rows())
            {
                if (row.F - ref.F_star <= 1e-4)
                {
                    return row.k;
                }
            }
            return std::int64_t{1} << 40;
        };
        const RunTrace gm = gm_run(f, comp, Config(100), Vector::Zero(8));
        const RunTrace fw = frank_wolfe_run(f, comp, Config(100), Vector::Zero(8));
        CHECK(first_below(cdn) < first_below(gm));
        CHECK(fw.back().F - ref.F_star >= cdn.back().F - ref.F_star);
    }
}

TEST_CASE("stochastic baselines")
{
    const LogisticOracle f(synth_logistic(200, 4, 4), true);
    const Composite comp(BallIndicator::from_diameter(NormKind::L2, 4, 4.0));
    const Vector x0 = (Vector(4) << 0.2, -0.1, 0.3, 0).finished();

    SUBCASE("one-step epochs are projected gradient steps")
    {
        StochasticBaselineConfig c;
        c.step = 0.5;
        c.epoch_len = 1;
        c.max_iters = 1;
        c.record_every = 1;
        c.timing = false;
        const RunTrace t = svrg_run(f, comp, c, x0);
        const Vector expected = comp.prox(x0 - 0.5 * *f.evaluate(x0, 1).grad, 2.0);
        CHECK(t.back().F == doctest::Approx(f.value(expected)).epsilon(1e-14));
    }
    SUBCASE("seeded reproducibility")
    {
        StochasticBaselineConfig c;
        c.step = 0.5;
        c.max_iters = 2000;
        c.seed = 9;
        c.timing = false;
        CHECK(sgd_run(f, comp, c, x0).to_csv() == sgd_run(f, comp, c, x0).to_csv());
        CHECK(svrg_run(f, comp, c, x0).to_csv() == svrg_run(f, comp, c, x0).to_csv());
        const RunTrace t = sgd_run(f, comp, c, x0);
        CHECK(t.rows().size() == 11);
        CHECK(t.back().k == 2000);
        CHECK(t.back().grad_samples == 2000);
        c.seed = 10;
        CHECK(sgd_run(f, comp, c, x0).back().F != t.back().F);
    }
    SUBCASE("variance reduction wins at equal sample budget")
    {
        const ReferenceSolution ref = reference_solve(f, comp, Vector::Zero(4), 1000);
        std::vector<double> sgd;
        std::vector<double> svrg;
        for (std::uint64_t seed = 0; seed < 10; ++seed)
        {
            StochasticBaselineConfig c;
            c.step = 0.5;
            c.seed = seed;
            c.timing = false;
            c.max_iters = 20 * 200;
            sgd.push_back(sgd_run(f, comp, c, x0).back().F - ref.F_star);
            // Two samples per update plus one full pass per epoch.
            c.max_iters = 20 * 200 * 2 / 3;
            svrg.push_back(svrg_run(f, comp, c, x0).back().F - ref.F_star);
        }
        CHECK(Median(svrg) < Median(sgd));
    }
    SUBCASE("step tuning")
    {
        const TuneResult r = tune_step(
            [&](double step) {
                StochasticBaselineConfig c;
                c.step = step;
                c.max_iters = 1000;
                c.timing = false;
                return svrg_run(f, comp, c, x0);
            },
            geometric_grid(1e-3, 10.0));
        CHECK(r.scores.size() == 5);
        const auto best = std::min_element(r.scores.begin(), r.scores.end(),
                                           [](const auto& a, const auto& b) { return a.second < b.second; });
        CHECK(r.best_step == best->first);
        CHECK_THROWS_AS(tune_step([](double) { return RunTrace(); }, {}), Error);
    }
}

TEST_CASE("geometric grid")
{
    const std::vector<double> g = geometric_grid(0.01, 1.0);
    REQUIRE(g.size() == 3);
    CHECK(g[1] == doctest::Approx(0.1));
    CHECK(g[2] == doctest::Approx(1.0));
}
