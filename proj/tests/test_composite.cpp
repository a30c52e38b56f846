#include <cmath>
#include <limits>

#include "cdn/composite.hpp"
#include "doctest.h"

using namespace cdn;

namespace {

Vector RandomVector(Index n, const RandomStream& s, std::uint64_t it, double scale)
{
    Vector v(n);
    for (Index j = 0; j < n; ++j)
    {
        v(j) = scale * s.normal(it, static_cast<std::uint64_t>(j));
    }
    return v;
}

// Random feasible point: a random direction scaled to a random fraction of the radius.
Vector RandomFeasible(const BallIndicator& ball, const RandomStream& s, std::uint64_t it)
{
    Vector d = RandomVector(ball.dim(), s, it, 1.0);
    const double norm = lp_norm(d, ball.p());
    return ball.center() + (ball.radius() * s.uniform(it, 1000) / norm) * d;
}

}  // namespace

TEST_CASE("extended reals")
{
    CHECK(ExtendedReal::finite(2.0).value() == 2.0);
    CHECK((ExtendedReal::finite(2.0) + 1.0).value() == 3.0);
    CHECK((ExtendedReal::infinity() + 1.0).is_infinite());
    CHECK_THROWS_AS(ExtendedReal::infinity().value(), Error);
}

TEST_CASE("norm kinds")
{
    CHECK(norm_kind_from_p(1) == NormKind::L1);
    CHECK(norm_kind_from_p(2) == NormKind::L2);
    CHECK(norm_kind_from_p(std::numeric_limits<double>::infinity()) == NormKind::Linf);
    CHECK_THROWS_AS(norm_kind_from_p(3), Error);
    const Vector v = (Vector(3) << 3, -4, 0).finished();
    CHECK(lp_norm(v, NormKind::L1) == 7);
    CHECK(lp_norm(v, NormKind::L2) == 5);
    CHECK(lp_norm(v, NormKind::Linf) == 4);
}

TEST_CASE("ball membership")
{
    const BallIndicator ball = BallIndicator::from_diameter(NormKind::L2, 2, 2.0);
    CHECK(ball.radius() == 1.0);
    CHECK(ball.contains((Vector(2) << 0.6, 0.8).finished()));
    CHECK_FALSE(ball.contains((Vector(2) << 0.7, 0.8).finished()));
    CHECK(ball.value((Vector(2) << 2, 0).finished()).is_infinite());
    CHECK(ball.value(Vector::Zero(2)).value() == 0.0);
    CHECK_THROWS_AS(BallIndicator(NormKind::L2, Vector::Zero(2), 0.0), Error);
}

TEST_CASE("linear minimizers beat sampled feasible points")
{
    const RandomStream s(21);
    for (const NormKind p : {NormKind::L1, NormKind::L2, NormKind::Linf})
    {
        const BallIndicator ball(p, (Vector(4) << 0.5, -1, 0, 2).finished(), 1.5);
        for (std::uint64_t t = 0; t < 20; ++t)
        {
            const Vector c = RandomVector(4, s, t, 1.0);
            const Vector v = ball.linear_minimizer(c);
            CHECK(ball.contains(v));
            for (std::uint64_t r = 0; r < 50; ++r)
            {
                CHECK(c.dot(v) <= c.dot(RandomFeasible(ball, s, 1000 + t * 50 + r)) + 1e-12);
            }
            // Closed form of the minimum value: <c, center> - R ||c||_dual.
            const NormKind dual = p == NormKind::L1 ? NormKind::Linf : (p == NormKind::Linf ? NormKind::L1 : NormKind::L2);
            CHECK(c.dot(v) == doctest::Approx(c.dot(ball.center()) - ball.radius() * lp_norm(c, dual)));
        }
        CHECK(ball.linear_minimizer(Vector::Zero(4)) == ball.center());
    }
    // Ties on |c_j| for p = 1 go to the lowest index.
    const BallIndicator l1(NormKind::L1, Vector::Zero(3), 1.0);
    CHECK(l1.linear_minimizer((Vector(3) << 1, -1, 0.5).finished()) == (Vector(3) << -1, 0, 0).finished());
}

TEST_CASE("projections are nearest feasible points")
{
    const RandomStream s(31);
    for (const NormKind p : {NormKind::L1, NormKind::L2, NormKind::Linf})
    {
        const BallIndicator ball(p, (Vector(5) << 1, 0, -1, 0.5, 0).finished(), 0.8);
        for (std::uint64_t t = 0; t < 30; ++t)
        {
            const Vector y = ball.center() + RandomVector(5, s, t, 1.5);
            const Vector proj = ball.project(y);
            CHECK(ball.distance_from_center(proj) <= ball.radius() * (1 + 1e-12));
            // Variational inequality <y - proj, z - proj> <= 0 for feasible z.
            for (std::uint64_t r = 0; r < 40; ++r)
            {
                const Vector z = RandomFeasible(ball, s, 5000 + t * 40 + r);
                CHECK((y - proj).dot(z - proj) <= 1e-10);
            }
        }
        const Vector inside = ball.center() + 0.1 * Vector::Ones(5) / 5.0;
        CHECK((ball.project(inside) - inside).norm() < 1e-15);
    }
    // A hand-checked l1 case: threshold 0.5 on (2, 1, 0.1) with radius 1.5.
    const BallIndicator l1(NormKind::L1, Vector::Zero(3), 1.5);
    const Vector p = l1.project((Vector(3) << 2, -1, 0.1).finished());
    CHECK((p - (Vector(3) << 1.25, -0.25, 0).finished()).norm() < 1e-14);
}

TEST_CASE("strongly convex composite")
{
    const BallIndicator ball(NormKind::L2, Vector::Zero(2), 10.0);
    const Vector anchor = (Vector(2) << 1, 2).finished();
    const Composite c(ball, 2.0, anchor);
    CHECK_FALSE(c.is_indicator());
    CHECK(c.value(anchor).value() == 0.0);
    CHECK(c.quadratic_part(Vector::Zero(2)) == doctest::Approx(5.0));
    CHECK(c.value((Vector(2) << 11, 0).finished()).is_infinite());
    // argmin (L/2)||x - z||^2 + (mu/2)||x - a||^2 = (L z + mu a) / (L + mu)
    const Vector z = (Vector(2) << 3, -1).finished();
    CHECK((c.prox(z, 1.0) - (z + 2.0 * anchor) / 3.0).norm() < 1e-15);
    CHECK_THROWS_AS(Composite(ball, -1.0, anchor), Error);
    CHECK(Composite(ball).is_indicator());
}

TEST_CASE("condition number")
{
    CHECK(condition_number(2.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
    // [H D^nu / ((1+nu) mu)]^(1/(1+nu)) with nu = 0: H / mu
    CHECK(condition_number(3.0, 5.0, 0.0, 1.5) == doctest::Approx(2.0));
    CHECK(condition_number(0.0, 1.0, 1.0, 1.0) == 0.0);
    CHECK_THROWS_AS(condition_number(1.0, 1.0, 1.0, 0.0), Error);
    CHECK_THROWS_AS(condition_number(1.0, 1.0, 1.5, 1.0), Error);
}
