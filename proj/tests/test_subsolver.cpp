#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "cdn/subsolver.hpp"
#include "doctest.h"

using namespace cdn;

namespace {

Matrix RandomPsd(Index n, Index rank, const RandomStream& s, std::uint64_t it)
{
    Matrix B(rank, n);
    for (Index i = 0; i < rank; ++i)
    {
        for (Index j = 0; j < n; ++j)
        {
            B(i, j) = s.normal(it, static_cast<std::uint64_t>(i * n + j));
        }
    }
    return B.transpose() * B;
}

Vector RandomVector(Index n, const RandomStream& s, std::uint64_t it, double scale)
{
    Vector v(n);
    for (Index j = 0; j < n; ++j)
    {
        v(j) = scale * s.normal(it, 500 + static_cast<std::uint64_t>(j));
    }
    return v;
}

// Independent reference: eigendecomposition plus bisection on the multiplier.
struct Reference
{
    Vector h;
    double lambda = 0.0;
};

Reference EigenBisection(const Vector& g, const Matrix& H, double R)
{
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
    const Vector w = eig.eigenvalues();
    const Vector gt = eig.eigenvectors().transpose() * g;
    const double zero_tol = 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff());
    auto step = [&](double lambda) {
        Vector y(w.size());
        for (Index i = 0; i < w.size(); ++i)
        {
            const double d = w(i) + lambda;
            y(i) = d > zero_tol ? -gt(i) / d : 0.0;
        }
        return Vector(eig.eigenvectors() * y);
    };
    bool interior = true;
    for (Index i = 0; i < w.size(); ++i)
    {
        if (w(i) <= zero_tol && std::abs(gt(i)) > 1e-12)
        {
            interior = false;
        }
    }
    if (interior && step(0.0).norm() <= R)
    {
        return {step(0.0), 0.0};
    }
    double lo = 0.0;
    double hi = g.norm() / R;
    for (int it = 0; it < 300; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
        {
            break;
        }
        (step(mid).norm() > R ? lo : hi) = mid;
    }
    return {step(hi), hi};
}

double Quadratic(const Vector& g, const Matrix& H, const Vector& h)
{
    return g.dot(h) + 0.5 * h.dot(H * h);
}

}  // namespace

TEST_CASE("tridiagonalization reconstructs the matrix")
{
    const RandomStream s(3);
    for (Index n : {1, 2, 3, 5, 8})
    {
        const Matrix H = RandomPsd(n, n, s, static_cast<std::uint64_t>(n));
        const Tridiagonal t = householder_tridiagonalize(H);
        CHECK((t.Q * t.dense() * t.Q.transpose() - H).norm() <= 1e-12 * (1 + H.norm()));
        CHECK((t.Q.transpose() * t.Q - Matrix::Identity(n, n)).norm() <= 1e-13);
        const Matrix T = t.dense();
        for (Index i = 0; i < n; ++i)
        {
            for (Index j = 0; j < n; ++j)
            {
                if (std::abs(i - j) > 1)
                {
                    CHECK(T(i, j) == 0.0);
                }
            }
        }
    }
    CHECK_THROWS_AS(householder_tridiagonalize((Matrix(2, 2) << 1, 2, 0, 1).finished()), Error);
}

TEST_CASE("shifted tridiagonal solve")
{
    const Vector diag = (Vector(4) << 2, 3, 1, 4).finished();
    const Vector sub = (Vector(3) << 0.5, -1, 0.25).finished();
    const Vector b = (Vector(4) << 1, -2, 0.5, 3).finished();
    Tridiagonal t{diag, sub, Matrix::Identity(4, 4)};
    const Matrix T = t.dense();
    Vector x;
    REQUIRE(solve_shifted_tridiagonal(diag, sub, 0.7, b, &x));
    CHECK(((T + 0.7 * Matrix::Identity(4, 4)) * x - b).norm() < 1e-13);
    // Strongly negative shift breaks positivity.
    CHECK_FALSE(solve_shifted_tridiagonal(diag, sub, -10.0, b, &x));
}

TEST_CASE("ball QP closed-form examples")
{
    const Matrix I = Matrix::Identity(2, 2);
    SUBCASE("interior")
    {
        const SubsolverReport r = solve_ball_qp({(Vector(2) << 0.2, 0).finished(), I, 1.0});
        CHECK((r.solution - (Vector(2) << -0.2, 0).finished()).norm() < 1e-14);
        CHECK(r.lambda == 0.0);
    }
    SUBCASE("boundary")
    {
        const SubsolverReport r = solve_ball_qp({(Vector(2) << -3, 0).finished(), I, 1.0});
        CHECK((r.solution - (Vector(2) << 1, 0).finished()).norm() < 1e-9);
        CHECK(r.lambda == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("diagonal boundary against bisection and grid")
    {
        const Matrix H = (Vector(2) << 1, 2).finished().asDiagonal();
        const Vector g = (Vector(2) << -2, -2).finished();
        const SubsolverReport r = solve_ball_qp({g, H, 1.0});
        const Reference ref = EigenBisection(g, H, 1.0);
        CHECK((r.solution - ref.h).norm() < 1e-6);
        CHECK(r.lambda == doctest::Approx(ref.lambda).epsilon(1e-6));
        // Dense grid over the boundary circle: the minimum sits on it here.
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 200000; ++i)
        {
            const double t = 2 * M_PI * i / 200000.0;
            const Vector h = (Vector(2) << std::cos(t), std::sin(t)).finished();
            best = std::min(best, Quadratic(g, H, h));
        }
        CHECK(r.objective <= best + 1e-9);
        CHECK(r.objective >= best - 1e-6);
    }
    SUBCASE("zero gradient")
    {
        const SubsolverReport r = solve_ball_qp({Vector::Zero(2), I, 1.0});
        CHECK(r.solution.norm() == 0.0);
    }
}

TEST_CASE("ball QP input validation")
{
    const Matrix I = Matrix::Identity(2, 2);
    const Vector g = Vector::Ones(2);
    CHECK_THROWS_AS(solve_ball_qp({g, I, 0.0}), Error);
    CHECK_THROWS_AS(solve_ball_qp({g, (Matrix(2, 2) << 1, 1, 0, 1).finished(), 1.0}), Error);
    CHECK_THROWS_AS(solve_ball_qp({g, -I, 1.0}), Error);
    CHECK_THROWS_AS(solve_ball_qp({Vector::Ones(3), I, 1.0}), Error);
}

TEST_CASE("ball QP matches the eigen reference on random instances")
{
    const RandomStream s(2024);
    int boundary = 0;
    for (std::uint64_t t = 0; t < 300; ++t)
    {
        const Index n = 1 + static_cast<Index>(s.index(t, 900, 6));
        const Index rank = 1 + static_cast<Index>(s.index(t, 901, static_cast<std::uint64_t>(n)));
        const Matrix H = RandomPsd(n, rank, s, t);
        const double scale = std::pow(10.0, 2.0 * s.uniform(t, 902) - 1.0);
        const Vector g = RandomVector(n, s, t, scale);
        const double R = 0.2 + 2.0 * s.uniform(t, 903);
        const BallQP prob{g, H, R};
        const SubsolverReport r = solve_ball_qp(prob);
        const Reference ref = EigenBisection(g, H, R);
        const double q_ref = Quadratic(g, H, ref.h);
        CAPTURE(t);
        CHECK(r.solution.norm() <= R * (1 + 1e-12));
        CHECK(r.objective == doctest::Approx(Quadratic(g, H, r.solution)).epsilon(1e-12));
        CHECK(r.objective <= q_ref + prob.eps * (1 + std::abs(q_ref)));
        CHECK(r.objective <= 0.0);
        CHECK(r.lambda >= 0.0);
        // KKT residuals.
        CHECK(((H + r.lambda * Matrix::Identity(n, n)) * r.solution + g).norm() <= prob.eps * (1 + g.norm()));
        CHECK(std::abs(r.lambda * (r.solution.norm() - R)) <= prob.eps * R * std::max(1.0, r.lambda));
        boundary += r.lambda > 0 ? 1 : 0;
    }
    // The mix covers both regimes.
    CHECK(boundary > 30);
    CHECK(boundary < 270);
}

TEST_CASE("contracted step examples")
{
    const BallIndicator unit(NormKind::L2, Vector::Zero(1), 1.0);
    const Matrix one = Matrix::Identity(1, 1);
    const Vector x0 = Vector::Ones(1);
    const ContractedStep step = solve_contracted_step(x0, 1.0, x0, one, unit);
    CHECK(std::abs(step.x_next(0)) < 1e-14);

    const RandomStream s(5);
    const Matrix H = RandomPsd(3, 3, s, 0) + Matrix::Identity(3, 3);
    const Vector g = RandomVector(3, s, 1, 1.0);
    const BallIndicator huge(NormKind::L2, Vector::Zero(3), 1e6);
    const Vector x = RandomVector(3, s, 2, 0.5);
    const ContractedStep newton = solve_contracted_step(x, 1.0, g, H, huge);
    CHECK((newton.x_next - (x - H.ldlt().solve(g))).norm() < 1e-10);

    const BallIndicator ball(NormKind::L2, (Vector(3) << 0.3, -0.2, 0.1).finished(), 0.7);
    for (std::uint64_t t = 0; t < 40; ++t)
    {
        const Vector gt = RandomVector(3, s, 100 + t, 3.0);
        const Vector xt = ball.project(RandomVector(3, s, 200 + t, 1.0));
        const double gamma = 0.05 + 0.95 * s.uniform(t, 7);
        const ContractedStep a = solve_contracted_step(xt, gamma, gt, H, ball, 1e-12);
        const ContractedStep b = solve_contracted_domain_step(xt, gamma, gt, H, ball, 1e-12);
        CHECK(ball.distance_from_center(a.v_next) <= ball.radius() * (1 + 1e-12));
        CHECK(ball.distance_from_center(a.x_next) <= ball.radius() * (1 + 1e-12));
        CHECK((a.x_next - (xt + gamma * (a.v_next - xt))).norm() < 1e-14);
        // Scaled-composite and contracted-domain forms agree for an indicator.
        CHECK((a.x_next - b.x_next).norm() < 1e-9);
    }
    CHECK_THROWS_AS(solve_contracted_step(x0, 0.0, x0, one, unit), Error);
    CHECK_THROWS_AS(solve_contracted_domain_step(x0, 1.5, x0, one, unit), Error);
}

TEST_CASE("composite quadratic examples")
{
    const BallIndicator big(NormKind::L2, Vector::Zero(2), 10.0);
    const Composite comp(big, 1.0, Vector::Zero(2));
    const SubsolverReport r = solve_composite_quadratic((Vector(2) << 1, 0).finished(), Matrix::Identity(2, 2), comp);
    CHECK((r.solution - (Vector(2) << -0.5, 0).finished()).norm() < 1e-12);

    const BallIndicator off(NormKind::L2, (Vector(2) << 1, 1).finished(), 2.0);
    const Composite centred(off, 3.0, off.center());
    const SubsolverReport z = solve_composite_quadratic(Vector::Zero(2), Matrix::Identity(2, 2), centred);
    CHECK((z.solution - off.center()).norm() < 1e-14);
}

TEST_CASE("composite quadratic against long projected gradient")
{
    const RandomStream s(77);
    for (const NormKind p : {NormKind::L2, NormKind::L1, NormKind::Linf})
    {
        for (std::uint64_t t = 0; t < 5; ++t)
        {
            const Matrix H = RandomPsd(3, 3, s, 10 * t) + 0.5 * Matrix::Identity(3, 3);
            const Vector g = RandomVector(3, s, 10 * t + 1, 4.0);
            const BallIndicator ball(p, (Vector(3) << 0.1, 0, -0.2).finished(), 0.5);
            const double mu = t % 2 == 0 ? 0.0 : 0.7;
            const Composite comp(ball, mu, (Vector(3) << 0.3, 0.3, 0).finished());
            const SubsolverReport r = solve_composite_quadratic(g, H, comp, 1e-12);

            // Projected gradient on the full smooth part, origin = center.
            const Matrix Ht = H + mu * Matrix::Identity(3, 3);
            const double L = Eigen::SelfAdjointEigenSolver<Matrix>(Ht).eigenvalues().maxCoeff();
            Vector x = ball.center();
            for (int it = 0; it < 200000; ++it)
            {
                const Vector grad = g + H * (x - ball.center()) + mu * (x - comp.anchor());
                const Vector next = ball.project(x - grad / L);
                if ((next - x).norm() == 0.0)
                {
                    break;
                }
                x = next;
            }
            auto objective = [&](const Vector& y) {
                const Vector d = y - ball.center();
                return g.dot(d) + 0.5 * d.dot(H * d) + comp.quadratic_part(y);
            };
            CAPTURE(t);
            CHECK(ball.distance_from_center(r.solution) <= ball.radius() * (1 + 1e-12));
            CHECK(std::abs(objective(r.solution) - objective(x)) <= 1e-6);
            CHECK((r.solution - x).norm() <= 1e-6);
            CHECK(r.objective == doctest::Approx(objective(r.solution)).epsilon(1e-12));
        }
    }
}
