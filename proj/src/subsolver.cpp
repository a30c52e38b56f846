#include "cdn/subsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cdn {

namespace {

const double MACHINE_EPS = std::numeric_limits<double>::epsilon();

void CheckSymmetric(const Matrix& H)
{
    if (H.rows() != H.cols())
    {
        throw Error("subproblem matrix must be square");
    }
    const double scale = 1.0 + H.cwiseAbs().maxCoeff();
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    {
        throw Error("subproblem matrix must be symmetric");
    }
}

}  // namespace

Matrix Tridiagonal::dense() const
{
    const Index n = diag.size();
    Matrix T = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
    {
        T(i, i) = diag(i);
        if (i + 1 < n)
        {
            T(i, i + 1) = subdiag(i);
            T(i + 1, i) = subdiag(i);
        }
    }
    return T;
}

Tridiagonal householder_tridiagonalize(const Matrix& H)
{
    CheckSymmetric(H);
    const Index n = H.rows();
    Matrix A = 0.5 * (H + H.transpose());
    Matrix Q = Matrix::Identity(n, n);

    for (Index k = 0; k + 2 < n; ++k)
    {
        const Index m = n - k - 1;
        Vector v = A.col(k).tail(m);
        const double x_norm = v.norm();
        if (x_norm == 0.0)
        {
            continue;
        }
        // Reflect the column onto alpha * e_1, choosing the sign that avoids cancellation.
        const double alpha = v(0) > 0 ? -x_norm : x_norm;
        v(0) -= alpha;
        const double v_norm = v.norm();
        if (v_norm == 0.0)
        {
            continue;
        }
        v /= v_norm;

        // A22 <- P A22 P with P = I - 2 v v^T.
        auto A22 = A.bottomRightCorner(m, m);
        const Vector p = 2.0 * (A22 * v);
        const Vector w = p - v.dot(p) * v;
        A22.noalias() -= v * w.transpose() + w * v.transpose();

        A.col(k).tail(m).setZero();
        A.row(k).tail(m).setZero();
        A(k + 1, k) = alpha;
        A(k, k + 1) = alpha;

        // Q <- Q P
        auto Q_tail = Q.rightCols(m);
        const Vector Qv = Q_tail * v;
        Q_tail.noalias() -= 2.0 * Qv * v.transpose();
    }

    Tridiagonal result;
    result.diag = A.diagonal();
    result.subdiag = n > 1 ? Vector(A.diagonal(-1)) : Vector();
    result.Q = std::move(Q);
    return result;
}

bool solve_shifted_tridiagonal(const Vector& diag, const Vector& subdiag, double shift, const Vector& b,
                               Vector* x, double min_pivot)
{
    const Index n = diag.size();
    x->resize(n);
    Vector pivots(n);
    Vector multipliers(std::max<Index>(n - 1, 0));
    pivots(0) = diag(0) + shift;
    if (!(pivots(0) > min_pivot))
    {
        return false;
    }
    for (Index i = 1; i < n; ++i)
    {
        multipliers(i - 1) = subdiag(i - 1) / pivots(i - 1);
        pivots(i) = diag(i) + shift - multipliers(i - 1) * subdiag(i - 1);
        if (!(pivots(i) > min_pivot))
        {
            return false;
        }
    }
    // L y = b, D z = y, L^T x = z
    Vector& y = *x;
    y(0) = b(0);
    for (Index i = 1; i < n; ++i)
    {
        y(i) = b(i) - multipliers(i - 1) * y(i - 1);
    }
    for (Index i = 0; i < n; ++i)
    {
        y(i) /= pivots(i);
    }
    for (Index i = n - 2; i >= 0; --i)
    {
        y(i) -= multipliers(i) * y(i + 1);
    }
    return true;
}

double ball_qp_objective(const Vector& g, const Matrix& H, const Vector& h)
{
    return g.dot(h) + 0.5 * h.dot(H * h);
}

namespace {

SubsolverReport SolveScalar(const BallQP& problem)
{
    const double a = problem.H(0, 0);
    const double g = problem.g(0);
    const double R = problem.radius;
    if (a < -1e-12 * (1.0 + std::abs(a)))
    {
        throw Error("subproblem matrix must be positive semidefinite");
    }
    SubsolverReport report;
    report.solution = Vector::Zero(1);
    if (g == 0.0)
    {
        return report;
    }
    if (a > 0.0 && std::abs(g) / a <= R)
    {
        report.solution(0) = -g / a;
        report.lambda = 0.0;
    }
    else
    {
        report.solution(0) = g > 0 ? -R : R;
        report.lambda = std::max(0.0, std::abs(g) / R - a);
    }
    report.objective = ball_qp_objective(problem.g, problem.H, report.solution);
    return report;
}

}  // namespace

SubsolverReport solve_ball_qp(const BallQP& problem)
{
    const Index n = problem.g.size();
    if (n < 1)
    {
        throw Error("subproblem dimension must be at least 1");
    }
    if (problem.H.rows() != n)
    {
        throw Error("subproblem dimension mismatch between g and H");
    }
    CheckSymmetric(problem.H);
    if (!(problem.radius > 0.0) || !std::isfinite(problem.radius))
    {
        throw Error("subproblem radius must be positive");
    }
    if (!(problem.eps > 0.0))
    {
        throw Error("subproblem tolerance must be positive");
    }
    if (!problem.g.allFinite() || !problem.H.allFinite())
    {
        throw Error("subproblem data must be finite");
    }

    const double R = problem.radius;
    const double g_norm = problem.g.norm();
    if (g_norm == 0.0)
    {
        SubsolverReport report;
        report.solution = Vector::Zero(n);
        return report;
    }
    if (n == 1)
    {
        return SolveScalar(problem);
    }

    const Tridiagonal tri = householder_tridiagonalize(problem.H);
    const Vector gt = tri.Q.transpose() * problem.g;
    const Vector minus_gt = -gt;

    // Gershgorin upper bound on lambda_max(T).
    double lambda_max = 0.0;
    for (Index i = 0; i < n; ++i)
    {
        double radius = 0.0;
        if (i > 0)
        {
            radius += std::abs(tri.subdiag(i - 1));
        }
        if (i + 1 < n)
        {
            radius += std::abs(tri.subdiag(i));
        }
        lambda_max = std::max(lambda_max, tri.diag(i) + radius);
    }
    const double scale = std::max(lambda_max, g_norm / R);
    const double min_pivot = 8.0 * MACHINE_EPS * scale;

    Vector s(n);
    Vector probe(n);
    if (!solve_shifted_tridiagonal(tri.diag, tri.subdiag, 1e-10 * scale, Vector::Ones(n), &probe, 0.0))
    {
        throw Error("subproblem matrix must be positive semidefinite");
    }

    auto finish = [&](const Vector& s_tri, double lambda, std::uint64_t iters) {
        SubsolverReport report;
        report.solution = tri.Q * s_tri;
        const double norm = report.solution.norm();
        if (norm > R)
        {
            report.solution *= R / norm;
        }
        report.lambda = lambda;
        report.inner_iters = iters;
        report.objective = ball_qp_objective(problem.g, problem.H, report.solution);
        return report;
    };

    std::uint64_t iters = 1;
    // Interior candidate.
    const bool pd_at_zero = solve_shifted_tridiagonal(tri.diag, tri.subdiag, 0.0, minus_gt, &s, min_pivot);
    double s_norm = pd_at_zero ? s.norm() : std::numeric_limits<double>::infinity();
    if (pd_at_zero && s_norm <= R)
    {
        return finish(s, 0.0, iters);
    }

    // Bracket [lo, hi]: ||s(lo)|| >= R (or lo = 0 singular), ||s(hi)|| <= R.
    double lo = std::max(0.0, g_norm / R - lambda_max);
    double hi = g_norm / R;
    double lambda = lo;
    Vector s_hi(n);
    bool have_hi = false;
    bool evaluated = false;
    if (lambda == 0.0)
    {
        evaluated = pd_at_zero;
    }
    if (!evaluated)
    {
        if (lambda == 0.0)
        {
            lambda = 0.5 * hi;
        }
    }

    Vector w(n);
    for (int it = 0; it < kSecularMaxIters; ++it)
    {
        if (!evaluated)
        {
            ++iters;
            if (!solve_shifted_tridiagonal(tri.diag, tri.subdiag, lambda, minus_gt, &s, min_pivot))
            {
                // Too close to the singular end: move right.
                lo = std::max(lo, lambda);
                lambda = 0.5 * (lo + hi);
                continue;
            }
            s_norm = s.norm();
        }
        evaluated = false;

        if (std::abs(s_norm - R) <= problem.eps * R)
        {
            return finish(s, lambda, iters);
        }
        if (s_norm > R)
        {
            lo = std::max(lo, lambda);
        }
        else
        {
            hi = std::min(hi, lambda);
            s_hi = s;
            have_hi = true;
        }
        if (hi - lo <= 4.0 * MACHINE_EPS * hi || hi <= MACHINE_EPS * scale)
        {
            break;
        }

        // Newton on phi(lambda) = 1/||s|| - 1/R, with phi' = <s, w> / ||s||^3, w = (T + lambda)^{-1} s.
        double next = std::numeric_limits<double>::quiet_NaN();
        ++iters;
        if (solve_shifted_tridiagonal(tri.diag, tri.subdiag, lambda, s, &w, min_pivot))
        {
            const double phi = 1.0 / s_norm - 1.0 / R;
            const double phi_prime = s.dot(w) / (s_norm * s_norm * s_norm);
            if (phi_prime > 0.0)
            {
                next = lambda - phi / phi_prime;
            }
        }
        if (!(next > lo && next < hi))
        {
            next = 0.5 * (lo + hi);
        }
        lambda = next;
    }

    if (!have_hi)
    {
        ++iters;
        if (!solve_shifted_tridiagonal(tri.diag, tri.subdiag, hi, minus_gt, &s_hi, 0.0))
        {
            SubsolverReport best;
            best.solution = Vector::Zero(n);
            best.inner_iters = iters;
            throw SubsolverError("secular iteration failed to converge", best);
        }
        have_hi = true;
    }
    const SubsolverReport best = finish(s_hi, hi, iters);
    if (std::abs(s_hi.norm() - R) <= problem.eps * R || hi <= MACHINE_EPS * scale ||
        hi - lo <= 4.0 * MACHINE_EPS * hi)
    {
        return best;
    }
    throw SubsolverError("secular iteration cap exceeded", best);
}

ContractedStep solve_contracted_step(const Vector& x, double gamma, const Vector& g, const Matrix& H,
                                     const BallIndicator& ball, double eps)
{
    if (!(gamma > 0.0 && gamma <= 1.0))
    {
        throw Error("contracting coefficient must lie in (0, 1]");
    }
    ContractedStep step;
    if (ball.p() == NormKind::L2)
    {
        BallQP qp;
        qp.g = gamma * (g + gamma * (H * (ball.center() - x)));
        qp.H = (gamma * gamma) * H;
        qp.radius = ball.radius();
        qp.eps = eps;
        step.report = solve_ball_qp(qp);
        step.v_next = ball.center() + step.report.solution;
    }
    else
    {
        step.report = solve_composite_quadratic(g, gamma * H, Composite(ball), eps, &x);
        step.v_next = step.report.solution;
    }
    step.x_next = x + gamma * (step.v_next - x);
    return step;
}

ContractedStep solve_contracted_domain_step(const Vector& x, double gamma, const Vector& g, const Matrix& H,
                                            const BallIndicator& ball, double eps)
{
    if (!(gamma > 0.0 && gamma <= 1.0))
    {
        throw Error("contracting coefficient must lie in (0, 1]");
    }
    const Vector center = gamma * ball.center() + (1.0 - gamma) * x;
    const BallIndicator contracted(ball.p(), center, gamma * ball.radius());
    ContractedStep step;
    if (ball.p() == NormKind::L2)
    {
        BallQP qp;
        qp.g = g + H * (center - x);
        qp.H = H;
        qp.radius = contracted.radius();
        qp.eps = eps;
        step.report = solve_ball_qp(qp);
        step.x_next = center + step.report.solution;
    }
    else
    {
        step.report = solve_composite_quadratic(g, H, Composite(contracted), eps, &x);
        step.x_next = step.report.solution;
    }
    step.v_next = x + (step.x_next - x) / gamma;
    return step;
}

namespace {

/*
    Accelerated projected gradient with gradient-based restart for
        minimize <g, u> + 1/2 <H u, u>  over  {||u||_p <= R}.
*/
SubsolverReport ProjectedGradientBall(const Vector& g, const Matrix& H, const BallIndicator& ball, double eps)
{
    const Index n = g.size();
    SubsolverReport report;
    const double L = n == 0 ? 0.0 : Eigen::SelfAdjointEigenSolver<Matrix>(H, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (!(L > 0.0))
    {
        report.solution = ball.linear_minimizer(g);
        report.objective = ball_qp_objective(g, H, report.solution);
        return report;
    }
    const double tol = eps * std::max(1.0, g.norm());
    Vector u = ball.center();
    Vector y = u;
    double t = 1.0;
    for (int it = 1; it <= kProjectedGradientMaxIters; ++it)
    {
        const Vector grad_y = g + H * y;
        const Vector u_next = ball.project(y - grad_y / L);
        const Vector grad_u = g + H * u_next;
        const double mapping = L * (u_next - ball.project(u_next - grad_u / L)).norm();
        // Restart momentum when it points uphill.
        if (grad_y.dot(u_next - u) > 0.0)
        {
            t = 1.0;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = u_next + ((t - 1.0) / t_next) * (u_next - u);
        u = u_next;
        t = t_next;
        report.inner_iters = static_cast<std::uint64_t>(it);
        if (mapping <= tol)
        {
            report.solution = u;
            report.objective = ball_qp_objective(g, H, u);
            return report;
        }
    }
    report.solution = u;
    report.objective = ball_qp_objective(g, H, u);
    throw SubsolverError("projected-gradient inner iteration cap exceeded", report);
}

}  // namespace

SubsolverReport solve_composite_quadratic(const Vector& g, const Matrix& H, const Composite& comp, double eps,
                                          const Vector* origin)
{
    const BallIndicator& ball = comp.ball();
    const Index n = ball.dim();
    if (g.size() != n || H.rows() != n || H.cols() != n)
    {
        throw Error("composite quadratic dimension mismatch");
    }
    CheckSymmetric(H);
    const Vector& o = origin != nullptr ? *origin : ball.center();
    if (o.size() != n)
    {
        throw Error("composite quadratic origin dimension mismatch");
    }
    const Vector& c = ball.center();
    const double mu = comp.mu();

    // In u = x - c: <g', u> + 1/2 <H' u, u> + const.
    Vector g_u = g + H * (c - o);
    Matrix H_u = H;
    if (mu > 0.0)
    {
        g_u += mu * (c - comp.anchor());
        H_u.diagonal().array() += mu;
    }

    SubsolverReport report;
    if (ball.p() == NormKind::L2)
    {
        BallQP qp{g_u, H_u, ball.radius(), eps};
        report = solve_ball_qp(qp);
    }
    else
    {
        try
        {
            report = ProjectedGradientBall(g_u, H_u, BallIndicator(ball.p(), Vector::Zero(n), ball.radius()), eps);
        }
        catch (const SubsolverError& error)
        {
            SubsolverReport best = error.best();
            best.solution += c;
            throw SubsolverError(error.what(), best);
        }
    }
    report.solution += c;
    const Vector d = report.solution - o;
    report.objective = g.dot(d) + 0.5 * d.dot(H * d) + comp.quadratic_part(report.solution);
    return report;
}

}  // namespace cdn
