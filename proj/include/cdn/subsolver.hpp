#ifndef CDN_SUBSOLVER_HPP_
#define CDN_SUBSOLVER_HPP_

#include <cstdint>

#include "cdn/composite.hpp"
#include "cdn/core.hpp"

namespace cdn {

inline constexpr double kDefaultInnerEps = 1e-10;

/*
    Symmetric tridiagonal decomposition H = Q T Q^T, with T given by its
    diagonal and subdiagonal.
*/
struct Tridiagonal
{
    Vector diag;
    Vector subdiag;
    Matrix Q;

    Matrix dense() const;
};

// Householder reflections, O(n^3).
Tridiagonal householder_tridiagonalize(const Matrix& H);

/*
    Solves (T + shift * I) x = b by LDL^T elimination. Returns false when a
    pivot is not above min_pivot (the shifted matrix is not safely positive
    definite); x is then unspecified.
*/
bool solve_shifted_tridiagonal(const Vector& diag, const Vector& subdiag, double shift, const Vector& b,
                               Vector* x, double min_pivot = 0.0);

/*
    minimize <g, h> + 1/2 <H h, h>  subject to  ||h||_2 <= radius,
    with H symmetric positive semidefinite.
*/
struct BallQP
{
    Vector g;
    Matrix H;
    double radius = 1.0;
    double eps = kDefaultInnerEps;
};

struct SubsolverReport
{
    Vector solution;
    double lambda = 0.0;
    std::uint64_t inner_iters = 0;
    double objective = 0.0;
};

class SubsolverError : public Error
{
public:
    SubsolverError(const std::string& message, SubsolverReport best)
        : Error(message), best_(std::move(best))
    {
    }
    const SubsolverReport& best() const { return best_; }

private:
    SubsolverReport best_;
};

inline constexpr int kSecularMaxIters = 200;
inline constexpr int kProjectedGradientMaxIters = 200000;

double ball_qp_objective(const Vector& g, const Matrix& H, const Vector& h);

/*
    Interior solution h = -H^+ g with lambda = 0 when it fits in the ball;
    otherwise the boundary solution from safeguarded Newton iterations on
    1/||(T + lambda I)^{-1} g~|| - 1/R in the tridiagonal basis, with the
    multiplier kept in [max(0, ||g||/R - lambda_max), ||g||/R].
    Stops when | ||h|| - R | <= eps * R.
*/
SubsolverReport solve_ball_qp(const BallQP& problem);

struct ContractedStep
{
    Vector x_next;
    Vector v_next;
    SubsolverReport report;
};

/*
    One step of the scaled-composite form: v minimizes
        <g, v - x> + (gamma/2) <H (v - x), v - x> + ball(v)
    and x_next = x + gamma (v - x). For p = 2 this is a BallQP in
    u = v - center with curvature gamma^2 H and linear term
    gamma (g + gamma H (center - x)).
*/
ContractedStep solve_contracted_step(const Vector& x, double gamma, const Vector& g, const Matrix& H,
                                     const BallIndicator& ball, double eps = kDefaultInnerEps);

/*
    One step over the contracted domain: x_next minimizes the full
    second-order model over gamma * ball + (1 - gamma) x, a ball of radius
    gamma * R centered at gamma * center + (1 - gamma) x.
    v_next = x + (x_next - x) / gamma.
*/
ContractedStep solve_contracted_domain_step(const Vector& x, double gamma, const Vector& g, const Matrix& H,
                                            const BallIndicator& ball, double eps = kDefaultInnerEps);

/*
    minimize <g, x - origin> + 1/2 <H (x - origin), x - origin> + psi(x)
    where origin defaults to the ball center. Report solution is x and
    objective includes psi. p = 2 goes through solve_ball_qp on the
    mu-augmented quadratic; p in {1, inf} uses accelerated projected
    gradient until the gradient-mapping norm is <= eps * max(1, ||g'||).
*/
SubsolverReport solve_composite_quadratic(const Vector& g, const Matrix& H, const Composite& comp,
                                          double eps = kDefaultInnerEps, const Vector* origin = nullptr);

}  // namespace cdn

#endif  // CDN_SUBSOLVER_HPP_
