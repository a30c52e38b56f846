#ifndef CDN_MODELS_HPP_
#define CDN_MODELS_HPP_

#include "cdn/composite.hpp"
#include "cdn/core.hpp"
#include "cdn/oracles.hpp"
#include "cdn/subsolver.hpp"

namespace cdn {

/*
    Hessian of f is Holder continuous with exponent nu and constant H:
        ||Hess f(x) - Hess f(y)|| <= H ||x - y||^nu.
*/
struct HolderClass
{
    double nu = 1.0;
    double H = 0.0;

    void validate() const;
};

// Euclidean diameter of the ball (2R for p in {1, 2}, 2R sqrt(n) for p = inf).
double euclidean_diameter(const BallIndicator& ball);

// f(x) + <grad f(x), y - x>
double first_order_lower_bound(const SmoothOracle& oracle, const Vector& x, const Vector& y);

/*
    f(x) + <grad f(x), d> + (t/2) <Hess f(x) d, d> - t^(1+nu) H ||d||^(2+nu) / ((1+nu)(2+nu)),
    d = y - x. Valid lower bound on f(y) for every t in [0, 1].
*/
double holder_lower_bound(const SmoothOracle& oracle, const Vector& x, const Vector& y, double t,
                          const HolderClass& hc);

/*
    nu/(1+nu) * min{1, (2+nu) <Hess f(x) d, d> / (2 H ||d||^(2+nu))}^(1/nu).
    Requires x != y and nu in (0, 1].
*/
double gamma_bar(const SmoothOracle& oracle, const Vector& x, const Vector& y, const HolderClass& hc);

// f(x) + <grad f(x), d> + (gamma_bar / 2) <Hess f(x) d, d>
double second_order_lower_bound(const SmoothOracle& oracle, const Vector& x, const Vector& y,
                                const HolderClass& hc);

/*
    Linear estimating function
        phi_k(x) = sum_{i=1..k} a_i [f(x_i) + <grad f(x_i), x - x_i>] + A_k psi(x),
    stored divided by A_k: phi_k / A_k = constant + <slope, x> + psi(x).
    A piece with weight a_{k+1} enters as a convex combination with
    coefficient gamma_k = a_{k+1} / A_{k+1}.
*/
class LinearEstimator
{
public:
    explicit LinearEstimator(Composite composite);

    void update(double gamma, const Vector& x, double f_value, const Vector& grad);

    bool empty() const { return updates_ == 0; }
    std::int64_t updates() const { return updates_; }
    double constant() const { return constant_; }
    const Vector& slope() const { return slope_; }
    const Composite& composite() const { return composite_; }

    // min_x phi_k(x) / A_k; throws when no piece has been added (A_k = 0).
    double minimum(double eps = kDefaultInnerEps) const;
    // F(x_k) - phi_k* / A_k
    double certificate(double F_at_xk, double eps = kDefaultInnerEps) const;

private:
    Composite composite_;
    double constant_ = 0.0;
    Vector slope_;
    std::int64_t updates_ = 0;
};

/*
    Quadratic estimating function
        Q_k(x) = sum_{i=0..k-1} a_{i+1} [f(x_i) + <grad f(x_i), x - x_i>
                 + (gamma_i / 2) <Hess f(x_i)(x - x_i), x - x_i> + psi(x)],
    stored divided by A_k as constant + <linear, x> + 1/2 <curvature x, x> + psi(x).

    C_k = 2 H D^(2+nu) / ((1+nu)(2+nu)) * sum_{i=0..k-1} a_{i+1} gamma_i^(1+nu)
    is tracked the same way (C_k / A_k).
*/
class QuadraticEstimator
{
public:
    QuadraticEstimator(Composite composite, HolderClass hc, double diameter);

    void update(double gamma, const Vector& x, double f_value, const Vector& grad, const Matrix& hess);

    bool empty() const { return updates_ == 0; }
    std::int64_t updates() const { return updates_; }
    const Matrix& curvature() const { return curvature_; }
    const Vector& linear() const { return linear_; }
    double constant() const { return constant_; }
    const Composite& composite() const { return composite_; }

    // C_k / A_k
    double normalized_gap() const { return gap_; }
    // Q_k(x) / A_k, +inf outside the ball.
    ExtendedReal value(const Vector& x) const;

    struct Minimum
    {
        double value;  // Q_k* / A_k
        Vector argmin;
        SubsolverReport report;
    };
    Minimum minimize(double eps = kDefaultInnerEps) const;

    // F(x_k) - Q_k*/A_k + C_k/(2 A_k), or without the C_k term when partial.
    double certificate(double F_at_xk, double minimum_value, bool partial = false) const;

private:
    void RequireNonEmpty() const;

    Composite composite_;
    HolderClass hc_;
    double gap_factor_;
    double constant_ = 0.0;
    Vector linear_;
    Matrix curvature_;
    double gap_ = 0.0;
    std::int64_t updates_ = 0;
};

}  // namespace cdn

#endif  // CDN_MODELS_HPP_
