#include "cdn/models.hpp"

#include <cmath>

namespace cdn {

void HolderClass::validate() const
{
    if (!(nu >= 0.0 && nu <= 1.0))
    {
        throw Error("Holder exponent nu must lie in [0, 1]");
    }
    if (!(H >= 0.0) || !std::isfinite(H))
    {
        throw Error("Holder constant must be finite and nonnegative");
    }
}

double euclidean_diameter(const BallIndicator& ball)
{
    if (ball.p() == NormKind::Linf)
    {
        return ball.diameter() * std::sqrt(static_cast<double>(ball.dim()));
    }
    return ball.diameter();
}

namespace {

struct Taylor
{
    double f;
    double slope;      // <grad f(x), d>
    double curvature;  // <Hess f(x) d, d>
    double distance;   // ||d||
};

Taylor Expand(const SmoothOracle& oracle, const Vector& x, const Vector& y, int order)
{
    if (x.size() != oracle.dim() || y.size() != oracle.dim())
    {
        throw Error("dimension mismatch in lower bound");
    }
    const Evaluation e = oracle.evaluate(x, order);
    const Vector d = y - x;
    Taylor t;
    t.f = e.f;
    t.slope = e.grad->dot(d);
    t.curvature = order >= 2 ? d.dot(*e.hess * d) : 0.0;
    t.distance = d.norm();
    return t;
}

double GammaBar(const Taylor& t, const HolderClass& hc)
{
    const double nu = hc.nu;
    if (hc.H == 0.0)
    {
        return nu / (1.0 + nu);
    }
    const double ratio = (2.0 + nu) * t.curvature / (2.0 * hc.H * std::pow(t.distance, 2.0 + nu));
    return nu / (1.0 + nu) * std::pow(std::min(1.0, ratio), 1.0 / nu);
}

}  // namespace

double first_order_lower_bound(const SmoothOracle& oracle, const Vector& x, const Vector& y)
{
    const Taylor t = Expand(oracle, x, y, 1);
    return t.f + t.slope;
}

double holder_lower_bound(const SmoothOracle& oracle, const Vector& x, const Vector& y, double t,
                          const HolderClass& hc)
{
    hc.validate();
    if (!(t >= 0.0 && t <= 1.0))
    {
        throw Error("lower bound parameter t must lie in [0, 1]");
    }
    const Taylor e = Expand(oracle, x, y, 2);
    const double nu = hc.nu;
    const double penalty =
        hc.H == 0.0 ? 0.0 : std::pow(t, 1.0 + nu) * hc.H * std::pow(e.distance, 2.0 + nu) / ((1.0 + nu) * (2.0 + nu));
    return e.f + e.slope + 0.5 * t * e.curvature - penalty;
}

double gamma_bar(const SmoothOracle& oracle, const Vector& x, const Vector& y, const HolderClass& hc)
{
    hc.validate();
    if (hc.nu == 0.0)
    {
        throw Error("gamma_bar is undefined for nu = 0");
    }
    const Taylor e = Expand(oracle, x, y, 2);
    if (e.distance == 0.0)
    {
        throw Error("gamma_bar requires x != y");
    }
    return GammaBar(e, hc);
}

double second_order_lower_bound(const SmoothOracle& oracle, const Vector& x, const Vector& y,
                                const HolderClass& hc)
{
    hc.validate();
    if (hc.nu == 0.0)
    {
        throw Error("second-order lower bound is undefined for nu = 0");
    }
    const Taylor e = Expand(oracle, x, y, 2);
    if (e.distance == 0.0)
    {
        throw Error("second-order lower bound requires x != y");
    }
    return e.f + e.slope + 0.5 * GammaBar(e, hc) * e.curvature;
}

namespace {

void CheckGamma(double gamma)
{
    if (!(gamma > 0.0 && gamma <= 1.0))
    {
        throw Error("estimator weight must lie in (0, 1]");
    }
}

}  // namespace

LinearEstimator::LinearEstimator(Composite composite)
    : composite_(std::move(composite)), slope_(Vector::Zero(composite_.dim()))
{
}

void LinearEstimator::update(double gamma, const Vector& x, double f_value, const Vector& grad)
{
    CheckGamma(gamma);
    if (x.size() != slope_.size() || grad.size() != slope_.size())
    {
        throw Error("dimension mismatch in estimator update");
    }
    const double piece = f_value - grad.dot(x);
    constant_ = (1.0 - gamma) * constant_ + gamma * piece;
    slope_ = (1.0 - gamma) * slope_ + gamma * grad;
    ++updates_;
}

double LinearEstimator::minimum(double eps) const
{
    if (empty())
    {
        throw Error("certificate requested before any estimator update (A_k = 0)");
    }
    const BallIndicator& ball = composite_.ball();
    if (composite_.is_indicator())
    {
        const Vector x = ball.linear_minimizer(slope_);
        return constant_ + slope_.dot(x);
    }
    const Vector& o = ball.center();
    const SubsolverReport r =
        solve_composite_quadratic(slope_, Matrix::Zero(slope_.size(), slope_.size()), composite_, eps, &o);
    return constant_ + slope_.dot(o) + r.objective;
}

double LinearEstimator::certificate(double F_at_xk, double eps) const
{
    return F_at_xk - minimum(eps);
}

QuadraticEstimator::QuadraticEstimator(Composite composite, HolderClass hc, double diameter)
    : composite_(std::move(composite)),
      hc_(hc),
      linear_(Vector::Zero(composite_.dim())),
      curvature_(Matrix::Zero(composite_.dim(), composite_.dim()))
{
    hc_.validate();
    if (!(diameter > 0.0))
    {
        throw Error("estimator diameter must be positive");
    }
    const double nu = hc_.nu;
    gap_factor_ = 2.0 * hc_.H * std::pow(diameter, 2.0 + nu) / ((1.0 + nu) * (2.0 + nu));
}

void QuadraticEstimator::update(double gamma, const Vector& x, double f_value, const Vector& grad,
                                const Matrix& hess)
{
    CheckGamma(gamma);
    const Index n = linear_.size();
    if (x.size() != n || grad.size() != n || hess.rows() != n || hess.cols() != n)
    {
        throw Error("dimension mismatch in estimator update");
    }
    // f + <g, y - x> + (gamma/2) <H (y - x), y - x> expanded around the origin.
    const Vector Hx = hess * x;
    const double piece_constant = f_value - grad.dot(x) + 0.5 * gamma * x.dot(Hx);
    const Vector piece_linear = grad - gamma * Hx;

    const double keep = 1.0 - gamma;
    constant_ = keep * constant_ + gamma * piece_constant;
    linear_ = keep * linear_ + gamma * piece_linear;
    curvature_ = keep * curvature_ + (gamma * gamma) * hess;
    curvature_ = 0.5 * (curvature_ + curvature_.transpose()).eval();
    gap_ = keep * gap_ + gap_factor_ * std::pow(gamma, 2.0 + hc_.nu);
    ++updates_;
}

void QuadraticEstimator::RequireNonEmpty() const
{
    if (empty())
    {
        throw Error("certificate requested before any estimator update (A_k = 0)");
    }
}

ExtendedReal QuadraticEstimator::value(const Vector& x) const
{
    RequireNonEmpty();
    return composite_.value(x) + (constant_ + linear_.dot(x) + 0.5 * x.dot(curvature_ * x));
}

QuadraticEstimator::Minimum QuadraticEstimator::minimize(double eps) const
{
    RequireNonEmpty();
    const Vector& o = composite_.ball().center();
    const Vector shifted = linear_ + curvature_ * o;
    Minimum result;
    result.report = solve_composite_quadratic(shifted, curvature_, composite_, eps, &o);
    result.argmin = result.report.solution;
    result.value = constant_ + linear_.dot(o) + 0.5 * o.dot(curvature_ * o) + result.report.objective;
    return result;
}

double QuadraticEstimator::certificate(double F_at_xk, double minimum_value, bool partial) const
{
    RequireNonEmpty();
    return F_at_xk - minimum_value + (partial ? 0.0 : 0.5 * gap_);
}

}  // namespace cdn
