#include "cdn/composite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace cdn {

double ExtendedReal::value() const
{
    if (infinite_)
    {
        throw Error("value requested from +infinity");
    }
    return value_;
}

NormKind norm_kind_from_p(double p)
{
    if (p == 1.0)
    {
        return NormKind::L1;
    }
    if (p == 2.0)
    {
        return NormKind::L2;
    }
    if (std::isinf(p) && p > 0)
    {
        return NormKind::Linf;
    }
    throw Error("unsupported ball norm p = " + format_double(p) + " (expected 1, 2 or inf)");
}

std::string norm_kind_name(NormKind p)
{
    switch (p)
    {
    case NormKind::L1:
        return "1";
    case NormKind::L2:
        return "2";
    case NormKind::Linf:
        return "inf";
    }
    return "";
}

double lp_norm(const Vector& x, NormKind p)
{
    switch (p)
    {
    case NormKind::L1:
        return x.lpNorm<1>();
    case NormKind::L2:
        return x.norm();
    case NormKind::Linf:
        return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
    }
    return 0.0;
}

BallIndicator::BallIndicator(NormKind p, Vector center, double radius)
    : p_(p), center_(std::move(center)), radius_(radius)
{
    if (!(radius_ > 0.0) || !std::isfinite(radius_))
    {
        throw Error("ball radius must be positive and finite");
    }
    if (center_.size() < 1)
    {
        throw Error("ball dimension must be at least 1");
    }
}

BallIndicator BallIndicator::from_diameter(NormKind p, Index n, double D)
{
    return BallIndicator(p, Vector::Zero(n), 0.5 * D);
}

double BallIndicator::distance_from_center(const Vector& x) const
{
    if (x.size() != dim())
    {
        throw Error("dimension mismatch in ball indicator");
    }
    return lp_norm(x - center_, p_);
}

bool BallIndicator::contains(const Vector& x) const
{
    return distance_from_center(x) <= radius_ * (1.0 + kFeasibilitySlack);
}

ExtendedReal BallIndicator::value(const Vector& x) const
{
    return contains(x) ? ExtendedReal::finite(0.0) : ExtendedReal::infinity();
}

Vector BallIndicator::linear_minimizer(const Vector& s) const
{
    if (s.size() != dim())
    {
        throw Error("dimension mismatch in linear minimizer");
    }
    Vector x = center_;
    switch (p_)
    {
    case NormKind::L2:
    {
        const double norm = s.norm();
        if (norm > 0.0)
        {
            x -= (radius_ / norm) * s;
        }
        break;
    }
    case NormKind::Linf:
        for (Index j = 0; j < s.size(); ++j)
        {
            if (s(j) > 0.0)
            {
                x(j) -= radius_;
            }
            else if (s(j) < 0.0)
            {
                x(j) += radius_;
            }
        }
        break;
    case NormKind::L1:
    {
        Index best = 0;
        for (Index j = 1; j < s.size(); ++j)
        {
            if (std::abs(s(j)) > std::abs(s(best)))
            {
                best = j;
            }
        }
        if (s(best) != 0.0)
        {
            x(best) -= radius_ * (s(best) > 0.0 ? 1.0 : -1.0);
        }
        break;
    }
    }
    return x;
}

namespace {

// Projection of y onto {||y||_1 <= r} by the sorted-threshold rule.
Vector ProjectL1(const Vector& y, double r)
{
    if (y.lpNorm<1>() <= r)
    {
        return y;
    }
    std::vector<double> magnitudes(y.size());
    for (Index j = 0; j < y.size(); ++j)
    {
        magnitudes[j] = std::abs(y(j));
    }
    std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < magnitudes.size(); ++j)
    {
        cumulative += magnitudes[j];
        const double candidate = (cumulative - r) / static_cast<double>(j + 1);
        if (magnitudes[j] > candidate)
        {
            theta = candidate;
        }
    }
    Vector x(y.size());
    for (Index j = 0; j < y.size(); ++j)
    {
        const double shrunk = std::max(std::abs(y(j)) - theta, 0.0);
        x(j) = y(j) >= 0.0 ? shrunk : -shrunk;
    }
    return x;
}

}  // namespace

Vector BallIndicator::project(const Vector& x) const
{
    if (x.size() != dim())
    {
        throw Error("dimension mismatch in projection");
    }
    const Vector y = x - center_;
    switch (p_)
    {
    case NormKind::L2:
    {
        const double norm = y.norm();
        if (norm <= radius_)
        {
            return x;
        }
        return center_ + (radius_ / norm) * y;
    }
    case NormKind::Linf:
        return center_ + y.cwiseMax(-radius_).cwiseMin(radius_);
    case NormKind::L1:
        return center_ + ProjectL1(y, radius_);
    }
    return x;
}

Composite::Composite(BallIndicator ball) : Composite(ball, 0.0, ball.center()) {}

Composite::Composite(BallIndicator ball, double mu, Vector anchor)
    : ball_(std::move(ball)), mu_(mu), anchor_(std::move(anchor))
{
    if (!(mu_ >= 0.0) || !std::isfinite(mu_))
    {
        throw Error("strong convexity parameter mu must be finite and nonnegative");
    }
    if (anchor_.size() != ball_.dim())
    {
        throw Error("composite anchor dimension mismatch");
    }
}

double Composite::quadratic_part(const Vector& x) const
{
    return mu_ == 0.0 ? 0.0 : 0.5 * mu_ * (x - anchor_).squaredNorm();
}

ExtendedReal Composite::value(const Vector& x) const
{
    return ball_.value(x) + quadratic_part(x);
}

Vector Composite::prox(const Vector& z, double L) const
{
    if (!(L > 0.0))
    {
        throw Error("prox requires L > 0");
    }
    // Sum of two isotropic quadratics is isotropic around the weighted mean.
    return ball_.project((L * z + mu_ * anchor_) / (L + mu_));
}

double condition_number(double H_nu, double D, double nu, double mu)
{
    if (!(mu > 0.0))
    {
        throw Error("condition number requires mu > 0");
    }
    if (!(D > 0.0))
    {
        throw Error("condition number requires D > 0");
    }
    if (!(H_nu >= 0.0))
    {
        throw Error("condition number requires H_nu >= 0");
    }
    if (!(nu >= 0.0 && nu <= 1.0))
    {
        throw Error("condition number requires nu in [0, 1]");
    }
    return std::pow(H_nu * std::pow(D, nu) / ((1.0 + nu) * mu), 1.0 / (1.0 + nu));
}

}  // namespace cdn
