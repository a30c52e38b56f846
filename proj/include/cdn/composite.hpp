#ifndef CDN_COMPOSITE_HPP_
#define CDN_COMPOSITE_HPP_

#include <string>

#include "cdn/core.hpp"

namespace cdn {

/*
    Real number or +infinity. Infeasibility of an indicator is carried by
    the flag, never by arithmetic overflow.
*/
class ExtendedReal
{
public:
    static ExtendedReal finite(double value) { return ExtendedReal(value, false); }
    static ExtendedReal infinity() { return ExtendedReal(0.0, true); }

    bool is_finite() const { return !infinite_; }
    bool is_infinite() const { return infinite_; }
    // Throws when infinite.
    double value() const;

    ExtendedReal operator+(double other) const { return infinite_ ? *this : finite(value_ + other); }

private:
    ExtendedReal(double value, bool infinite) : value_(value), infinite_(infinite) {}

    double value_;
    bool infinite_;
};

enum class NormKind
{
    L1,
    L2,
    Linf
};

NormKind norm_kind_from_p(double p);
std::string norm_kind_name(NormKind p);
double lp_norm(const Vector& x, NormKind p);

// Relative slack on the radius when testing feasibility of computed points.
inline constexpr double kFeasibilitySlack = 1e-12;

/*
    Indicator of {x : ||x - center||_p <= radius}; diameter D = 2 * radius.
*/
class BallIndicator
{
public:
    BallIndicator(NormKind p, Vector center, double radius);
    // Origin-centered ball of diameter D.
    static BallIndicator from_diameter(NormKind p, Index n, double D);

    NormKind p() const { return p_; }
    const Vector& center() const { return center_; }
    double radius() const { return radius_; }
    double diameter() const { return 2.0 * radius_; }
    Index dim() const { return center_.size(); }

    double distance_from_center(const Vector& x) const;
    bool contains(const Vector& x) const;
    ExtendedReal value(const Vector& x) const;

    // argmin over the ball of <s, x>; returns the center for s = 0 and the
    // lowest index on |s_j| ties for p = 1.
    Vector linear_minimizer(const Vector& s) const;
    // Euclidean projection onto the ball.
    Vector project(const Vector& x) const;

private:
    NormKind p_;
    Vector center_;
    double radius_;
};

/*
    psi(x) = ball(x) + (mu / 2) ||x - anchor||_2^2 with mu >= 0.
*/
class Composite
{
public:
    explicit Composite(BallIndicator ball);
    Composite(BallIndicator ball, double mu, Vector anchor);

    const BallIndicator& ball() const { return ball_; }
    double mu() const { return mu_; }
    const Vector& anchor() const { return anchor_; }
    bool is_indicator() const { return mu_ == 0.0; }
    Index dim() const { return ball_.dim(); }

    ExtendedReal value(const Vector& x) const;
    // Quadratic part (mu / 2) ||x - anchor||^2 only, ignoring the indicator.
    double quadratic_part(const Vector& x) const;

    // prox: argmin_x { (L/2) ||x - z||^2 + psi(x) }.
    Vector prox(const Vector& z, double L) const;

private:
    BallIndicator ball_;
    double mu_;
    Vector anchor_;
};

/*
    Second-order condition number
        omega = [H D^nu / ((1 + nu) mu)]^(1 / (1 + nu)).
    H = 0 gives omega = 0. Requires mu > 0, D > 0, nu in [0, 1].
*/
double condition_number(double H_nu, double D, double nu, double mu);

}  // namespace cdn

#endif  // CDN_COMPOSITE_HPP_
