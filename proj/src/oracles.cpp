#include "cdn/oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace cdn {

double log_one_exp(double t)
{
    if (t > 0)
    {
        return t + std::log1p(std::exp(-t));
    }
    return std::log1p(std::exp(t));
}

double sigmoid(double t)
{
    if (t >= 0)
    {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

LogisticOracle::LogisticOracle(Matrix A) : A_(std::move(A))
{
    if (A_.rows() < 1 || A_.cols() < 1)
    {
        throw Error("logistic oracle needs at least one row and one column");
    }
    row_norms_ = A_.rowwise().norm();
}

LogisticOracle::LogisticOracle(const Dataset& data, bool label_fold) : LogisticOracle(data.dense(label_fold)) {}

LogisticOracle::LogisticOracle(const LogisticOracle& other)
    : A_(other.A_), row_norms_(other.row_norms_), grad_samples_(0), hess_samples_(0)
{
}

void LogisticOracle::Validate(const Vector& x) const
{
    if (x.size() != dim())
    {
        throw Error("dimension mismatch: oracle has n = " + std::to_string(dim()) + ", point has " +
                    std::to_string(x.size()));
    }
}

void LogisticOracle::reset_counters() const
{
    grad_samples_ = 0;
    hess_samples_ = 0;
}

Evaluation LogisticOracle::evaluate(const Vector& x, int order) const
{
    Validate(x);
    const Index M = size();
    const double inv_m = 1.0 / static_cast<double>(M);
    const Vector t = A_ * x;

    Evaluation result;
    result.f = inv_m * t.unaryExpr(&log_one_exp).sum();
    if (order >= 1)
    {
        const Vector s = t.unaryExpr(&sigmoid);
        result.grad = inv_m * (A_.transpose() * s);
        grad_samples_ += static_cast<std::uint64_t>(M);
        if (order >= 2)
        {
            result.hess = HessianFromSigmoids(s);
        }
    }
    return result;
}

Matrix LogisticOracle::HessianFromSigmoids(const Vector& s) const
{
    const Vector w = s.unaryExpr([](double v) { return v * (1.0 - v); });
    hess_samples_ += static_cast<std::uint64_t>(size());
    return (1.0 / static_cast<double>(size())) * (A_.transpose() * w.asDiagonal() * A_);
}

Matrix LogisticOracle::full_hessian(const Vector& x) const
{
    Validate(x);
    const Vector t = A_ * x;
    return HessianFromSigmoids(t.unaryExpr(&sigmoid));
}

Vector LogisticOracle::component_gradient(Index i, const Vector& x) const
{
    Validate(x);
    grad_samples_ += 1;
    return sigmoid(A_.row(i).dot(x)) * A_.row(i).transpose();
}

Vector LogisticOracle::batch_gradient(const Vector& x, std::span<const Index> batch) const
{
    Validate(x);
    if (batch.empty())
    {
        throw Error("batch must be nonempty");
    }
    Vector g = Vector::Zero(dim());
    for (const Index i : batch)
    {
        g += sigmoid(A_.row(i).dot(x)) * A_.row(i).transpose();
    }
    grad_samples_ += batch.size();
    return g / static_cast<double>(batch.size());
}

Matrix LogisticOracle::batch_hessian(const Vector& x, std::span<const Index> batch) const
{
    Validate(x);
    if (batch.empty())
    {
        throw Error("batch must be nonempty");
    }
    const Index m = static_cast<Index>(batch.size());
    Matrix rows(m, dim());
    Vector w(m);
    for (Index r = 0; r < m; ++r)
    {
        rows.row(r) = A_.row(batch[r]);
        const double s = sigmoid(rows.row(r).dot(x));
        w(r) = s * (1.0 - s);
    }
    hess_samples_ += batch.size();
    return (rows.transpose() * w.asDiagonal() * rows) / static_cast<double>(m);
}

Vector LogisticOracle::hessian_vector(const Vector& x, const Vector& u) const
{
    Validate(x);
    Validate(u);
    const Vector t = A_ * x;
    const Vector Au = A_ * u;
    Vector weighted(size());
    for (Index i = 0; i < size(); ++i)
    {
        const double s = sigmoid(t(i));
        weighted(i) = s * (1.0 - s) * Au(i);
    }
    return (A_.transpose() * weighted) / static_cast<double>(size());
}

LogisticOracle::Constants LogisticOracle::constants() const
{
    // |(log(1+e^t))'| <= 1, |..''| <= 1/4, |..'''| <= 1/(6 sqrt 3).
    const double inv_m = 1.0 / static_cast<double>(size());
    const double third = 1.0 / (6.0 * std::numbers::sqrt3);
    Constants c{};
    c.L0 = inv_m * row_norms_.sum();
    c.L1 = 0.25 * inv_m * row_norms_.squaredNorm();
    c.L2 = third * inv_m * row_norms_.array().cube().sum();
    return c;
}

QuadraticOracle::QuadraticOracle(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b))
{
    if (A_.rows() != A_.cols() || A_.rows() != b_.size())
    {
        throw Error("quadratic oracle: matrix must be n x n with n = size of b");
    }
    if ((A_ - A_.transpose()).norm() > 1e-12 * (1.0 + A_.norm()))
    {
        throw Error("quadratic oracle: matrix must be symmetric");
    }
}

Evaluation QuadraticOracle::evaluate(const Vector& x, int order) const
{
    if (x.size() != dim())
    {
        throw Error("dimension mismatch in quadratic oracle");
    }
    const Vector Ax = A_ * x;
    Evaluation result;
    result.f = 0.5 * x.dot(Ax) - b_.dot(x);
    if (order >= 1)
    {
        result.grad = Ax - b_;
    }
    if (order >= 2)
    {
        result.hess = A_;
    }
    return result;
}

Index batch_size(double gamma, int power, Index M, bool cap_at_M)
{
    const double raw = std::ceil(std::pow(1.0 / gamma, power) - 1e-9);
    Index size = 1;
    if (!std::isfinite(raw) || raw >= static_cast<double>(std::numeric_limits<Index>::max() / 2))
    {
        size = std::numeric_limits<Index>::max() / 2;
    }
    else
    {
        size = std::max<Index>(1, static_cast<Index>(raw));
    }
    return cap_at_M ? std::min(size, M) : size;
}

std::vector<Index> sample_batch(Index M, Index size, const RandomStream& stream, std::uint64_t iteration,
                                const SamplingPolicy& policy)
{
    if (size < 1)
    {
        throw Error("batch size must be at least 1");
    }
    std::vector<Index> batch;
    if (size >= M && policy.cap_at_M)
    {
        batch.resize(M);
        for (Index i = 0; i < M; ++i)
        {
            batch[i] = i;
        }
        return batch;
    }
    if (policy.with_replacement)
    {
        batch.resize(size);
        for (Index j = 0; j < size; ++j)
        {
            batch[j] = static_cast<Index>(stream.index(iteration, j, static_cast<std::uint64_t>(M)));
        }
        return batch;
    }
    if (size > M)
    {
        throw Error("without-replacement batch larger than M");
    }
    // Partial Fisher-Yates; draw j picks from the remaining M - j slots.
    std::vector<Index> pool(M);
    for (Index i = 0; i < M; ++i)
    {
        pool[i] = i;
    }
    for (Index j = 0; j < size; ++j)
    {
        const Index pick = j + static_cast<Index>(stream.index(iteration, j, static_cast<std::uint64_t>(M - j)));
        std::swap(pool[j], pool[pick]);
    }
    pool.resize(size);
    return pool;
}

namespace {

bool IsExhaustive(std::span<const Index> batch, Index M)
{
    if (static_cast<Index>(batch.size()) != M)
    {
        return false;
    }
    for (Index i = 0; i < M; ++i)
    {
        if (batch[i] != i)
        {
            return false;
        }
    }
    return true;
}

}  // namespace

StochEstimate sample_basic_estimators(const LogisticOracle& oracle, const Vector& x, Index m_g, Index m_h,
                                      const RandomStream& stream, std::uint64_t iteration,
                                      const SamplingPolicy& policy)
{
    if (m_g < 1 || m_h < 1)
    {
        throw Error("batch sizes must be at least 1");
    }
    const Index M = oracle.size();
    StochEstimate est;
    est.batch_g = sample_batch(M, m_g, stream.derive(1), iteration, policy);
    est.batch_h = sample_batch(M, m_h, stream.derive(2), iteration, policy);

    // Exhaustive batches reuse the full-data path so the estimate equals the exact derivative.
    if (IsExhaustive(est.batch_g, M))
    {
        est.g = *oracle.evaluate(x, 1).grad;
    }
    else
    {
        est.g = oracle.batch_gradient(x, est.batch_g);
    }
    if (IsExhaustive(est.batch_h, M))
    {
        est.H = oracle.full_hessian(x);
    }
    else
    {
        est.H = oracle.batch_hessian(x, est.batch_h);
    }
    return est;
}

Vector vr_gradient(const LogisticOracle& oracle, const Vector& x, const Vector& anchor,
                   const Vector& anchor_full_grad, std::span<const Index> batch)
{
    if (batch.empty())
    {
        throw Error("variance-reduced gradient needs a nonempty batch");
    }
    if (x.size() != oracle.dim() || anchor.size() != oracle.dim() || anchor_full_grad.size() != oracle.dim())
    {
        throw Error("dimension mismatch in variance-reduced gradient");
    }
    const Matrix& A = oracle.data();
    Vector correction = Vector::Zero(oracle.dim());
    for (const Index i : batch)
    {
        const double diff = sigmoid(A.row(i).dot(x)) - sigmoid(A.row(i).dot(anchor));
        correction += diff * A.row(i).transpose();
    }
    // Two component gradients per element, at x and at the anchor.
    oracle.add_grad_samples(2 * batch.size());
    return anchor_full_grad + correction / static_cast<double>(batch.size());
}

}  // namespace cdn
