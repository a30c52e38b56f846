#ifndef CDN_ORACLES_HPP_
#define CDN_ORACLES_HPP_

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cdn/core.hpp"
#include "cdn/data_ingest.hpp"

namespace cdn {

struct Evaluation
{
    double f = 0.0;
    std::optional<Vector> grad;
    std::optional<Matrix> hess;
};

/*
    Smooth convex part f of the composite objective.
*/
class SmoothOracle
{
public:
    virtual ~SmoothOracle() = default;

    virtual Index dim() const = 0;
    // order 0: value; 1: value and gradient; 2: value, gradient and Hessian.
    virtual Evaluation evaluate(const Vector& x, int order) const = 0;

    double value(const Vector& x) const { return evaluate(x, 0).f; }
};

// log(1 + exp(t)), overflow-safe.
double log_one_exp(double t);
// 1 / (1 + exp(-t)), overflow-safe.
double sigmoid(double t);

/*
    f(x) = (1/M) sum_i log(1 + exp(<a_i, x>)).

    Component gradient/Hessian evaluations are counted (atomically); plain
    value evaluations are not.
*/
class LogisticOracle : public SmoothOracle
{
public:
    explicit LogisticOracle(Matrix A);
    LogisticOracle(const Dataset& data, bool label_fold);

    LogisticOracle(const LogisticOracle& other);

    Index dim() const override { return A_.cols(); }
    Index size() const { return A_.rows(); }
    const Matrix& data() const { return A_; }

    Evaluation evaluate(const Vector& x, int order) const override;

    // Averages over an index multiset (0-based, repeats allowed).
    Vector batch_gradient(const Vector& x, std::span<const Index> batch) const;
    Matrix batch_hessian(const Vector& x, std::span<const Index> batch) const;
    Vector component_gradient(Index i, const Vector& x) const;
    // Full-data Hessian; charges M Hessian samples and no gradient samples.
    Matrix full_hessian(const Vector& x) const;
    // Exact Hessian-vector product; used by finite-difference checks.
    Vector hessian_vector(const Vector& x, const Vector& u) const;

    // Upper bounds on the per-component Lipschitz constants of f_i, grad f_i
    // and Hess f_i averaged over components (Euclidean norm).
    struct Constants
    {
        double L0;
        double L1;
        double L2;
    };
    Constants constants() const;

    std::uint64_t grad_samples() const { return grad_samples_.load(); }
    std::uint64_t hess_samples() const { return hess_samples_.load(); }
    void reset_counters() const;

    // Counts samples taken outside evaluate/batch_* (e.g. fused variance-reduced passes).
    void add_grad_samples(std::uint64_t count) const { grad_samples_ += count; }

private:
    void Validate(const Vector& x) const;
    Matrix HessianFromSigmoids(const Vector& s) const;

    Matrix A_;
    Vector row_norms_;
    mutable std::atomic<std::uint64_t> grad_samples_{0};
    mutable std::atomic<std::uint64_t> hess_samples_{0};
};

/*
    f(x) = 1/2 <Ax, x> - <b, x> with symmetric PSD A. Hessian is constant,
    so the Hessian-Lipschitz constant is 0.
*/
class QuadraticOracle : public SmoothOracle
{
public:
    QuadraticOracle(Matrix A, Vector b);

    Index dim() const override { return b_.size(); }
    Evaluation evaluate(const Vector& x, int order) const override;

    const Matrix& matrix() const { return A_; }
    const Vector& linear() const { return b_; }

private:
    Matrix A_;
    Vector b_;
};

struct SamplingPolicy
{
    bool with_replacement = true;
    // When the requested size reaches M, use the exhaustive batch {0..M-1}.
    bool cap_at_M = true;
};

struct StochEstimate
{
    Vector g;
    Matrix H;
    std::vector<Index> batch_g;
    std::vector<Index> batch_h;
};

// Batch size min(ceil(1 / gamma^power), M) when capped.
Index batch_size(double gamma, int power, Index M, bool cap_at_M);

/*
    Index multiset of the requested size drawn from `stream` at `iteration`.
    Exhaustive {0..M-1} when size >= M and the cap policy is on.
*/
std::vector<Index> sample_batch(Index M, Index size, const RandomStream& stream, std::uint64_t iteration,
                                const SamplingPolicy& policy);

/*
    Basic estimators: batch-averaged component gradients and Hessians at x
    on two independent index multisets of sizes m_g and m_h.
*/
StochEstimate sample_basic_estimators(const LogisticOracle& oracle, const Vector& x, Index m_g, Index m_h,
                                      const RandomStream& stream, std::uint64_t iteration,
                                      const SamplingPolicy& policy = {});

/*
    Variance-reduced gradient
        (1/m) sum_{i in batch} (grad f_i(x) - grad f_i(z) + grad f(z)).
    Charges two gradient samples per batch element.
*/
Vector vr_gradient(const LogisticOracle& oracle, const Vector& x, const Vector& anchor,
                   const Vector& anchor_full_grad, std::span<const Index> batch);

}  // namespace cdn

#endif  // CDN_ORACLES_HPP_
