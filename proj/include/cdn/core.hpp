#ifndef CDN_CORE_HPP_
#define CDN_CORE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cdn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/*
    Base class for every error raised by the library.
*/
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/*
    Scalar schedule producing the aggregation weights a_k, their partial
    sums A_k and the contracting coefficients gamma_k = a_{k+1} / A_{k+1}.

    PowerP(p):     A_k = k^p.
    Geometric(w):  A_0 = 0, A_k = (1 + 1/w)^k for k >= 1.
    Newton:        gamma_k = 1 for every k, the w -> 0 limit of Geometric
                   (A_k = a_k = +inf for k >= 1).

    All values come from closed forms; nothing is accumulated.
*/
class Schedule
{
public:
    enum class Kind
    {
        PowerP,
        Geometric,
        Newton
    };

    struct Coeffs
    {
        double a;
        double A;
        double gamma;
    };

    static Schedule power(int p);
    static Schedule geometric(double omega);
    static Schedule newton();

    Kind kind() const { return kind_; }
    int power_p() const { return p_; }
    double omega() const { return omega_; }

    // a_k (k >= 1; a_0 is reported as 0), A_k, and gamma_k.
    Coeffs coeffs(std::int64_t k) const;
    double a(std::int64_t k) const;
    double A(std::int64_t k) const;
    double gamma(std::int64_t k) const;

    std::string describe() const;

    bool operator==(const Schedule& other) const = default;

private:
    Schedule(Kind kind, int p, double omega) : kind_(kind), p_(p), omega_(omega) {}

    Kind kind_;
    int p_;
    double omega_;
};

// Largest power of two not exceeding k, with pi(0) = 0.
std::uint64_t pi(std::uint64_t k);

/*
    Counter-based pseudorandom stream. Every draw is a pure function of
    (seed, iteration, draw index): the SplitMix64 finalizer is applied to a
    key derived from the seed and the iteration, offset by the draw index.
    Sequences are therefore reproducible independently of evaluation order.
*/
class RandomStream
{
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Independent child stream, e.g. one per estimator.
    RandomStream derive(std::uint64_t tag) const;

    std::uint64_t bits(std::uint64_t iteration, std::uint64_t draw) const;
    // Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint64_t iteration, std::uint64_t draw) const;
    // Uniform in {0, ..., n - 1}; multiply-shift, bias below n / 2^64.
    std::uint64_t index(std::uint64_t iteration, std::uint64_t draw, std::uint64_t n) const;
    // Standard normal by Box-Muller; consumes draws 2*draw and 2*draw + 1.
    double normal(std::uint64_t iteration, std::uint64_t draw) const;

private:
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct TraceRow
{
    std::int64_t k = 0;
    double elapsed_s = 0.0;
    double F = 0.0;
    std::optional<double> cert;
    std::uint64_t grad_samples = 0;   // cumulative component gradient evaluations
    std::uint64_t hess_samples = 0;   // cumulative component Hessian evaluations
    std::uint64_t inner_iters = 0;    // subsolver iterations spent on this step

    bool operator==(const TraceRow& other) const = default;
};

/*
    Per-iteration record of one method run. Rows are strictly increasing
    in k with nondecreasing elapsed time; append() enforces both.
*/
class RunTrace
{
public:
    RunTrace() = default;
    explicit RunTrace(std::string method) : method_(std::move(method)) {}

    void append(const TraceRow& row);
    const std::vector<TraceRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }
    const TraceRow& back() const { return rows_.back(); }

    const std::string& method() const { return method_; }
    void set_method(std::string method) { method_ = std::move(method); }

    // Free-form run status ("max_iters", "certificate_tolerance", "subsolver_failure: ...").
    std::string status;
    std::uint64_t seed = 0;
    // Scalar side results: anchor refreshes, certificate time, sandwich violations, ...
    std::map<std::string, double> stats;
    // Optional copy of x_k per recorded row (MethodConfig::record_iterates).
    std::vector<Vector> iterates;

    std::string to_csv() const;
    std::string to_json() const;  // JSON array of row objects
    static RunTrace from_csv(const std::string& text);
    static RunTrace from_json(const std::string& text);

private:
    std::string method_;
    std::vector<TraceRow> rows_;
};

inline constexpr const char* kTraceCsvHeader = "k,elapsed_s,F,cert,grad_samples,hess_samples,inner_iters";

// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

}  // namespace cdn

#endif  // CDN_CORE_HPP_
