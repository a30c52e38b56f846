#ifndef CDN_DATA_INGEST_HPP_
#define CDN_DATA_INGEST_HPP_

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdn/core.hpp"

namespace cdn {

// (1-based feature index, value), strictly increasing in index.
using SparseRow = std::vector<std::pair<int, double>>;

struct Dataset
{
    int n = 0;
    std::vector<SparseRow> rows;
    std::vector<double> labels;

    Index M() const { return static_cast<Index>(rows.size()); }

    // Dense M x n feature matrix; with label_fold each row is multiplied by its label.
    Matrix dense(bool label_fold = false) const;

    bool operator==(const Dataset& other) const = default;
};

class ParseError : public Error
{
public:
    ParseError(int line, const std::string& message)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line)
    {
    }
    int line() const { return line_; }

private:
    int line_;
};

/*
    Parses LIBSVM text: `label idx:val idx:val ...` per line, 1-based and
    strictly increasing indices. Blank lines are skipped. n is the largest
    index seen unless n_override is given (it must cover every index).
*/
Dataset parse_libsvm(std::istream& in, std::optional<int> n_override = std::nullopt);
Dataset parse_libsvm_string(const std::string& text, std::optional<int> n_override = std::nullopt);

// Reads a local file, plain or gzip-compressed (detected by magic bytes).
Dataset load_libsvm(const std::string& path, std::optional<int> n_override = std::nullopt);

std::string write_libsvm(const Dataset& data);

/*
    Seeded synthetic logistic-regression instance. Features are Gaussian
    with coordinate j scaled by conditioning^(j / (n - 1)), so scales span
    [1, conditioning]. Labels in {-1, +1} come from a planted model with
    logistic noise. Deterministic in the seed.
*/
Dataset synth_logistic(Index M, int n, std::uint64_t seed, double conditioning = 1.0);

// Per-coordinate scales used by synth_logistic.
std::vector<double> synth_scales(int n, double conditioning);

}  // namespace cdn

#endif  // CDN_DATA_INGEST_HPP_
