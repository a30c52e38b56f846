#include "cdn/core.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace cdn {

namespace {

const double INF = std::numeric_limits<double>::infinity();

// 1 - (k / (k + 1))^p without cancellation.
double OneMinusRatioPower(double k, int p)
{
    return -std::expm1(p * std::log1p(-1.0 / (k + 1.0)));
}

}  // namespace

Schedule Schedule::power(int p)
{
    if (p < 1)
    {
        throw Error("power schedule requires p >= 1");
    }
    return Schedule(Kind::PowerP, p, 0.0);
}

Schedule Schedule::geometric(double omega)
{
    if (!(omega > 0.0) || !std::isfinite(omega))
    {
        throw Error("geometric schedule requires a finite omega > 0");
    }
    return Schedule(Kind::Geometric, 0, omega);
}

Schedule Schedule::newton()
{
    return Schedule(Kind::Newton, 0, 0.0);
}

double Schedule::A(std::int64_t k) const
{
    if (k < 0)
    {
        throw Error("schedule index must be nonnegative");
    }
    if (k == 0)
    {
        return 0.0;
    }
    switch (kind_)
    {
    case Kind::PowerP:
        return std::pow(static_cast<double>(k), p_);
    case Kind::Geometric:
        return std::pow(1.0 + 1.0 / omega_, static_cast<double>(k));
    case Kind::Newton:
        return INF;
    }
    return 0.0;
}

double Schedule::a(std::int64_t k) const
{
    if (k < 0)
    {
        throw Error("schedule index must be nonnegative");
    }
    if (k == 0)
    {
        return 0.0;
    }
    switch (kind_)
    {
    case Kind::PowerP:
        // a_k = A_k * (1 - ((k-1)/k)^p)
        return A(k) * OneMinusRatioPower(static_cast<double>(k - 1), p_);
    case Kind::Geometric:
        return k == 1 ? A(1) : A(k - 1) / omega_;
    case Kind::Newton:
        return INF;
    }
    return 0.0;
}

double Schedule::gamma(std::int64_t k) const
{
    if (k < 0)
    {
        throw Error("schedule index must be nonnegative");
    }
    if (k == 0)
    {
        return 1.0;
    }
    switch (kind_)
    {
    case Kind::PowerP:
        return OneMinusRatioPower(static_cast<double>(k), p_);
    case Kind::Geometric:
        return 1.0 / (1.0 + omega_);
    case Kind::Newton:
        return 1.0;
    }
    return 1.0;
}

Schedule::Coeffs Schedule::coeffs(std::int64_t k) const
{
    return {a(k), A(k), gamma(k)};
}

std::string Schedule::describe() const
{
    switch (kind_)
    {
    case Kind::PowerP:
        return "power(" + std::to_string(p_) + ")";
    case Kind::Geometric:
        return "geometric(" + format_double(omega_) + ")";
    case Kind::Newton:
        return "newton";
    }
    return "";
}

std::uint64_t pi(std::uint64_t k)
{
    return std::bit_floor(k);
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RandomStream RandomStream::derive(std::uint64_t tag) const
{
    return RandomStream(splitmix64(seed_ ^ splitmix64(tag + 0x632BE59BD9B4E019ULL)));
}

std::uint64_t RandomStream::bits(std::uint64_t iteration, std::uint64_t draw) const
{
    const std::uint64_t key = splitmix64(seed_ + splitmix64(iteration));
    return splitmix64(key + 0x9E3779B97F4A7C15ULL * draw);
}

double RandomStream::uniform(std::uint64_t iteration, std::uint64_t draw) const
{
    return static_cast<double>(bits(iteration, draw) >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::index(std::uint64_t iteration, std::uint64_t draw, std::uint64_t n) const
{
    const unsigned __int128 product =
        static_cast<unsigned __int128>(bits(iteration, draw)) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(product >> 64);
}

double RandomStream::normal(std::uint64_t iteration, std::uint64_t draw) const
{
    // 1 - u keeps the logarithm argument in (0, 1].
    const double u1 = 1.0 - uniform(iteration, 2 * draw);
    const double u2 = uniform(iteration, 2 * draw + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string format_double(double value)
{
    if (std::isnan(value))
    {
        return "nan";
    }
    if (std::isinf(value))
    {
        return value > 0 ? "inf" : "-inf";
    }
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

void RunTrace::append(const TraceRow& row)
{
    if (!rows_.empty())
    {
        if (row.k <= rows_.back().k)
        {
            throw Error("trace rows must be strictly increasing in k");
        }
        if (row.elapsed_s < rows_.back().elapsed_s)
        {
            throw Error("trace elapsed time must be nondecreasing");
        }
    }
    rows_.push_back(row);
}

std::string RunTrace::to_csv() const
{
    std::ostringstream out;
    out << kTraceCsvHeader << "\n";
    for (const auto& row : rows_)
    {
        out << row.k << ","
            << format_double(row.elapsed_s) << ","
            << format_double(row.F) << ","
            << (row.cert ? format_double(*row.cert) : std::string()) << ","
            << row.grad_samples << ","
            << row.hess_samples << ","
            << row.inner_iters << "\n";
    }
    return out.str();
}

std::string RunTrace::to_json() const
{
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : rows_)
    {
        nlohmann::ordered_json item;
        item["k"] = row.k;
        item["elapsed_s"] = row.elapsed_s;
        item["F"] = row.F;
        item["cert"] = row.cert ? nlohmann::ordered_json(*row.cert) : nlohmann::ordered_json(nullptr);
        item["grad_samples"] = row.grad_samples;
        item["hess_samples"] = row.hess_samples;
        item["inner_iters"] = row.inner_iters;
        rows.push_back(std::move(item));
    }
    return rows.dump(1);
}

namespace {

double ParseDouble(const std::string& token, int line)
{
    if (token == "inf")
    {
        return INF;
    }
    if (token == "-inf")
    {
        return -INF;
    }
    if (token == "nan")
    {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double value = 0.0;
    const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
    if (result.ec != std::errc() || result.ptr != token.data() + token.size())
    {
        throw Error("trace line " + std::to_string(line) + ": bad number '" + token + "'");
    }
    return value;
}

template <class Int>
Int ParseInt(const std::string& token, int line)
{
    Int value = 0;
    const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
    if (result.ec != std::errc() || result.ptr != token.data() + token.size())
    {
        throw Error("trace line " + std::to_string(line) + ": bad integer '" + token + "'");
    }
    return value;
}

}  // namespace

RunTrace RunTrace::from_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
    {
        throw Error("trace CSV is empty");
    }
    if (!line.empty() && line.back() == '\r')
    {
        line.pop_back();
    }
    if (line != kTraceCsvHeader)
    {
        throw Error("trace CSV header mismatch: expected '" + std::string(kTraceCsvHeader) + "'");
    }
    RunTrace trace;
    int line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty())
        {
            continue;
        }
        std::vector<std::string> fields;
        std::string field;
        std::istringstream fs(line);
        while (std::getline(fs, field, ','))
        {
            fields.push_back(field);
        }
        if (line.back() == ',')
        {
            fields.emplace_back();
        }
        if (fields.size() != 7)
        {
            throw Error("trace line " + std::to_string(line_no) + ": expected 7 fields");
        }
        TraceRow row;
        row.k = ParseInt<std::int64_t>(fields[0], line_no);
        row.elapsed_s = ParseDouble(fields[1], line_no);
        row.F = ParseDouble(fields[2], line_no);
        if (!fields[3].empty())
        {
            row.cert = ParseDouble(fields[3], line_no);
        }
        row.grad_samples = ParseInt<std::uint64_t>(fields[4], line_no);
        row.hess_samples = ParseInt<std::uint64_t>(fields[5], line_no);
        row.inner_iters = ParseInt<std::uint64_t>(fields[6], line_no);
        trace.append(row);
    }
    return trace;
}

RunTrace RunTrace::from_json(const std::string& text)
{
    const auto rows = nlohmann::json::parse(text);
    if (!rows.is_array())
    {
        throw Error("trace JSON must be an array of rows");
    }
    RunTrace trace;
    for (const auto& item : rows)
    {
        TraceRow row;
        row.k = item.at("k").get<std::int64_t>();
        row.elapsed_s = item.at("elapsed_s").get<double>();
        row.F = item.at("F").get<double>();
        if (item.contains("cert") && !item.at("cert").is_null())
        {
            row.cert = item.at("cert").get<double>();
        }
        row.grad_samples = item.at("grad_samples").get<std::uint64_t>();
        row.hess_samples = item.at("hess_samples").get<std::uint64_t>();
        row.inner_iters = item.at("inner_iters").get<std::uint64_t>();
        trace.append(row);
    }
    return trace;
}

}  // namespace cdn
