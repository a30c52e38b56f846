#include "cdn/data_ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <zlib.h>

namespace cdn {

Matrix Dataset::dense(bool label_fold) const
{
    Matrix A = Matrix::Zero(M(), n);
    for (Index i = 0; i < M(); ++i)
    {
        const double scale = (label_fold && i < static_cast<Index>(labels.size())) ? labels[i] : 1.0;
        for (const auto& [index, value] : rows[i])
        {
            A(i, index - 1) = scale * value;
        }
    }
    return A;
}

namespace {

bool ParseReal(std::string_view token, double* value)
{
    // from_chars rejects a leading '+', which LIBSVM labels commonly carry.
    if (!token.empty() && token.front() == '+')
    {
        token.remove_prefix(1);
    }
    const auto result = std::from_chars(token.data(), token.data() + token.size(), *value);
    return result.ec == std::errc() && result.ptr == token.data() + token.size() && std::isfinite(*value);
}

}  // namespace

Dataset parse_libsvm(std::istream& in, std::optional<int> n_override)
{
    Dataset data;
    std::string line;
    int line_no = 0;
    int max_index = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        std::istringstream tokens(line);
        std::string token;
        if (!(tokens >> token))
        {
            continue;
        }
        double label = 0.0;
        if (!ParseReal(token, &label))
        {
            throw ParseError(line_no, "non-numeric label '" + token + "'");
        }
        SparseRow row;
        while (tokens >> token)
        {
            const auto colon = token.find(':');
            if (colon == std::string::npos)
            {
                throw ParseError(line_no, "expected idx:val, got '" + token + "'");
            }
            const std::string_view idx_text(token.data(), colon);
            const std::string_view val_text(token.data() + colon + 1, token.size() - colon - 1);
            long long index = 0;
            const auto idx_result = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), index);
            if (idx_result.ec != std::errc() || idx_result.ptr != idx_text.data() + idx_text.size())
            {
                throw ParseError(line_no, "non-numeric index '" + std::string(idx_text) + "'");
            }
            if (index <= 0 || index > std::numeric_limits<int>::max())
            {
                throw ParseError(line_no, "index must be a positive integer, got " + std::string(idx_text));
            }
            double value = 0.0;
            if (!ParseReal(val_text, &value))
            {
                throw ParseError(line_no, "non-numeric value '" + std::string(val_text) + "'");
            }
            if (!row.empty() && index <= row.back().first)
            {
                throw ParseError(line_no, "indices must be strictly increasing");
            }
            row.emplace_back(static_cast<int>(index), value);
            max_index = std::max(max_index, static_cast<int>(index));
        }
        data.rows.push_back(std::move(row));
        data.labels.push_back(label);
    }
    if (data.rows.empty())
    {
        throw ParseError(0, "empty dataset");
    }
    if (n_override)
    {
        if (*n_override < max_index)
        {
            throw ParseError(0, "dimension override " + std::to_string(*n_override) +
                                    " is smaller than the largest index " + std::to_string(max_index));
        }
        data.n = *n_override;
    }
    else
    {
        data.n = max_index;
    }
    if (data.n < 1)
    {
        throw ParseError(0, "dataset has no features");
    }
    return data;
}

Dataset parse_libsvm_string(const std::string& text, std::optional<int> n_override)
{
    std::istringstream in(text);
    return parse_libsvm(in, n_override);
}

Dataset load_libsvm(const std::string& path, std::optional<int> n_override)
{
    std::ifstream probe(path, std::ios::binary);
    if (!probe)
    {
        throw Error("cannot open dataset file: " + path);
    }
    unsigned char magic[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(magic), 2);
    const bool gzipped = probe.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
    probe.close();

    if (!gzipped)
    {
        std::ifstream in(path);
        return parse_libsvm(in, n_override);
    }

    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr)
    {
        throw Error("cannot open gzip dataset file: " + path);
    }
    std::string text;
    char buffer[1 << 16];
    int count = 0;
    while ((count = gzread(file, buffer, sizeof(buffer))) > 0)
    {
        text.append(buffer, static_cast<std::size_t>(count));
    }
    const bool failed = count < 0;
    gzclose(file);
    if (failed)
    {
        throw Error("gzip decompression failed: " + path);
    }
    return parse_libsvm_string(text, n_override);
}

std::string write_libsvm(const Dataset& data)
{
    std::ostringstream out;
    for (Index i = 0; i < data.M(); ++i)
    {
        const double label = i < static_cast<Index>(data.labels.size()) ? data.labels[i] : 0.0;
        out << format_double(label);
        for (const auto& [index, value] : data.rows[i])
        {
            out << ' ' << index << ':' << format_double(value);
        }
        out << '\n';
    }
    return out.str();
}

std::vector<double> synth_scales(int n, double conditioning)
{
    std::vector<double> scales(n, 1.0);
    for (int j = 0; j < n && n > 1; ++j)
    {
        scales[j] = std::pow(conditioning, static_cast<double>(j) / (n - 1));
    }
    return scales;
}

Dataset synth_logistic(Index M, int n, std::uint64_t seed, double conditioning)
{
    if (M < 1 || n < 1)
    {
        throw Error("synth_logistic requires M >= 1 and n >= 1");
    }
    if (!(conditioning > 0.0))
    {
        throw Error("synth_logistic requires conditioning > 0");
    }
    const RandomStream features = RandomStream(seed).derive(1);
    const RandomStream planted = RandomStream(seed).derive(2);
    const RandomStream noise = RandomStream(seed).derive(3);
    const auto scales = synth_scales(n, conditioning);

    std::vector<double> w(n);
    double w_norm = 0.0;
    for (int j = 0; j < n; ++j)
    {
        w[j] = planted.normal(0, j);
        w_norm += w[j] * w[j];
    }
    w_norm = std::sqrt(w_norm);

    Dataset data;
    data.n = n;
    data.rows.resize(M);
    data.labels.resize(M);
    for (Index i = 0; i < M; ++i)
    {
        SparseRow row;
        row.reserve(n);
        double margin = 0.0;
        for (int j = 0; j < n; ++j)
        {
            const double value = scales[j] * features.normal(i, j);
            row.emplace_back(j + 1, value);
            margin += value * w[j] / (w_norm * scales[j]);
        }
        const double u = noise.uniform(i, 0);
        data.labels[i] = (u < 1.0 / (1.0 + std::exp(-2.0 * margin))) ? 1.0 : -1.0;
        data.rows[i] = std::move(row);
    }
    return data;
}

}  // namespace cdn
