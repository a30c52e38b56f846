#include <cstdio>
#include <filesystem>
#include <fstream>

#include <zlib.h>

#include "cdn/data_ingest.hpp"
#include "doctest.h"

using namespace cdn;

TEST_CASE("parses LIBSVM rows")
{
    const Dataset d = parse_libsvm_string("+1 1:0.5 3:-2\n\n-1 2:1e-3\n1 1:1 2:2 3:3\n");
    CHECK(d.n == 3);
    CHECK(d.M() == 3);
    CHECK(d.labels == std::vector<double>{1.0, -1.0, 1.0});
    CHECK(d.rows[0] == SparseRow{{1, 0.5}, {3, -2.0}});
    CHECK(d.rows[1] == SparseRow{{2, 1e-3}});
    const Matrix A = d.dense();
    CHECK(A(0, 2) == -2.0);
    CHECK(A(1, 0) == 0.0);
    const Matrix folded = d.dense(true);
    CHECK(folded(1, 1) == -1e-3);
    CHECK(folded(0, 0) == 0.5);
}

TEST_CASE("dimension override")
{
    CHECK(parse_libsvm_string("1 2:1\n", 5).n == 5);
    CHECK_THROWS_AS(parse_libsvm_string("1 7:1\n", 5), ParseError);
}

TEST_CASE("malformed input names the line")
{
    auto line_of = [](const std::string& text) {
        try
        {
            parse_libsvm_string(text);
        }
        catch (const ParseError& e)
        {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("1 1:1\nabc 1:2\n") == 2);
    CHECK(line_of("1 1:1\n1 0:2\n") == 2);
    CHECK(line_of("1 3:1 2:1\n") == 1);
    CHECK(line_of("1 2:1 2:1\n") == 1);
    CHECK(line_of("1 x:1\n") == 1);
    CHECK(line_of("1 1:nope\n") == 1);
    CHECK(line_of("1 11\n") == 1);
    CHECK_THROWS_WITH_AS(parse_libsvm_string("\n\n"), "empty dataset", ParseError);
}

TEST_CASE("write and parse round trip")
{
    const Dataset d = synth_logistic(20, 4, 3, 10.0);
    CHECK(parse_libsvm_string(write_libsvm(d), d.n) == d);
}

TEST_CASE("plain and gzip files load identically")
{
    const Dataset d = synth_logistic(15, 3, 1, 1.0);
    const std::string text = write_libsvm(d);
    const auto dir = std::filesystem::temp_directory_path() / "cdn_ingest_test";
    std::filesystem::create_directories(dir);
    const std::string plain = (dir / "data.txt").string();
    const std::string packed = (dir / "data.txt.gz").string();
    {
        std::ofstream out(plain);
        out << text;
    }
    gzFile gz = gzopen(packed.c_str(), "wb");
    REQUIRE(gz != nullptr);
    gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
    gzclose(gz);
    CHECK(load_libsvm(plain) == d);
    CHECK(load_libsvm(packed) == d);
    CHECK_THROWS_WITH_AS(load_libsvm((dir / "absent.txt").string()),
                         doctest::Contains("absent.txt"), Error);
}

TEST_CASE("synthetic data is seeded")
{
    const Dataset a = synth_logistic(50, 5, 7, 100.0);
    const Dataset b = synth_logistic(50, 5, 7, 100.0);
    const Dataset c = synth_logistic(50, 5, 8, 100.0);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    int positive = 0;
    for (const double y : a.labels)
    {
        CHECK((y == 1.0 || y == -1.0));
        positive += y > 0;
    }
    CHECK(positive > 0);
    CHECK(positive < 50);
    const auto scales = synth_scales(5, 100.0);
    CHECK(scales.front() == doctest::Approx(1.0));
    CHECK(scales.back() == doctest::Approx(100.0));
    CHECK(scales[2] == doctest::Approx(10.0));
    CHECK_THROWS_AS(synth_logistic(0, 3, 0), Error);
}
