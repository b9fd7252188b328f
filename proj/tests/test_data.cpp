#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_support.hpp"
#include "wiae/data.hpp"
#include "wiae/errors.hpp"

using namespace wiae;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

double sample_mean(std::span<const double> xs) {
    double acc = 0.0;
    for (double v : xs) acc += v;
    return acc / static_cast<double>(xs.size());
}

double lag_autocorrelation(std::span<const double> xs, std::size_t lag) {
    const double mean = sample_mean(xs);
    double num = 0.0, den = 0.0;
    for (std::size_t i = lag; i < xs.size(); ++i) {
        num += (xs[i] - mean) * (xs[i - lag] - mean);
    }
    for (double v : xs) den += (v - mean) * (v - mean);
    return num / den;
}

}  // namespace

TEST_CASE("LAR generator matches its stationary moments") {
    GeneratorSpec spec{GeneratorKind::kLar, 1000000, 42};
    const SeriesDataset ds = gen_lar(spec);
    REQUIRE(ds.values.size() == spec.length);
    double var = 0.0;
    const double mean = sample_mean(ds.values);
    for (double v : ds.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(ds.values.size());
    CHECK(var == doctest::Approx(4.0 / 9.0).epsilon(0.02));
    CHECK(lag_autocorrelation(ds.values, 1) == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("MA generator matches its stationary moments") {
    GeneratorSpec spec{GeneratorKind::kMa, 1000000, 43};
    const SeriesDataset ds = gen_ma(spec);
    double var = 0.0;
    const double mean = sample_mean(ds.values);
    for (double v : ds.values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(ds.values.size());
    CHECK(var == doctest::Approx((1.0 + 6.25) / 3.0).epsilon(0.02));
    CHECK(std::fabs(lag_autocorrelation(ds.values, 2)) < 0.01);
}

TEST_CASE("degenerate driver produces all zeros") {
    const SeriesDataset lar = gen_lar_driven(100, 50, [] { return 0.0; });
    for (double v : lar.values) CHECK(v == 0.0);
    const SeriesDataset ma = gen_ma_driven(100, 50, [] { return 0.0; });
    for (double v : ma.values) CHECK(v == 0.0);
}

TEST_CASE("MC generator matches the transition matrix") {
    GeneratorSpec spec{GeneratorKind::kMc, 1000000, 44};
    const SeriesDataset ds = gen_mc(spec);
    double ones = 0.0;
    std::size_t stays = 0;
    for (std::size_t i = 0; i < ds.values.size(); ++i) {
        CHECK((ds.values[i] == 0.0 || ds.values[i] == 1.0));
        ones += ds.values[i];
        if (i > 0 && ds.values[i] == ds.values[i - 1]) ++stays;
    }
    CHECK(ones / static_cast<double>(ds.values.size()) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(static_cast<double>(stays) / static_cast<double>(ds.values.size() - 1) ==
          doctest::Approx(0.6).epsilon(0.0167));

    GeneratorSpec one{GeneratorKind::kMc, 1, 44};
    CHECK(gen_mc(one).values.size() == 1);
}

TEST_CASE("generators are deterministic and prefix-stable") {
    GeneratorSpec base{GeneratorKind::kLar, 500, 7};
    GeneratorSpec longer{GeneratorKind::kLar, 800, 7};
    const SeriesDataset a = gen_lar(base);
    const SeriesDataset b = gen_lar(base);
    const SeriesDataset c = gen_lar(longer);
    CHECK(a.values == b.values);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == c.values[i]);

    GeneratorSpec mc{GeneratorKind::kMc, 500, 7};
    GeneratorSpec mc_long{GeneratorKind::kMc, 800, 7};
    const SeriesDataset d = gen_mc(mc);
    const SeriesDataset e = gen_mc(mc_long);
    for (std::size_t i = 0; i < d.values.size(); ++i) CHECK(d.values[i] == e.values[i]);
}

TEST_CASE("csv round trip preserves values and period") {
    GeneratorSpec spec{GeneratorKind::kLar, 200, 9};
    spec.period_seconds = 300.0;
    const SeriesDataset ds = gen_lar(spec);
    const auto path = temp_file("wiae_test_roundtrip.csv");
    save_csv(ds, path, "config deadbeef");
    const SeriesDataset loaded = load_csv(path);
    CHECK(loaded.values == ds.values);
    CHECK(loaded.period_seconds == 300.0);
    std::filesystem::remove(path);
}

TEST_CASE("csv loader infers 5-minute and hourly periods") {
    const auto path = temp_file("wiae_test_period.csv");
    {
        std::ofstream out(path);
        out << "timestamp,value\n"
            << "2023-02-01T00:00:00Z,10.5\n"
            << "2023-02-01T00:05:00Z,11.5\n"
            << "2023-02-01T00:10:00Z,12.5\n";
    }
    CHECK(load_csv(path).period_seconds == 300.0);
    {
        std::ofstream out(path);
        out << "timestamp,value\n"
            << "2023-02-01T00:00:00Z,1\n"
            << "2023-02-01T01:00:00Z,2\n"
            << "2023-02-01T02:00:00Z,3\n";
    }
    CHECK(load_csv(path).period_seconds == 3600.0);
    std::filesystem::remove(path);
}

TEST_CASE("csv loader rejects malformed input with line numbers") {
    const auto path = temp_file("wiae_test_bad.csv");
    SUBCASE("empty file") {
        std::ofstream(path).close();
        CHECK_THROWS_AS(load_csv(path), ParseError);
    }
    SUBCASE("bad value with line number") {
        {
            std::ofstream out(path);
            out << "timestamp,value\n2023-02-01T00:00:00Z,oops\n";
        }
        CHECK_THROWS_WITH_AS(load_csv(path), doctest::Contains(":2"), ParseError);
    }
    SUBCASE("irregular spacing") {
        {
            std::ofstream out(path);
            out << "timestamp,value\n"
                << "2023-02-01T00:00:00Z,1\n"
                << "2023-02-01T00:05:00Z,2\n"
                << "2023-02-01T00:11:00Z,3\n";
        }
        CHECK_THROWS_AS(load_csv(path), FormatError);
    }
    SUBCASE("non-increasing timestamps") {
        {
            std::ofstream out(path);
            out << "timestamp,value\n"
                << "2023-02-01T00:05:00Z,1\n"
                << "2023-02-01T00:05:00Z,2\n";
        }
        CHECK_THROWS_AS(load_csv(path), FormatError);
    }
    SUBCASE("non-finite value") {
        {
            std::ofstream out(path);
            out << "timestamp,value\n2023-02-01T00:00:00Z,inf\n";
        }
        CHECK_THROWS_AS(load_csv(path), DataError);
    }
    std::filesystem::remove(path);
}

TEST_CASE("iso8601 parsing and formatting round trip") {
    CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_iso8601("2023-02-01T00:00:00Z") == 1675209600);
    CHECK(format_iso8601(1675209600) == "2023-02-01T00:00:00Z");
    CHECK(parse_iso8601(format_iso8601(1234567890)) == 1234567890);
    CHECK_THROWS_AS(parse_iso8601("2023-13-01T00:00:00Z"), ParseError);
    CHECK_THROWS_AS(parse_iso8601("not a date"), ParseError);
}

TEST_CASE("standardize round trips and uses only the training split") {
    GeneratorSpec spec{GeneratorKind::kLar, 2000, 11};
    SeriesDataset ds = gen_lar(spec);
    const StandardizedSeries st = standardize(ds);

    // train split has mean 0 and unit variance
    double mean = 0.0;
    for (std::size_t i = 0; i < ds.train_end; ++i) mean += st.values[i];
    mean /= static_cast<double>(ds.train_end);
    CHECK(std::fabs(mean) < 1e-12);
    double var = 0.0;
    for (std::size_t i = 0; i < ds.train_end; ++i) var += (st.values[i] - mean) * (st.values[i] - mean);
    var /= static_cast<double>(ds.train_end);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-9));

    const std::vector<double> back = destandardize(st.values, st.standardizer);
    for (std::size_t i = 0; i < ds.values.size(); ++i) {
        CHECK(std::fabs(back[i] - ds.values[i]) <= 1e-12 * std::max(1.0, std::fabs(ds.values[i])));
    }

    // leakage check: perturbing the test split leaves the transform unchanged
    SeriesDataset perturbed = ds;
    for (std::size_t i = perturbed.train_end; i < perturbed.values.size(); ++i) {
        perturbed.values[i] += 100.0;
    }
    const StandardizedSeries st2 = standardize(perturbed);
    CHECK(st2.standardizer.mean == st.standardizer.mean);
    CHECK(st2.standardizer.std == st.standardizer.std);

    SeriesDataset constant;
    constant.values.assign(100, 3.0);
    constant.train_end = 80;
    constant.name = "constant";
    CHECK_THROWS_AS(standardize(constant), DegenerateDataError);
}

TEST_CASE("make_blocks counts and newest-first convention") {
    SplitRng rng(12);
    const std::vector<double> series = rng.uniform_vector(100, -1.0, 1.0);
    CHECK(make_blocks(std::span<const double>(series).first(50), 50).size() == 1);
    CHECK(make_blocks(series, 50).size() == 51);

    const auto blocks = make_blocks(series, 5);
    REQUIRE(blocks.size() == 96);
    for (std::size_t j = 0; j < 5; ++j) CHECK(blocks[0][j] == series[4 - j]);
    for (std::size_t j = 0; j < 5; ++j) CHECK(blocks[95][j] == series[99 - j]);

    const std::vector<double> tiny(3, 1.0);
    CHECK_THROWS_AS(make_blocks(tiny, 5), InsufficientHistoryError);
}
