#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "wiae/errors.hpp"
#include "wiae/evaluation.hpp"
#include "wiae/rng.hpp"

using namespace wiae;
using test::rel_err;

// ---------------------------------------------------------------------------
// Independent direct-formula oracles, written from the metric definitions with
// plain loops. These deliberately share no code with the library.
// ---------------------------------------------------------------------------
namespace oracle {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double nmse(const std::vector<double>& x, const std::vector<double>& xhat) {
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        num += (x[t] - xhat[t]) * (x[t] - xhat[t]);
        den += x[t] * x[t];
    }
    return (num / x.size()) / (den / x.size());
}

double nmese(const std::vector<double>& x, const std::vector<double>& xhat) {
    double den = 0.0;
    for (double v : x) den += v * v;
    den /= x.size();
    std::vector<double> terms;
    for (std::size_t t = 0; t < x.size(); ++t) {
        terms.push_back((x[t] - xhat[t]) * (x[t] - xhat[t]) / den);
    }
    return median(terms);
}

double nmae(const std::vector<double>& x, const std::vector<double>& xhat) {
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        num += std::fabs(x[t] - xhat[t]);
        den += std::fabs(x[t]);
    }
    return (num / x.size()) / (den / x.size());
}

double nmeae(const std::vector<double>& x, const std::vector<double>& xhat) {
    double den = 0.0;
    for (double v : x) den += std::fabs(v);
    den /= x.size();
    std::vector<double> terms;
    for (std::size_t t = 0; t < x.size(); ++t) terms.push_back(std::fabs(x[t] - xhat[t]) / den);
    return median(terms);
}

double mase(const std::vector<double>& x, const std::vector<double>& xhat, std::size_t s) {
    double num = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) num += std::fabs(x[t] - xhat[t]);
    num /= x.size();
    double den = 0.0;
    for (std::size_t t = s; t < x.size(); ++t) den += std::fabs(x[t] - x[t - s]);
    den /= static_cast<double>(x.size() - s);
    return num / den;
}

double smape(const std::vector<double>& x, const std::vector<double>& xhat) {
    double acc = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double den = (std::fabs(x[t]) + std::fabs(xhat[t])) / 2.0;
        if (den > 0.0) acc += std::fabs(x[t] - xhat[t]) / den;
    }
    return acc / x.size();
}

double crps_direct(const std::vector<double>& samples, double obs) {
    const double s = static_cast<double>(samples.size());
    double first = 0.0;
    for (double v : samples) first += std::fabs(v - obs);
    first /= s;
    double second = 0.0;
    for (double a : samples) {
        for (double b : samples) second += std::fabs(a - b);
    }
    return first - second / (2.0 * s * s);
}

double ecdf_at(const std::vector<double>& errors, double t) {
    double count = 0.0;
    for (double e : errors) {
        if (e <= t) count += 1.0;
    }
    return count / static_cast<double>(errors.size());
}

}  // namespace oracle

TEST_CASE("perfect forecast zeroes every point metric") {
    const std::vector<double> truth{1.0, -2.0, 3.5, 0.25, -1.0};
    const MetricReport r = point_metrics(truth, truth, 1);
    CHECK(r.values.at("NMSE") == 0.0);
    CHECK(r.values.at("NMeSE") == 0.0);
    CHECK(r.values.at("NMAE") == 0.0);
    CHECK(r.values.at("NMeAE") == 0.0);
    CHECK(r.values.at("MASE") == 0.0);
    CHECK(r.values.at("sMAPE") == 0.0);
}

TEST_CASE("hand-computed metric cases") {
    SUBCASE("NMSE of [1,2] vs [0,0] is exactly 1") {
        const std::vector<double> truth{1.0, 2.0};
        const std::vector<double> zero{0.0, 0.0};
        const MetricReport r = point_metrics(truth, zero, 1);
        CHECK(r.values.at("NMSE") == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(r.values.at("NMAE") == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(r.values.at("sMAPE") == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("naive forecaster scores MASE exactly 1") {
        const std::vector<double> truth{1.0, 2.0, 3.0, 4.0};
        const std::vector<double> naive{0.0, 1.0, 2.0, 3.0};  // x_{t-1} with x_0 = 0
        const MetricReport r = point_metrics(truth, naive, 1);
        CHECK(r.values.at("MASE") == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("metrics reject undefined denominators by name") {
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    const std::vector<double> anything{1.0, 2.0, 3.0};
    CHECK_THROWS_WITH_AS(point_metrics(zeros, anything, 1), doctest::Contains("NMSE"),
                         UndefinedMetricError);
    const std::vector<double> constant{2.0, 2.0, 2.0};
    CHECK_THROWS_WITH_AS(point_metrics(constant, anything, 1), doctest::Contains("MASE"),
                         UndefinedMetricError);
    CHECK_THROWS_AS(point_metrics(anything, anything, 5), UndefinedMetricError);  // N <= s
}

TEST_CASE("all seven metrics match the direct-formula oracles on random instances") {
    SplitRng rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 6 + rng.next_index(60);
        std::vector<double> truth = rng.uniform_vector(n, -3.0, 3.0);
        std::vector<double> forecast = rng.uniform_vector(n, -3.0, 3.0);
        const std::size_t s = 1 + rng.next_index(std::min<std::size_t>(4, n - 1));
        const MetricReport r = point_metrics(truth, forecast, s);
        CHECK(rel_err(r.values.at("NMSE"), oracle::nmse(truth, forecast), 1e-9) <= 1e-12);
        CHECK(rel_err(r.values.at("NMeSE"), oracle::nmese(truth, forecast), 1e-9) <= 1e-12);
        CHECK(rel_err(r.values.at("NMAE"), oracle::nmae(truth, forecast), 1e-9) <= 1e-12);
        CHECK(rel_err(r.values.at("NMeAE"), oracle::nmeae(truth, forecast), 1e-9) <= 1e-12);
        CHECK(rel_err(r.values.at("MASE"), oracle::mase(truth, forecast, s), 1e-9) <= 1e-12);
        CHECK(rel_err(r.values.at("sMAPE"), oracle::smape(truth, forecast), 1e-9) <= 1e-12);

        const std::vector<double> samples = rng.uniform_vector(1 + rng.next_index(40), -2.0, 2.0);
        const double obs = rng.next_uniform(-2.0, 2.0);
        CHECK(rel_err(crps(samples, obs), oracle::crps_direct(samples, obs), 1e-9) <= 1e-12);
    }
}

TEST_CASE("metric scale properties") {
    SplitRng rng(405);
    const std::size_t n = 40;
    std::vector<double> truth = rng.uniform_vector(n, -3.0, 3.0);
    std::vector<double> forecast = rng.uniform_vector(n, -3.0, 3.0);
    const MetricReport base = point_metrics(truth, forecast, 2);

    const double c = 7.25;
    std::vector<double> truth_scaled(truth), forecast_scaled(forecast);
    for (double& v : truth_scaled) v *= c;
    for (double& v : forecast_scaled) v *= c;
    const MetricReport scaled = point_metrics(truth_scaled, forecast_scaled, 2);
    for (const char* name : {"NMSE", "NMAE", "sMAPE", "MASE"}) {
        CHECK(rel_err(base.values.at(name), scaled.values.at(name), 1e-9) <= 1e-12);
    }

    const std::vector<double> samples = rng.uniform_vector(25, -2.0, 2.0);
    std::vector<double> samples_scaled(samples);
    for (double& v : samples_scaled) v *= c;
    CHECK(rel_err(crps(samples_scaled, c * 0.3), c * crps(samples, 0.3), 1e-9) <= 1e-12);
}

TEST_CASE("crps closed-form cases") {
    SUBCASE("point mass at the observation scores zero") {
        const std::vector<double> samples{1.5, 1.5, 1.5};
        CHECK(crps(samples, 1.5) == 0.0);
    }
    SUBCASE("single sample gives the absolute error exactly") {
        const std::vector<double> one{2.0};
        CHECK(crps(one, 0.5) == doctest::Approx(1.5).epsilon(1e-15));
    }
    SUBCASE("two-sample hand cases") {
        const std::vector<double> samples{0.0, 1.0};
        CHECK(crps(samples, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(crps(samples, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    }
}

TEST_CASE("sMAPE stays within [0, 2]") {
    SplitRng rng(406);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng.next_index(30);
        std::vector<double> truth = rng.uniform_vector(n, -5.0, 5.0);
        std::vector<double> forecast = rng.uniform_vector(n, -5.0, 5.0);
        truth[0] = 1.0;  // keep denominators defined
        const MetricReport r = point_metrics(truth, forecast, 1);
        CHECK(r.values.at("sMAPE") >= 0.0);
        CHECK(r.values.at("sMAPE") <= 2.0);
    }
}

TEST_CASE("outlier filter boundary and spike cases") {
    SUBCASE("constant series keeps everything") {
        const std::vector<double> constant(10, 4.0);
        const OutlierFilterResult r = filter_outliers(constant, {});
        CHECK(r.excluded == 0);
        CHECK(r.truth.size() == 10);
    }
    SUBCASE("exactly three sigma is kept (strict inequality)") {
        std::vector<double> series(10, 0.0);
        series[9] = 100.0;  // mean 10, std 30, |100-10| = 90 = 3*sigma
        const OutlierFilterResult r = filter_outliers(series, {});
        CHECK(r.excluded == 0);
    }
    SUBCASE("a ten-sigma spike is excluded, companions aligned") {
        SplitRng rng(407);
        std::vector<double> series = rng.uniform_vector(200, -1.0, 1.0);
        series[57] = 40.0;
        std::vector<double> companion(series.size());
        for (std::size_t i = 0; i < series.size(); ++i) companion[i] = static_cast<double>(i);
        const OutlierFilterResult r = filter_outliers(series, {companion});
        CHECK(r.excluded == 1);
        REQUIRE(r.truth.size() == 199);
        for (double v : r.truth) CHECK(v != 40.0);
        CHECK(std::find(r.companions[0].begin(), r.companions[0].end(), 57.0) ==
              r.companions[0].end());
    }
    SUBCASE("error basis filters on |truth - forecast|") {
        std::vector<double> truth(100, 0.0);
        std::vector<double> forecast(100, 0.0);
        forecast[3] = 50.0;  // one huge error
        const OutlierFilterResult r = filter_outliers(truth, {forecast}, OutlierBasis::kError);
        CHECK(r.excluded == 1);
        CHECK(r.companions[0].size() == 99);
    }
}

TEST_CASE("ecdf matches the counting definition") {
    const std::vector<double> errors{1.0, 2.0, 3.0};
    const auto curve = ecdf(errors);
    REQUIRE(curve.size() == 3);
    CHECK(curve[1].first == 2.0);
    CHECK(curve[1].second == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(curve.back().second == 1.0);

    SplitRng rng(408);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> data = rng.uniform_vector(1 + rng.next_index(50), -1.0, 1.0);
        const auto c = ecdf(data);
        CHECK(c.back().second == 1.0);
        for (const auto& [t, p] : c) {
            CHECK(rel_err(p, oracle::ecdf_at(data, t), 1e-9) <= 1e-12);
        }
        // below the minimum the cdf is zero
        CHECK(oracle::ecdf_at(data, c.front().first - 1.0) == 0.0);
    }
}

TEST_CASE("duplicate values collapse to one ecdf step") {
    const std::vector<double> errors{2.0, 1.0, 2.0, 2.0};
    const auto curve = ecdf(errors);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0] == std::pair<double, double>{1.0, 0.25});
    CHECK(curve[1] == std::pair<double, double>{2.0, 1.0});
}

TEST_CASE("median convention for even counts") {
    std::vector<double> a{0.0, 1.0, 1.0, 2.0};
    CHECK(median_inplace(a) == 1.0);
    std::vector<double> b{0.0, 2.0};
    CHECK(median_inplace(b) == 1.0);
}
