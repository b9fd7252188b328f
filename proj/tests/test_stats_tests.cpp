#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "wiae/errors.hpp"
#include "wiae/rng.hpp"
#include "wiae/stats_tests.hpp"

using namespace wiae;
using test::rel_err;

TEST_CASE("runs count examples") {
    SUBCASE("monotone sequence is one run") {
        const std::vector<double> seq{1, 2, 3, 4};
        const auto [r, n] = runs_up_down_count(seq);
        CHECK(r == 1);
        CHECK(n == 4);
    }
    SUBCASE("alternating sequence enumerated by hand") {
        const std::vector<double> seq{1, 3, 2, 4, 3};  // signs +,-,+,-
        const auto [r, n] = runs_up_down_count(seq);
        CHECK(r == 4);
        CHECK(n == 5);
    }
    SUBCASE("ties are dropped before counting") {
        const std::vector<double> seq{1, 1, 2};
        const auto [r, n] = runs_up_down_count(seq);
        CHECK(r == 1);
        CHECK(n == 2);
    }
    SUBCASE("degenerate sequences are rejected") {
        const std::vector<double> constant{2, 2, 2};
        CHECK_THROWS_AS(runs_up_down_count(constant), DegenerateSequenceError);
        const std::vector<double> single{1};
        CHECK_THROWS_AS(runs_up_down_count(single), DegenerateSequenceError);
    }
}

TEST_CASE("runs test moments and tails") {
    SUBCASE("expected runs for N=9 is 17/3") {
        const auto [mean, variance] = runs_moments(9);
        CHECK(mean == doctest::Approx(17.0 / 3.0).epsilon(1e-15));
        CHECK(variance == doctest::Approx((16.0 * 9 - 29) / 90.0).epsilon(1e-15));
    }
    SUBCASE("a strictly monotone length-100 sequence is strongly rejected") {
        std::vector<double> seq(100);
        for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = static_cast<double>(i);
        const RunsTestReport report = runs_test(seq);
        CHECK(report.runs == 1);
        CHECK(report.z < -3.0);
        CHECK(report.p_two_sided < 0.001);
    }
    SUBCASE("short sequences hit the small-sample guard") {
        std::vector<double> seq{1, 2, 1, 3, 2, 4};
        CHECK_THROWS_AS(runs_test(seq), SmallSampleError);
    }
}

TEST_CASE("runs test calibration on i.i.d. uniform sequences") {
    SplitRng rng(1234);
    const int trials = 1000;
    int rejections = 0;
    for (int t = 0; t < trials; ++t) {
        const std::vector<double> seq = rng.uniform_vector(1000, -1.0, 1.0);
        if (runs_test(seq).p_two_sided < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / trials;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
}

TEST_CASE("runs test p-value is invariant under strictly monotone transforms") {
    SplitRng rng(77);
    const std::vector<double> seq = rng.uniform_vector(400, -1.0, 1.0);
    const double p0 = runs_test(seq).p_two_sided;

    std::vector<double> cubed(seq.size()), shifted(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        cubed[i] = seq[i] * seq[i] * seq[i];
        shifted[i] = 10.0 * seq[i] - 4.0;
    }
    CHECK(runs_test(cubed).p_two_sided == p0);
    CHECK(runs_test(shifted).p_two_sided == p0);
}

TEST_CASE("random permutation restores a rejected sequence") {
    SplitRng rng(88);
    // a strongly autocorrelated ramp-like sequence fails the test
    std::vector<double> seq(600);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        seq[i] = std::sin(static_cast<double>(i) * 0.05) + 0.01 * rng.next_unit();
    }
    REQUIRE(runs_test(seq).p_two_sided < 0.001);

    int accepted = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> shuffled = seq;
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            std::swap(shuffled[i - 1], shuffled[rng.next_index(i)]);
        }
        if (runs_test(shuffled).p_two_sided > 0.05) ++accepted;
    }
    CHECK(accepted >= 85);  // calibration: about 95 of 100 expected
}

TEST_CASE("wasserstein_1d closed-form cases") {
    const std::vector<double> a{0.0, 1.0};
    SUBCASE("identical samples have zero distance") {
        CHECK(wasserstein_1d(a, a) == 0.0);
    }
    SUBCASE("sorted pairing of {0,1} and {1,2}") {
        const std::vector<double> b{1.0, 2.0};
        CHECK(wasserstein_1d(a, b) == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(wasserstein_1d(a, {}), ContractError);
    }
    SUBCASE("unequal sizes are aligned by quantile matching") {
        const std::vector<double> b{0.0, 0.0, 1.0, 1.0};
        CHECK(wasserstein_1d(a, b) == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("large uniform sample converges to the exact quantiles") {
    SplitRng rng(99);
    const std::vector<double> sample = rng.uniform_vector(100000, -1.0, 1.0);
    const std::vector<double> exact = uniform_quantiles(sample.size());
    CHECK(wasserstein_1d(sample, exact) < 0.01);
}

TEST_CASE("wasserstein_1d is a metric on equal-size empirical distributions") {
    SplitRng rng(111);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<double> a = rng.uniform_vector(40, -2.0, 2.0);
        const std::vector<double> b = rng.uniform_vector(40, -1.0, 3.0);
        const std::vector<double> c = rng.uniform_vector(40, 0.0, 4.0);
        const double ab = wasserstein_1d(a, b);
        const double ba = wasserstein_1d(b, a);
        const double ac = wasserstein_1d(a, c);
        const double cb = wasserstein_1d(c, b);
        CHECK(ab == ba);
        CHECK(ab >= 0.0);
        CHECK(wasserstein_1d(a, a) == 0.0);
        CHECK(ab <= ac + cb + 1e-12);
    }
}

TEST_CASE("critic_wasserstein behaviour") {
    SplitRng rng(222);
    SUBCASE("identical block sets stay near zero after training") {
        std::vector<std::vector<double>> blocks(40);
        for (auto& b : blocks) b = rng.uniform_vector(6, -1.0, 1.0);
        const CriticDistanceReport report = critic_wasserstein(blocks, blocks, 60, 5);
        CHECK(report.estimate == 0.0);  // identical sets score identically
        CHECK(report.budget == 60);
        CHECK(report.seed == 5);
    }
    SUBCASE("budget zero reports the raw initial objective") {
        std::vector<std::vector<double>> a(30), b(30);
        for (auto& blk : a) blk = rng.uniform_vector(6, -1.0, 1.0);
        for (auto& blk : b) blk = rng.uniform_vector(6, -1.0, 1.0);
        const CriticDistanceReport report = critic_wasserstein(a, b, 0, 6);
        CHECK(std::fabs(report.estimate) < 0.5);  // random init carries no signal
    }
    SUBCASE("well-separated gaussians score far apart") {
        std::vector<std::vector<double>> a(60), b(60);
        auto gaussian = [&rng](double mean) {
            // sum of 12 uniforms: variance 1, nearly normal
            double acc = 0.0;
            for (int i = 0; i < 12; ++i) acc += rng.next_unit();
            return mean + acc - 6.0;
        };
        for (auto& blk : a) {
            blk.resize(8);
            for (double& v : blk) v = gaussian(5.0);
        }
        for (auto& blk : b) {
            blk.resize(8);
            for (double& v : blk) v = gaussian(-5.0);
        }
        const CriticDistanceReport report = critic_wasserstein(a, b, 300, 7);
        CHECK(report.estimate > 1.0);
    }
}
