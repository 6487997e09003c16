#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "helpers.hpp"
#include "hydrofeat/decomp.hpp"
#include "hydrofeat/error.hpp"
#include "hydrofeat/features.hpp"
#include "hydrofeat/series.hpp"
#include "hydrofeat/text.hpp"

using namespace hydrofeat;

namespace {

// Direct weighted least squares over the q nearest neighbours of every point.
std::vector<double> loess_oracle(const std::vector<double>& x, const std::vector<double>& y,
                                 double span, int degree) {
    const auto n = x.size();
    const auto q = static_cast<std::size_t>(std::floor(span * n + 1e-9));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
            return std::abs(x[a] - x[i]) < std::abs(x[b] - x[i]);
        });
        idx.resize(q);
        double h = 0.0;
        for (auto j : idx) {
            h = std::max(h, std::abs(x[j] - x[i]));
        }
        Eigen::MatrixXd a(q, degree + 1);
        Eigen::VectorXd b(q);
        for (std::size_t r = 0; r < q; ++r) {
            const auto j = idx[r];
            const double u = std::abs(x[j] - x[i]) / h;
            const double w = u < 1.0 ? std::pow(1.0 - u * u * u, 3) : 0.0;
            for (int c = 0; c <= degree; ++c) {
                a(r, c) = std::sqrt(w) * std::pow(x[j] - x[i], c);
            }
            b(r) = std::sqrt(w) * y[j];
        }
        out[i] = a.colPivHouseholderQr().solve(b)(0);
    }
    return out;
}

double variance_ratio(const std::vector<double>& num, const std::vector<double>& den) {
    return sample_variance(num) / sample_variance(den);
}

} // namespace

TEST_CASE("classical: exact cycle is recovered") {
    const auto y = testing::cycle(40, {-1, 0, 1, 0});
    const auto d = classical_decompose(y);
    REQUIRE(d.seasonal_indices.size() == 4);
    const std::vector<double> expected{-1, 0, 1, 0};
    CHECK(testing::max_abs_diff(d.seasonal_indices, expected) < 1e-12);
    const auto ds = d.deseasonalized(y);
    for (std::size_t t = 2; t + 2 < y.size(); ++t) {
        CHECK(std::abs(ds[t]) < 1e-12);
        CHECK(std::abs(d.remainder[t]) < 1e-12);
    }
    CHECK(std::isnan(d.trend[0]));
    CHECK(std::isnan(d.trend[1]));
    CHECK_FALSE(std::isnan(d.trend[2]));
    CHECK(std::isnan(d.trend[39]));
    CHECK(std::isnan(d.trend[38]));
}

TEST_CASE("classical: constant series has zero indices") {
    const std::vector<double> y(20, 3.5);
    const auto d = classical_decompose(y);
    for (double s : d.seasonal_indices) {
        CHECK(s == 0.0);
    }
    CHECK(d.deseasonalized(y) == y);
}

TEST_CASE("classical: a line passes through the centred moving average") {
    const auto y = testing::ramp(156, 0.37, -2.0);
    const auto d = classical_decompose(y);
    for (double s : d.seasonal_indices) {
        CHECK(std::abs(s) < 1e-9);
    }
    for (std::size_t t = 2; t + 2 < y.size(); ++t) {
        CHECK(d.trend[t] == doctest::Approx(y[t]).epsilon(1e-12));
    }
}

TEST_CASE("classical: indices sum to zero on noise") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto y = testing::gaussian(156, seed);
        const auto d = classical_decompose(y);
        CHECK(std::abs(std::accumulate(d.seasonal_indices.begin(), d.seasonal_indices.end(), 0.0)) < 1e-12);
    }
    CHECK_THROWS_AS(classical_decompose(std::vector<double>(7, 1.0)), LengthError);
}

TEST_CASE("loess reproduces a line") {
    const auto x = testing::ramp(30, 1.0, 1.0);
    const auto y = testing::ramp(30, -2.5, 4.0);
    for (double span : {0.2, 0.5, 1.0}) {
        CHECK(testing::max_abs_diff(loess_smooth(x, y, span, 1), y) < 1e-9);
        CHECK(testing::max_abs_diff(loess_smooth(x, y, span, 2), y) < 1e-9);
    }
}

TEST_CASE("loess matches a direct weighted least-squares oracle") {
    std::vector<double> x(45);
    double acc = 0.0;
    const auto gaps = testing::gaussian(45, 8);
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += 0.2 + std::abs(gaps[i]);
        x[i] = acc;
    }
    const auto y = testing::gaussian(45, 9);
    for (double span : {0.3, 0.6, 1.0}) {
        for (int degree : {0, 1, 2}) {
            const auto fit = loess_smooth(x, y, span, degree);
            const auto oracle = loess_oracle(x, y, span, degree);
            CHECK(testing::max_abs_diff(fit, oracle) < 1e-9);
        }
    }
}

TEST_CASE("loess is symmetric for symmetric input") {
    const auto x = testing::ramp(31);
    std::vector<double> y(31);
    for (int i = 0; i < 31; ++i) {
        y[i] = std::cos(0.4 * (i - 15)) + 0.01 * (i - 15) * (i - 15);
    }
    const auto fit = loess_smooth(x, y, 0.4, 1);
    for (int i = 0; i < 31; ++i) {
        CHECK(std::abs(fit[i] - fit[30 - i]) < 1e-9);
    }
}

TEST_CASE("loess argument errors") {
    const auto x = testing::ramp(10);
    const auto y = testing::ramp(10);
    CHECK_THROWS_AS(loess_smooth(x, y, 0.1, 1), FitError);
    CHECK_THROWS_AS(loess_smooth(x, y, 1.5, 1), ParameterError);
    CHECK_THROWS_AS(loess_smooth(x, y, 0.5, 3), ParameterError);
    CHECK_THROWS_AS(loess_smooth(x, std::vector<double>(9), 0.5, 1), LengthError);
}

TEST_CASE("STL matches a reference implementation") {
    const auto lines = text::split_lines(text::read_file(HYDROFEAT_FIXTURE_DIR "/oracles/stl_reference.csv"));
    std::map<std::tuple<int, int, int>, std::vector<std::array<double, 3>>> cases;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) {
            continue;
        }
        const auto f = text::split_fields(lines[i]);
        const auto key = std::make_tuple(int(*text::parse_long(f[0])), int(*text::parse_long(f[1])),
                                         int(*text::parse_long(f[2])));
        cases[key].push_back({*text::parse_double(f[4]), *text::parse_double(f[5]),
                              *text::parse_double(f[6])});
    }
    REQUIRE(cases.size() == 4);
    for (const auto& [key, rows] : cases) {
        StlParams p;
        std::tie(p.seasonal_window, p.seasonal_degree, p.trend_window) = key;
        p.lowpass_window = 5;
        std::vector<double> y;
        for (const auto& r : rows) {
            y.push_back(r[0]);
        }
        const auto d = stl_decompose(y, p);
        for (std::size_t i = 0; i < y.size(); ++i) {
            CHECK(std::abs(d.seasonal[i] - rows[i][1]) < 1e-10);
            CHECK(std::abs(d.trend[i] - rows[i][2]) < 1e-10);
        }
    }
}

TEST_CASE("STL: linear ramp goes to the trend") {
    const auto y = testing::ramp(156, 0.5, 3.0);
    const auto max_remainder = [&](const StlParams& p) {
        const auto d = stl_decompose(y, p);
        double m = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            m = std::max(m, std::abs(d.remainder[i]));
        }
        return m;
    };
    // Two inner passes leave a small sawtooth: the periodic seasonal first absorbs
    // the within-cycle slope, and each pass shrinks it by about 60x.
    StlParams defaults;
    CHECK(max_remainder(defaults) < 2e-4 * (y.back() - y.front()));
    CHECK(strengths(y, stl_decompose(y)).trend > 0.9999);

    StlParams converged;
    converged.inner_iterations = 10;
    CHECK(max_remainder(converged) < 1e-6);

    StlParams linear_seasonal;
    linear_seasonal.seasonal_window = 7;
    linear_seasonal.seasonal_degree = 1;
    CHECK(max_remainder(linear_seasonal) < 1e-6);
    const auto d = stl_decompose(y, linear_seasonal);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(std::abs(d.trend[i] - y[i]) < 1e-6);
    }
}

TEST_CASE("STL: periodic cycle plus constant goes to the seasonal") {
    auto y = testing::cycle(156, {2.0, -1.0, 0.5, -1.5});
    for (auto& v : y) {
        v += 10.0;
    }
    const auto d = stl_decompose(y);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(std::abs(d.remainder[i]) < 1e-9);
        CHECK(std::abs(d.trend[i] - 10.0) < 1e-9);
    }
    CHECK(d.seasonal[0] == doctest::Approx(2.0));
}

TEST_CASE("STL: white-noise remainder keeps most of the variance") {
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto y = testing::gaussian(156, 1000 + seed);
        const auto d = stl_decompose(y);
        ratios.push_back(variance_ratio(d.remainder, y));
    }
    CHECK(testing::median(ratios) > 0.8);
}

TEST_CASE("STL reconstructs its input") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto y = testing::gaussian(40 + seed * 3, seed, 1.0 + seed);
        StlParams p;
        p.seasonal_window = seed % 2 ? 7 : 0;
        const auto d = stl_decompose(y, p);
        double err = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            err = std::max(err, std::abs(d.seasonal[i] + d.trend[i] + d.remainder[i] - y[i]));
        }
        CHECK(err < 1e-9);
    }
}

TEST_CASE("STL parameter validation") {
    const auto y = testing::gaussian(40, 1);
    StlParams p;
    p.trend_window = 8;
    CHECK_THROWS_AS(stl_decompose(y, p), ParameterError);
    p = {};
    p.seasonal_window = 1;
    CHECK_THROWS_AS(stl_decompose(y, p), ParameterError);
    p = {};
    p.trend_degree = 3;
    CHECK_THROWS_AS(stl_decompose(y, p), ParameterError);
    CHECK_THROWS_AS(stl_decompose(std::vector<double>(7, 0.0)), LengthError);
    CHECK(conventional_trend_window(4, 0) == 7);
    CHECK(conventional_trend_window(12, 7) == 23);
    p = {};
    p.trend_window = 0;
    CHECK_NOTHROW(stl_decompose(y, p));
}
