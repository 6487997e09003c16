// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hydrofeat/climate.hpp"
#include "hydrofeat/decomp.hpp"
#include "hydrofeat/error.hpp"
#include "hydrofeat/features.hpp"
#include "hydrofeat/forest.hpp"
#include "hydrofeat/parallel.hpp"
#include "hydrofeat/pipeline.hpp"
#include "hydrofeat/summary.hpp"
#include "hydrofeat/table.hpp"
#include "hydrofeat/text.hpp"

using namespace hydrofeat;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
    Verdict verdict = Verdict::fail;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double time_limit_s;  // 0 = no limit
    std::function<Outcome()> run;
};

std::string fmt(const char* format, auto... args) {
    char buffer[512];
    std::snprintf(buffer, sizeof buffer, format, args...);
    return buffer;
}

std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> dist(0.0, sd);
    std::vector<double> out(n);
    for (auto& v : out) {
        v = dist(rng);
    }
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> direct_acf(const std::vector<double>& x, std::size_t max_lag) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
    double c0 = 0.0;
    for (double v : x) {
        c0 += (v - m) * (v - m);
    }
    std::vector<double> r;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t t = 0; t + k < x.size(); ++t) {
            ck += (x[t] - m) * (x[t + k] - m);
        }
        r.push_back(ck / c0);
    }
    return r;
}

// 1. Fast ACF against the direct O(n^2) formula.
Outcome acf_oracle() {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> length(12, 156);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const auto n = length(rng);
        auto x = gaussian(n, rng, scale(rng));
        if (rep % 3 == 1) {
            for (std::size_t t = 0; t < n; ++t) {
                x[t] += std::sin(2.0 * std::numbers::pi * double(t) / 4.0) + 0.05 * double(t);
            }
        }
        const auto fast = sample_acf(x, n - 1);
        const auto slow = direct_acf(x, n - 1);
        for (std::size_t k = 0; k < fast.size(); ++k) {
            worst = std::max(worst, std::abs(fast[k] - slow[k]));
        }
    }
    return {worst < 1e-10 ? Verdict::pass : Verdict::fail, fmt("max |fast - direct| = %.2e over all lags", worst)};
}

// 2. Hurst calibration on simulated fGn.
Outcome hurst_calibration() {
    std::string detail;
    bool ok = true;
    for (double h : {0.6, 0.7, 0.8}) {
        double sum = 0.0;
        for (std::uint64_t rep = 0; rep < 200; ++rep) {
            sum += hurst_ml(simulate_fgn(156, h, 20000 + rep + std::uint64_t(h * 1000) * 1000)).hurst;
        }
        const double m = sum / 200.0;
        ok = ok && std::abs(m - h) < 0.07;
        detail += fmt("H=%.1f: mean %.4f (bias %+.4f); ", h, m, m - h);
    }
    detail.resize(detail.size() - 2);
    return {ok ? Verdict::pass : Verdict::fail, detail};
}

// 3. White-noise feature baseline.
Outcome white_noise_baseline() {
    std::mt19937_64 rng(303);
    constexpr int reps = 200;
    double lag1 = 0.0;
    double abs_lag1 = 0.0;
    double summary = 0.0;
    double tv = 0.0;
    double entropy = 0.0;
    double hurst = 0.0;
    std::vector<double> trend;
    std::vector<double> season;
    for (int rep = 0; rep < reps; ++rep) {
        const auto f = extract_features(gaussian(156, rng));
        lag1 += f.lag1_autocorrelation / reps;
        abs_lag1 += std::abs(f.lag1_autocorrelation) / reps;
        summary += f.autocorrelation_summary / reps;
        tv += f.temporal_variation / reps;
        entropy += f.spectral_entropy / reps;
        hurst += f.hurst_exponent / reps;
        trend.push_back(f.trend_strength);
        season.push_back(f.seasonality_strength);
    }
    // Under i.i.d. noise r_1 is approximately N(-1/n, 1/n), so E|r_1| ~ sqrt(2 / (pi n)).
    const double expected_abs = std::sqrt(2.0 / (std::numbers::pi * 156.0));
    const bool ok = std::abs(lag1) < 0.05 && std::abs(abs_lag1 - expected_abs) < 0.01 &&
                    summary < 0.15 && std::abs(tv - std::sqrt(2.0)) < 0.05 && entropy > 0.90 &&
                    std::abs(hurst - 0.5) < 0.05 && median(trend) < 0.3 && median(season) < 0.3;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("|mean lag1| %.4f, mean |lag1| %.4f (theory %.4f), ac_summary %.4f, temp_variation %.4f, "
                "entropy %.4f, hurst %.4f, median trend %.3f, median seasonality %.3f",
                std::abs(lag1), abs_lag1, expected_abs, summary, tv, entropy, hurst, median(trend),
                median(season))};
}

// 4. Signal extremes.
Outcome signal_extremes() {
    std::vector<double> tone(156);
    for (std::size_t t = 0; t < tone.size(); ++t) {
        tone[t] = std::sin(2.0 * std::numbers::pi * double(t) / 4.0);
    }
    const auto f_tone = extract_features(tone);
    std::mt19937_64 rng(404);
    auto ramp = gaussian(156, rng, 1e-6);
    for (std::size_t t = 0; t < ramp.size(); ++t) {
        ramp[t] += double(t);
    }
    const auto f_ramp = extract_features(ramp);
    const bool ok = f_tone.spectral_entropy < 1e-9 && f_tone.seasonality_strength > 0.99 &&
                    f_ramp.trend_strength > 0.99 && f_ramp.temporal_variation < 0.05;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("tone: entropy %.2e, seasonality %.6f; ramp: trend %.6f, temp_variation %.2e",
                f_tone.spectral_entropy, f_tone.seasonality_strength, f_ramp.trend_strength,
                f_ramp.temporal_variation)};
}

// 5. STL reconstruction and classical zero-sum indices.
Outcome stl_reconstruction() {
    std::mt19937_64 rng(505);
    std::uniform_int_distribution<std::size_t> length(8, 200);
    std::uniform_int_distribution<int> kind(0, 4);
    std::uniform_int_distribution<int> window(1, 12);
    std::uniform_int_distribution<int> degree(0, 2);
    std::uniform_int_distribution<int> iterations(1, 4);
    std::uniform_real_distribution<double> scale(-3.0, 2.0);
    double worst_stl = 0.0;
    double worst_sum = 0.0;
    for (int c = 0; c < 1000; ++c) {
        const auto n = length(rng);
        const double s = std::pow(10.0, scale(rng));
        auto y = gaussian(n, rng, s);
        switch (kind(rng)) {
        case 1:
            for (std::size_t t = 0; t < n; ++t) y[t] += s * (std::sin(std::numbers::pi * t / 2.0) + 0.1 * t);
            break;
        case 2:
            std::partial_sum(y.begin(), y.end(), y.begin());
            break;
        case 3:
            y[n / 2] += 50.0 * s;
            break;
        case 4:
            for (auto& v : y) v = std::round(v / s) * s;
            break;
        default:
            break;
        }
        StlParams p;
        p.seasonal_window = c % 3 == 0 ? 0 : 2 * window(rng) + 1;
        p.seasonal_degree = c % 3 == 0 ? 0 : degree(rng) % 2;
        p.trend_window = c % 5 == 0 ? 0 : 2 * window(rng) + 1;
        p.trend_degree = degree(rng);
        p.lowpass_degree = degree(rng) % 2;
        p.inner_iterations = iterations(rng);
        const auto d = stl_decompose(y, p);
        for (std::size_t t = 0; t < n; ++t) {
            const double err = std::abs(y[t] - (d.seasonal[t] + d.trend[t] + d.remainder[t]));
            worst_stl = std::max(worst_stl, err);
        }
        const auto cl = classical_decompose(y);
        const double sum = std::accumulate(cl.seasonal_indices.begin(), cl.seasonal_indices.end(), 0.0);
        worst_sum = std::max(worst_sum, std::abs(sum));
    }
    const bool ok = worst_stl < 1e-9 && worst_sum < 1e-9;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("1000 cases: max |input - (S + T + R)| %.2e, max |sum of classical indices| %.2e",
                worst_stl, worst_sum)};
}

// 6. Declared bounds over 10 000 random and synthetic series.
Outcome strength_bounds() {
    std::mt19937_64 rng(606);
    std::uniform_int_distribution<int> kind(0, 9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t violations = 0;
    std::size_t degenerate = 0;
    std::string first_violation;
    for (int c = 0; c < 10000; ++c) {
        const std::size_t n = 156;
        std::vector<double> y;
        const int k = kind(rng);
        switch (k) {
        case 0:  // white noise
            y = gaussian(n, rng);
            break;
        case 1: {  // AR(1), phi in (-0.99, 0.99)
            const double phi = 1.98 * unit(rng) - 0.99;
            const auto e = gaussian(n, rng);
            y.resize(n);
            for (std::size_t t = 0; t < n; ++t) y[t] = (t ? phi * y[t - 1] : 0.0) + e[t];
            break;
        }
        case 2:  // fGn
            y = simulate_fgn(n, 0.05 + 0.9 * unit(rng), rng());
            break;
        case 3:  // random walk
            y = gaussian(n, rng);
            std::partial_sum(y.begin(), y.end(), y.begin());
            break;
        case 4: {  // seasonal cycle plus noise
            y = gaussian(n, rng, 2.0 * unit(rng));
            const double a = unit(rng), b = unit(rng);
            for (std::size_t t = 0; t < n; ++t) y[t] += a * std::cos(std::numbers::pi * t / 2.0) + b * ((t % 4) == 1);
            break;
        }
        case 5: {  // trend plus noise
            y = gaussian(n, rng, unit(rng));
            const double slope = 0.1 * (unit(rng) - 0.5);
            for (std::size_t t = 0; t < n; ++t) y[t] += slope * double(t);
            break;
        }
        case 6: {  // heavy tails
            std::student_t_distribution<double> tdist(1.0 + 3.0 * unit(rng));
            y.resize(n);
            for (auto& v : y) v = tdist(rng);
            break;
        }
        case 7: {  // skewed positive, like precipitation
            std::gamma_distribution<double> gamma(0.3 + 2.0 * unit(rng), 10.0);
            y.resize(n);
            for (auto& v : y) v = gamma(rng);
            break;
        }
        case 8: {  // mostly constant with rare spikes
            y.assign(n, 5.0);
            y[rng() % n] += 10.0;
            if (unit(rng) < 0.5) y[rng() % n] -= 3.0;
            break;
        }
        default: {  // quantized noise with level shift
            y = gaussian(n, rng);
            for (auto& v : y) v = std::round(v * 2.0);
            for (std::size_t t = n / 2; t < n; ++t) y[t] += 4.0 * unit(rng);
            break;
        }
        }
        FeatureVector f;
        try {
            f = extract_features(y);
        } catch (const DegenerateError&) {
            ++degenerate;  // e.g. a quantized series that came out constant
            continue;
        }
        const auto acf = sample_acf(standardize(y).values, 10);
        const bool acf_ok = std::all_of(acf.begin(), acf.end(), [](double r) { return std::abs(r) <= 1.0; });
        const bool ok = f.within_bounds() && f.hurst_exponent >= 0.01 && f.hurst_exponent <= 0.99 && acf_ok;
        if (!ok) {
            if (violations == 0) {
                first_violation = fmt(" first violation: generator %d", k);
            }
            ++violations;
        }
    }
    return {violations == 0 ? Verdict::pass : Verdict::fail,
            fmt("%zu violations in %zu evaluated series (%zu constant draws skipped)", violations,
                std::size_t(10000) - degenerate, degenerate) + first_violation};
}

// 7. Forest sanity on a planted feature.
Outcome forest_sanity() {
    int first_both = 0;
    double worst_oob = 0.0;
    const std::vector<std::string> names{"f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8"};
    for (std::uint64_t run = 0; run < 100; ++run) {
        std::mt19937_64 rng(70000 + run);
        std::normal_distribution<double> noise;
        const std::size_t informative = run % 8;
        std::vector<std::vector<double>> rows(600, std::vector<double>(8));
        std::vector<std::optional<std::string>> labels(600);
        for (std::size_t i = 0; i < 600; ++i) {
            const int c = static_cast<int>(i % 3);
            for (auto& v : rows[i]) v = noise(rng);
            rows[i][informative] = c + 0.15 * noise(rng);
            labels[i] = "class" + std::to_string(c);
        }
        const auto problem = make_problem(names, rows, labels);
        ForestParams params;  // 500 trees
        const auto forest = train(problem, params, derive_seed(7, run));
        worst_oob = std::max(worst_oob, oob_error(forest, problem).rate);
        const auto mda = descending_ranks(mean_decrease_accuracy(forest, problem, derive_seed(8, run)));
        const auto mdg = descending_ranks(mean_decrease_gini(forest));
        first_both += mda[informative] == 1 && mdg[informative] == 1 ? 1 : 0;
    }
    const bool ok = worst_oob < 0.05 && first_both >= 95;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("max OOB error %.4f over 100 runs; informative feature ranked 1st by both measures in %d/100",
                worst_oob, first_both)};
}

// 8. Representativeness filter boundary.
Outcome filter_boundary() {
    const auto eligible = representativeness_filter({{"ET", 29}, {"Dfb", 30}, {"Cfa", 31}});
    std::vector<FeatureRow> rows;
    for (int i = 0; i < 59; ++i) {
        FeatureRow row;
        row.station.station_id = std::to_string(i);
        const std::string klass = i < 29 ? "ET" : "Dfb";
        row.climate = ClimateLabel{klass, klass[0]};
        rows.push_back(row);
    }
    const auto by_class = group_summarize(rows, Grouping::climate_class);
    const auto by_zone = group_summarize(rows, Grouping::climate_zone);
    const bool ok = eligible == std::set<std::string>{"Cfa", "Dfb"} && by_class.groups.size() == 1 &&
                    by_class.groups.contains("Dfb") && by_class.excluded.at("ET") == 29 &&
                    by_zone.groups.contains("D") && !by_zone.groups.contains("E");
    return {ok ? Verdict::pass : Verdict::fail,
            "size 29 excluded, sizes 30 and 31 kept, for the filter and for class/zone summaries"};
}

// 9. End-to-end determinism and golden feature vectors.
Outcome end_to_end() {
    const fs::path fixture = fs::path(HYDROFEAT_FIXTURE_DIR) / "pipeline";
    const auto base = fs::temp_directory_path() / "hydrofeat_acceptance";
    fs::remove_all(base);
    std::map<std::string, std::string> runs[2];
    for (int r = 0; r < 2; ++r) {
        auto config = load_config(fixture / "config.json");
        config.output_dir = base / ("run" + std::to_string(r));
        config.threads = r == 0 ? 1 : 4;
        cmd_all(config);
        for (const auto& entry : fs::recursive_directory_iterator(config.output_dir)) {
            if (entry.is_regular_file()) {
                runs[r][fs::relative(entry.path(), config.output_dir).string()] = text::read_file(entry.path());
            }
        }
    }
    const bool identical = !runs[0].empty() && runs[0] == runs[1];

    std::size_t compared = 0;
    double worst = 0.0;
    bool complete = true;
    for (auto kind : all_variable_kinds) {
        const auto golden = load_feature_table(fixture / "golden" / output_files::features(kind));
        const auto fresh = parse_feature_table(runs[0][output_files::features(kind)]);
        if (golden.rows.size() != fresh.rows.size()) {
            complete = false;
            continue;
        }
        for (std::size_t i = 0; i < golden.rows.size(); ++i) {
            complete = complete && golden.rows[i].station == fresh.rows[i].station;
            const auto a = golden.rows[i].features.as_array();
            const auto b = fresh.rows[i].features.as_array();
            for (std::size_t f = 0; f < feature_count; ++f) {
                worst = std::max(worst, std::abs(a[f] - b[f]));
            }
            ++compared;
        }
    }
    const bool ok = identical && complete && worst < 1e-9;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("%zu output files, reruns (1 and 4 threads) %s; %zu stations vs golden, max |diff| %.2e",
                runs[0].size(), identical ? "byte-identical" : "DIFFER", compared, worst)};
}

// 10. Optional full-scale check against reference station counts and rankings.
Outcome full_scale() {
    const char* path = std::getenv("HYDROFEAT_FULL_CONFIG");
    if (path == nullptr || *path == '\0') {
        return {Verdict::skip, "set HYDROFEAT_FULL_CONFIG to a config over the downloaded datasets"};
    }
    auto config = load_config(path);
    cmd_features(config);
    const std::map<VariableKind, double> reference{{VariableKind::temperature, 2432},
                                                   {VariableKind::precipitation, 5071},
                                                   {VariableKind::river_flow, 5601}};
    // Wide tolerance: the reference station criteria are not fully specified.
    constexpr double tolerance = 0.25;
    std::string detail;
    bool ok = true;
    for (const auto& [kind, count] : reference) {
        if (!config.inputs.contains(kind)) {
            continue;
        }
        const auto table = load_feature_table(config.output_dir / output_files::features(kind));
        const double rel = (double(table.rows.size()) - count) / count;
        ok = ok && std::abs(rel) <= tolerance;
        detail += fmt("%s %zu vs %g (%+.1f%%); ", std::string(to_string(kind)).c_str(), table.rows.size(),
                      count, 100.0 * rel);
    }
    const auto tables = load_labeled_tables(config);
    ForestParams params = config.forest;
    params.threads = config.threads;
    const auto run = run_importance(tables, params, config.seed);
    // How often each feature lands in the first four positions across all reports.
    std::array<int, feature_count> top{};
    for (const auto& r : run.reports) {
        for (std::size_t f = 0; f < feature_count; ++f) {
            top[f] += r.ranks[f] <= 4 ? 1 : 0;
        }
    }
    const double low = (top[4] + top[5] + top[6]) / 3.0;  // entropy, hurst, trend strength
    const double rest = (top[0] + top[1] + top[2] + top[3] + top[7]) / 5.0;
    ok = ok && low < rest;
    detail += fmt("top-4 frequency: entropy/hurst/trend %.2f vs others %.2f over %zu reports", low, rest,
                  run.reports.size());
    return {ok ? Verdict::pass : Verdict::fail, detail};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "ACF oracle equivalence", 5.0, acf_oracle},
        {2, "Hurst calibration", 120.0, hurst_calibration},
        {3, "White-noise feature baseline", 60.0, white_noise_baseline},
        {4, "Signal extremes", 0.0, signal_extremes},
        {5, "STL reconstruction identity", 0.0, stl_reconstruction},
        {6, "Feature bounds", 0.0, strength_bounds},
        {7, "Forest sanity", 120.0, forest_sanity},
        {8, "Representativeness filter boundary", 0.0, filter_boundary},
        {9, "End-to-end determinism", 0.0, end_to_end},
        {10, "Full-scale check (optional)", 0.0, full_scale},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {Verdict::fail, std::string("exception: ") + e.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt("%.2f s", seconds);
        if (c.time_limit_s > 0.0) {
            timing += fmt(" of %.0f s", c.time_limit_s);
            if (seconds >= c.time_limit_s && outcome.verdict == Verdict::pass) {
                outcome.verdict = Verdict::fail;
                outcome.detail += "; over time limit";
            }
        }
        const char* label = outcome.verdict == Verdict::pass ? "PASS" : outcome.verdict == Verdict::skip ? "SKIP" : "FAIL";
        failures += outcome.verdict == Verdict::fail ? 1 : 0;
        std::printf("[%s] criterion %2d  %-36s %s [%s]\n", label, c.id, c.title.c_str(),
                    outcome.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
