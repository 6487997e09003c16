#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hydrofeat/error.hpp"
#include "hydrofeat/features.hpp"
#include "hydrofeat/pipeline.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace hydrofeat;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> view(const Array& a) {
    if (a.ndim() != 1) {
        throw py::value_error("expected a 1-d array");
    }
    return {a.data(), static_cast<std::size_t>(a.size())};
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

py::dict feature_dict(const FeatureVector& f) {
    py::dict d;
    const auto values = f.as_array();
    for (std::size_t i = 0; i < feature_count; ++i) {
        d[py::str(std::string(feature_names[i]))] = values[i];
    }
    return d;
}

py::dict decomposition_dict(const Decomposition& d) {
    py::dict out;
    out["seasonal"] = to_array(d.seasonal);
    out["trend"] = to_array(d.trend);
    out["remainder"] = to_array(d.remainder);
    if (!d.seasonal_indices.empty()) {
        out["seasonal_indices"] = to_array(d.seasonal_indices);
    }
    return out;
}

StlParams stl_params(int seasonal_window, int trend_window, int inner_iterations) {
    StlParams p;
    p.seasonal_window = seasonal_window;
    p.trend_window = trend_window;
    p.inner_iterations = inner_iterations;
    return p;
}

std::vector<std::string> run_stage(const std::filesystem::path& config_path, const std::string& stage,
                                   std::optional<std::filesystem::path> out, std::optional<unsigned> threads) {
    auto config = load_config(config_path);
    if (out) {
        config.output_dir = *out;
    }
    if (threads) {
        config.threads = *threads;
    }
    StageReport report;
    {
        py::gil_scoped_release release;
        if (stage == "ingest-check") {
            report = cmd_ingest_check(config);
        } else if (stage == "features") {
            report = cmd_features(config);
        } else if (stage == "summarize") {
            report = cmd_summarize(config);
        } else if (stage == "importance") {
            report = cmd_importance(config);
        } else if (stage == "all") {
            report = cmd_all(config);
        } else {
            throw ConfigError("unknown stage '" + stage + "'");
        }
    }
    return report.written;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Interpretable time series features for station data";
    py::register_exception<Error>(m, "HydrofeatError", PyExc_ValueError);

    m.attr("feature_names") = py::cast(std::vector<std::string>(feature_names.begin(), feature_names.end()));

    m.def(
        "extract_features",
        [](const Array& values, int trend_window, int daniell_half_width) {
            FeatureOptions options;
            options.stl.trend_window = trend_window;
            options.spectral.daniell_half_width = daniell_half_width;
            return feature_dict(extract_features(view(values), options));
        },
        "values"_a, "trend_window"_a = StlParams{}.trend_window, "daniell_half_width"_a = 0,
        "The eight features of one quarterly series, keyed by column name.");

    m.def("sample_acf", [](const Array& v, std::size_t max_lag) { return to_array(sample_acf(view(v), max_lag)); },
          "values"_a, "max_lag"_a);
    m.def("spectral_entropy",
          [](const Array& v, int half_width) { return spectral_entropy(view(v), SpectralOptions{half_width}); },
          "values"_a, "daniell_half_width"_a = 0);
    m.def("periodogram", [](const Array& v) { return to_array(periodogram(view(v))); }, "values"_a);
    m.def("fgn_autocorrelation", &fgn_autocorrelation, "lag"_a, "hurst"_a);
    m.def(
        "hurst_ml",
        [](const Array& v) {
            const auto fit = hurst_ml(view(v));
            return py::dict("hurst"_a = fit.hurst, "mu"_a = fit.mu, "sigma"_a = fit.sigma,
                            "log_likelihood"_a = fit.log_likelihood);
        },
        "values"_a);
    m.def("simulate_fgn", [](std::size_t n, double h, std::uint64_t seed) { return to_array(simulate_fgn(n, h, seed)); },
          "n"_a, "hurst"_a, "seed"_a);
    m.def(
        "stl_decompose",
        [](const Array& v, int seasonal_window, int trend_window, int inner_iterations) {
            return decomposition_dict(stl_decompose(view(v), stl_params(seasonal_window, trend_window, inner_iterations)));
        },
        "values"_a, "seasonal_window"_a = 0, "trend_window"_a = StlParams{}.trend_window,
        "inner_iterations"_a = StlParams{}.inner_iterations);
    m.def("classical_decompose", [](const Array& v) { return decomposition_dict(classical_decompose(view(v))); },
          "values"_a);

    m.def("run_stage", &run_stage, "config"_a, "stage"_a = "all", "out"_a = py::none(), "threads"_a = py::none(),
          "Runs a pipeline stage from a JSON config and returns the files written.");
}
