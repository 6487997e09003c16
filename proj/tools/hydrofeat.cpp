#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hydrofeat/error.hpp"
#include "hydrofeat/pipeline.hpp"

namespace {

struct Options {
    std::string config;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

int run(const Options& options, const std::function<hydrofeat::StageReport(const hydrofeat::PipelineConfig&)>& stage) {
    try {
        auto config = hydrofeat::load_config(options.config);
        if (options.threads) {
            config.threads = *options.threads;
        }
        if (options.seed) {
            config.seed = *options.seed;
        }
        if (options.out) {
            config.output_dir = *options.out;
        }
        const auto report = stage(config);
        for (const auto& notice : report.notices) {
            std::cerr << "hydrofeat: " << notice << '\n';
        }
        for (const auto& file : report.written) {
            std::cout << (config.output_dir / file).string() << '\n';
        }
        return 0;
    } catch (const hydrofeat::Error& e) {
        std::cerr << "hydrofeat: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "hydrofeat: internal error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interpretable time series features for climate and hydrology station data"};
    app.require_subcommand(1);

    Options options;
    app.add_option("--config", options.config, "pipeline config (JSON)")
        ->required()
        ->check(CLI::ExistingFile)
        ->configurable(false);
    app.add_option("--threads", options.threads, "worker cap; results do not depend on it")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", options.seed, "overrides the config seed");
    app.add_option("--out", options.out, "output directory");

    const std::pair<const char*, const char*> commands[] = {
        {"ingest-check", "load inputs and report stations, rejected rows and qualifying windows"},
        {"features", "compute feature tables and skip logs"},
        {"summarize", "histograms, grouped boxplots, ranked tables, counts and correlations"},
        {"importance", "random forest variable importance for the six problems"},
        {"all", "features, summarize and importance in sequence"},
    };
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help)->fallthrough();
    }
    CLI11_PARSE(app, argc, argv);

    const auto* sub = app.get_subcommands().front();
    const auto name = sub->get_name();
    if (name == "ingest-check") {
        return run(options, hydrofeat::cmd_ingest_check);
    }
    if (name == "features") {
        return run(options, hydrofeat::cmd_features);
    }
    if (name == "summarize") {
        return run(options, hydrofeat::cmd_summarize);
    }
    if (name == "importance") {
        return run(options, hydrofeat::cmd_importance);
    }
    return run(options, hydrofeat::cmd_all);
}
