#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gexp/cli/run.hpp"
#include "gexp/errors.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kBadConfig = 2;

void setup_logging()
{
    auto logger = spdlog::stderr_color_st("gexp");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("GEXP_LOG")) {
        const std::string s(env);
        const auto level = spdlog::level::from_str(s);
        // from_str maps unknown names to off
        if (level != spdlog::level::off || s == "off") {
            spdlog::set_level(level);
        } else {
            spdlog::warn("GEXP_LOG='{}' is not a log level; keeping info", s);
        }
    }
}

struct Flags {
    std::string config;
    std::string out;
    std::string dump;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<unsigned> threads;
};

int execute(const std::string& experiment, const Flags& flags)
{
    gexp::cli::RunConfig config;
    try {
        std::ifstream in(flags.config);
        if (!in) {
            spdlog::error("cannot open config '{}'", flags.config);
            return kBadConfig;
        }
        gexp::json j;
        try {
            j = gexp::json::parse(in);
        } catch (const gexp::json::parse_error& e) {
            spdlog::error("{}: invalid JSON: {}", flags.config, e.what());
            return kBadConfig;
        }
        config = gexp::cli::parse_config(j);
        if (gexp::cli::to_string(config.experiment) != experiment) {
            spdlog::error("$.experiment: config is for '{}' but the subcommand is '{}'",
                          gexp::cli::to_string(config.experiment), experiment);
            return kBadConfig;
        }
        if (flags.seed) {
            config.seed = *flags.seed;
        }
        if (flags.paths) {
            config.paths = *flags.paths;
        }
        if (flags.threads) {
            config.threads = *flags.threads;
        }
        gexp::cli::validate(config);
    } catch (const std::invalid_argument& e) {
        spdlog::error("{}", e.what());
        return kBadConfig;
    } catch (const std::out_of_range& e) {
        spdlog::error("{}", e.what());
        return kBadConfig;
    }

    std::ofstream dump_file;
    if (!flags.dump.empty()) {
        dump_file.open(flags.dump);
        if (!dump_file) {
            spdlog::error("cannot write '{}'", flags.dump);
            return kBadConfig;
        }
    }
    gexp::cli::RunResult result;
    try {
        result = gexp::cli::run(config, flags.dump.empty() ? nullptr : &dump_file);
    } catch (const std::invalid_argument& e) {
        spdlog::error("{}", e.what());
        return kBadConfig;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kFailed;
    }

    const std::string text = result.report.dump(2) + "\n";
    if (flags.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(flags.out);
        if (!out) {
            spdlog::error("cannot write '{}'", flags.out);
            return kFailed;
        }
        out << text;
    }
    if (!result.all_pass) {
        spdlog::error("{}: at least one check failed", experiment);
        return kFailed;
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    setup_logging();
    CLI::App app{"G-expectation engine: PDE and Monte Carlo backends, Girsanov verification"};
    app.require_subcommand(1);
    Flags flags;
    const char* names[][2] = {
        {"gheat", "solve the G-heat equation for single-time payoffs"},
        {"expect", "G-expectation of cylinder functionals by backward recursion"},
        {"mc", "Monte Carlo upper expectation over a control family"},
        {"capacity", "upper probability of path events"},
        {"girsanov", "compare the weighted expectation of f(B_hat) with E[f(B)]"},
        {"novikov", "exponential-moment check for the integrand"},
    };
    for (const auto& [name, help] : names) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "report path (default stdout)");
        sub->add_option("--seed", flags.seed, "override the config seed");
        sub->add_option("--paths", flags.paths, "override the path count");
        sub->add_option("--threads", flags.threads, "worker count, 0 = all cores");
        sub->add_option("--dump-paths", flags.dump, "write per-path values as CSV");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kBadConfig;
    }
    return execute(app.get_subcommands().front()->get_name(), flags);
}
