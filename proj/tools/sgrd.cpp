// sgrd: command-line front end for the damped sine-Gordon experiments.
//
//   sgrd check-params|simulate|attractor|rotation|sweep --config FILE
//        [--seed S] [--out DIR] [--workers W]
//
// SGRD_OUT_DIR and SGRD_WORKERS override the config; flags override both.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgrd/error.hpp"
#include "sgrd/harness.hpp"

namespace {

std::string manifest_config(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw sgrd::IoError("cannot read manifest " + file);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("config_text"))
        throw sgrd::ConfigError("manifest " + file + " has no config_text");
    return j.at("config_text").get<std::string>();
}

int parse_workers(const char* text) {
    try {
        std::size_t used = 0;
        const int w = std::stoi(text, &used);
        if (used == std::string(text).size()) return w;
    } catch (const std::exception&) {
    }
    throw sgrd::ConfigError(std::string("SGRD_WORKERS: '") + text + "' is not an integer");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral experiments for the stochastic damped sine-Gordon equation"};
    app.footer(sgrd::config_reference());
    app.require_subcommand(1);

    std::string config_file, manifest_file, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    for (auto name : {"check-params", "simulate", "attractor", "rotation", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        auto* cfg = sub->add_option("--config", config_file, "key = value config file");
        sub->add_option("--manifest", manifest_file, "replay the config stored in a manifest.json")
            ->excludes(cfg);
        sub->add_option("--seed", seed, "override the master seed");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    }
    CLI11_PARSE(app, argc, argv);
    const std::string kind = app.get_subcommands().front()->get_name();

    sgrd::ExperimentConfig config;
    try {
        if (config_file.empty() && manifest_file.empty())
            throw sgrd::ConfigError("one of --config or --manifest is required");
        config = manifest_file.empty() ? sgrd::load_config_file(config_file)
                                       : sgrd::load_config(manifest_config(manifest_file));
        config.kind = sgrd::parse_kind(kind);
        if (const char* env = std::getenv("SGRD_OUT_DIR"); env && *env) config.out_dir = env;
        if (const char* env = std::getenv("SGRD_WORKERS"); env && *env)
            config.workers = parse_workers(env);
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (workers) config.workers = *workers;
        if (seed) config.params.seed = *seed;
    } catch (const sgrd::IoError& e) {
        std::cerr << "sgrd: I/O error: " << e.what() << "\n";
        return sgrd::exit_io;
    } catch (const std::exception& e) {
        std::cerr << "sgrd: config error: " << e.what() << "\n";
        return sgrd::exit_config;
    }
    const int code = sgrd::run(config, std::cerr);
    if (code == sgrd::exit_ok) std::cout << (config.out_dir / "summary.json").string() << "\n";
    return code;
}
