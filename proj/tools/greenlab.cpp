#include <Eigen/Core>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "greenlab/experiments.hpp"
#include "greenlab/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace greenlab;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

json versions() {
    return {{"greenlab", kVersion},
            {"compiler", __VERSION__},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                  "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"greenlab: Green currents, pull-backs and equidistribution experiments"};
    std::string experiment;
    std::string config_path;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string out_dir = "out";
    app.add_option("experiment", experiment, "Experiment kind")->required()->check(CLI::IsMember(cli::experiment_kinds()));
    app.add_option("--config", config_path, "JSON experiment configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--workers", workers, "Worker threads (results do not depend on it)")->check(CLI::Range(1u, 1024u));
    app.add_option("--out", out_dir, "Output directory");
    CLI11_PARSE(app, argc, argv);

    json config;
    try {
        std::ifstream in(config_path);
        config = json::parse(in);
    } catch (const json::parse_error& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    }

    try {
        const char* env = std::getenv("GREENLAB_SEED");
        const auto seed = cli::resolve_seed(config, env ? std::optional<std::string>(env) : std::nullopt);
        parallel::set_workers(workers);

        const auto start = std::chrono::steady_clock::now();
        auto result = cli::run_experiment(experiment, config, seed.value);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        fs::create_directories(out_dir);
        json artifacts = json::array();
        for (const auto& a : result.artifacts) {
            write_file(fs::path(out_dir) / a.name, a.content);
            artifacts.push_back(a.name);
        }
        const json manifest{{"experiment", experiment},
                            {"config", config},
                            {"seed", seed.value},
                            {"seed_source", seed.source},
                            {"workers", workers},
                            {"versions", versions()},
                            {"wall_time_seconds", wall},
                            {"artifacts", artifacts},
                            {"report", result.report}};
        write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
        std::cout << experiment << ": wrote " << artifacts.size() << " artifact(s) to " << out_dir << '\n';
        return 0;
    } catch (const cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
