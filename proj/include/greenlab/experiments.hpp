#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace greenlab::cli {

/// Invalid configuration; `path` names the offending field, e.g. "lelong.r_max".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct Artifact {
    std::string name;
    std::string content;
};

struct RunResult {
    std::vector<Artifact> artifacts;
    /// Flags and summary numbers for the manifest (degeneracies, c_bound, fits).
    nlohmann::json report;
};

const std::vector<std::string>& experiment_kinds();

/// Config seed, overridden by `env_seed` (the GREENLAB_SEED value) when set.
struct ResolvedSeed {
    std::uint64_t value = 1;
    std::string source = "default";
};
ResolvedSeed resolve_seed(const nlohmann::json& config, const std::optional<std::string>& env_seed);

/// Validates the whole config for `kind`, then computes. Throws ConfigError
/// before any computation when a field is invalid.
RunResult run_experiment(const std::string& kind, const nlohmann::json& config, std::uint64_t seed);

/// Formats a double with 17 significant digits.
std::string format_number(double x);

}  // namespace greenlab::cli
