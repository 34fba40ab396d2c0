#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pompkit {

inline constexpr const char* kVersion = "0.3.0";

/// Flags given on the command line; each one beats the config file.
struct CliOptions {
    std::string command;
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::string> params_path;
    std::optional<std::string> scenario;
    std::optional<std::string> input;
    std::vector<std::string> sets;  ///< name=value (model parameter) or dotted.key=value (config entry)
};

const std::vector<std::string>& cli_commands();

nlohmann::json default_config();

/// defaults <- config file <- command-line flags. Relative data paths in the
/// file are resolved against the file's directory.
nlohmann::json resolve_config(const CliOptions& options);

/// Runs one resolved command, writing manifest.json, summary.json and result
/// tables to config["out"]. Returns the process exit code.
int run_command(const std::string& command, const nlohmann::json& config, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace pompkit
