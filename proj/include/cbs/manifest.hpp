#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace cbs {

inline constexpr const char* kToolVersion = "0.1.0";

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Reproducibility record written next to every command output.
struct RunManifest {
    std::vector<std::string> command_line;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::map<std::string, std::string> input_digests;
    std::string tool_version = kToolVersion;

    void add_input(const std::filesystem::path& path);
    [[nodiscard]] nlohmann::ordered_json to_json() const;
    void write(const std::filesystem::path& path) const;
};

}  // namespace cbs
