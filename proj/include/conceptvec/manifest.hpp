#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace cvec {

inline constexpr const char* kVersion = "0.1.0";

/// Hex FNV-1a digest of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

/// Sidecar describing how an artifact was produced: command, resolved
/// configuration, seed and input digests. No timestamps, so reruns match.
class RunManifest {
public:
    explicit RunManifest(std::string command);

    RunManifest& config(const std::string& key, nlohmann::json value);
    RunManifest& seed(std::uint64_t seed);
    RunManifest& input(const std::string& role, const std::filesystem::path& path);
    RunManifest& output(const std::string& role, const std::filesystem::path& path);

    nlohmann::json to_json() const;

    /// Writes to `<artifact>.manifest.json`, returns that path.
    std::filesystem::path write_beside(const std::filesystem::path& artifact) const;

private:
    std::string command_;
    nlohmann::json config_ = nlohmann::json::object();
    nlohmann::json inputs_ = nlohmann::json::object();
    nlohmann::json outputs_ = nlohmann::json::object();
    std::optional<std::uint64_t> seed_;
};

}  // namespace cvec
