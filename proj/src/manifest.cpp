#include "conceptvec/manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "conceptvec/common.hpp"
#include "conceptvec/rng.hpp"

namespace cvec {

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream bytes;
    bytes << in.rdbuf();
    const std::uint64_t h = fnv1a(bytes.str());
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

RunManifest& RunManifest::config(const std::string& key, nlohmann::json value) {
    config_[key] = std::move(value);
    return *this;
}

RunManifest& RunManifest::seed(std::uint64_t seed) {
    seed_ = seed;
    return *this;
}

RunManifest& RunManifest::input(const std::string& role, const std::filesystem::path& path) {
    inputs_[role] = {{"path", path.string()}, {"fnv1a64", file_digest(path)}};
    return *this;
}

RunManifest& RunManifest::output(const std::string& role, const std::filesystem::path& path) {
    outputs_[role] = path.string();
    return *this;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j{{"tool", "conceptvec"},
                     {"version", kVersion},
                     {"command", command_},
                     {"config", config_},
                     {"inputs", inputs_},
                     {"outputs", outputs_}};
    j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
    return j;
}

std::filesystem::path RunManifest::write_beside(const std::filesystem::path& artifact) const {
    std::filesystem::path path = artifact;
    path += ".manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json().dump(2) << '\n';
    return path;
}

}  // namespace cvec
