#include "cltrack/cli/manifest.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "cltrack/core/error.hpp"

namespace cltrack::cli {

using nlohmann::json;

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

std::string RunManifest::to_json() const {
    json outs = json::array();
    for (const auto& o : outputs) {
        outs.push_back({{"file", o.file}, {"fnv1a64", o.hash}, {"deterministic", o.deterministic}});
    }
    json doc{{"command", command},
             {"args", args},
             {"config_path", config_path ? json(*config_path) : json(nullptr)},
             {"config_hash", config_hash},
             {"seeds", seeds},
             {"out_dir", out_dir},
             {"engine_version", engine_version},
             {"outputs", outs}};
    return doc.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
    try {
        const auto doc = json::parse(text);
        RunManifest m;
        m.command = doc.at("command").get<std::string>();
        m.args = doc.at("args").get<std::vector<std::string>>();
        if (!doc.at("config_path").is_null()) {
            m.config_path = doc.at("config_path").get<std::string>();
        }
        m.config_hash = doc.at("config_hash").get<std::string>();
        m.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
        m.out_dir = doc.at("out_dir").get<std::string>();
        m.engine_version = doc.at("engine_version").get<std::string>();
        for (const auto& o : doc.at("outputs")) {
            m.outputs.push_back({o.at("file").get<std::string>(), o.at("fnv1a64").get<std::string>(),
                                 o.at("deterministic").get<bool>()});
        }
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("manifest: {}", e.what()));
    }
}

OutputFile write_output(const std::filesystem::path& dir, const std::string& name,
                        std::string_view contents, bool deterministic) {
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw ConfigError(fmt::format("write to '{}' failed", path.string()));
    }
    return {name, fnv1a_hex(contents), deterministic};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace cltrack::cli
