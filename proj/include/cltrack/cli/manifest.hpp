#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cltrack::cli {

inline constexpr std::string_view kEngineVersion = "0.1.0";

/// FNV-1a 64 over raw bytes, as 16 lower-case hex digits.
std::string fnv1a_hex(std::string_view bytes);

struct OutputFile {
    std::string file;  // relative to the output directory
    std::string hash;
    bool deterministic = true;
};

/// Record written next to every command's outputs. `args` is the full argument list
/// without the program name and without --out, so replaying it into another directory
/// regenerates the outputs.
struct RunManifest {
    std::string command;
    std::vector<std::string> args;
    std::optional<std::string> config_path;
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::string engine_version = std::string(kEngineVersion);
    std::vector<OutputFile> outputs;

    std::string to_json() const;
    static RunManifest from_json(std::string_view text);
};

inline constexpr std::string_view kManifestFile = "manifest.json";

/// Writes `contents` to dir/name in binary mode and returns the entry for the manifest.
OutputFile write_output(const std::filesystem::path& dir, const std::string& name,
                        std::string_view contents, bool deterministic = true);

std::string read_file(const std::filesystem::path& path);

}  // namespace cltrack::cli
