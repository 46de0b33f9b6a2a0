#include "cltrack/kernels/param_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "cltrack/core/error.hpp"

namespace cltrack::kernels {

namespace {

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    out.write(bytes.data(), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), sizeof(T))) {
        throw ConfigError("parameter file truncated");
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

}  // namespace

void save_params(std::ostream& out, const CSTMambaParams& params) {
    params.validate();
    auto copy = params;
    const auto tensors = copy.tensors();
    out.write(kParamMagic, sizeof(kParamMagic));
    write_le<std::uint32_t>(out, kParamVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.channels));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.state_dim));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.heads));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) {
            write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        }
        for (double v : t.data) {
            write_le<double>(out, v);
        }
    }
}

CSTMambaParams load_params(std::istream& in) {
    char magic[4];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kParamMagic, sizeof(magic)) != 0) {
        throw ConfigError("parameter file: bad magic (expected CSTM)");
    }
    const auto version = read_le<std::uint32_t>(in);
    if (version != kParamVersion) {
        throw ConfigError(fmt::format("parameter file: unsupported version {}", version));
    }
    const auto channels = static_cast<int>(read_le<std::uint32_t>(in));
    const auto state_dim = static_cast<int>(read_le<std::uint32_t>(in));
    const auto heads = static_cast<int>(read_le<std::uint32_t>(in));
    if (channels < 1 || state_dim < 1 || heads < 1 || channels > (1 << 16) ||
        state_dim > (1 << 16)) {
        throw ConfigError("parameter file: implausible dimensions");
    }
    auto params = CSTMambaParams::zeros(channels, state_dim, heads);
    auto tensors = params.tensors();
    const auto count = read_le<std::uint32_t>(in);
    if (count != tensors.size()) {
        throw ConfigError(fmt::format("parameter file: {} tensors, expected {}", count,
                                      tensors.size()));
    }
    for (auto& t : tensors) {
        const auto rank = read_le<std::uint32_t>(in);
        if (rank != t.shape.size()) {
            throw ConfigError(fmt::format("parameter file: {} has rank {}", t.name, rank));
        }
        for (int expected : t.shape) {
            const auto d = read_le<std::uint32_t>(in);
            if (static_cast<int>(d) != expected) {
                throw ConfigError(fmt::format("parameter file: {} shape mismatch", t.name));
            }
        }
        for (auto& v : t.data) {
            v = read_le<double>(in);
        }
    }
    try {
        params.validate();
    } catch (const Error& e) {
        throw ConfigError(fmt::format("parameter file: {}", e.what()));
    }
    return params;
}

void save_params_file(const std::string& path, const CSTMambaParams& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError(fmt::format("cannot write {}", path));
    }
    save_params(out, params);
}

CSTMambaParams load_params_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot read {}", path));
    }
    return load_params(in);
}

}  // namespace cltrack::kernels
