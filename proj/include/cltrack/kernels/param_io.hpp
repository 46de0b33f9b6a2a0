#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "cltrack/kernels/cstmamba.hpp"

namespace cltrack::kernels {

inline constexpr char kParamMagic[4] = {'C', 'S', 'T', 'M'};
inline constexpr std::uint32_t kParamVersion = 1;

/// Layout, all integers u32 little-endian:
///   "CSTM" | version | channels | state_dim | heads | tensor_count
///   per tensor, in CSTMambaParams::tensors() order: rank | dims[rank] | f64 LE data
void save_params(std::ostream& out, const CSTMambaParams& params);

/// Throws ConfigError on a bad magic, unsupported version or shape disagreement.
CSTMambaParams load_params(std::istream& in);

void save_params_file(const std::string& path, const CSTMambaParams& params);
CSTMambaParams load_params_file(const std::string& path);

}  // namespace cltrack::kernels
