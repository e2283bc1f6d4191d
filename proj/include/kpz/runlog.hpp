#pragma once

// Binary run log of one ensemble store. Little-endian throughout:
//   "KPZL" u32 version | u32 nx | f64 beta | u32 len, fingerprint bytes
//   f64 x[nx] | f64 x_eff[nx] | u64 records
//   per record: u32 batch | u64 replica | u8 censored | f64 h[nx] Z[nx] B[nx]

#include <string>

#include "kpz/estimators.hpp"

namespace kpz {

inline constexpr std::uint32_t kRunLogVersion = 1;

void write_run_log(const std::string& path, const EnsembleStore& store);
/// DependencyError if the file is missing, IoError if it is malformed.
EnsembleStore read_run_log(const std::string& path);

}  // namespace kpz
