#pragma once

#include <string>

#include "chunkrl/policy/policy_net.hpp"

namespace chunkrl::policy {

/// Versioned little-endian binary checkpoint:
///   magic "CKRL" | u32 version | 7 x i32 descriptor fields |
///   u64 param count | params as f64 bit patterns.
/// Round-trips bit-exactly.
void save_checkpoint(const PolicyNet& net, const std::string& path);
PolicyNet load_checkpoint(const std::string& path);

} // namespace chunkrl::policy
