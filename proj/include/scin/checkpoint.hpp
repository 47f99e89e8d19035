#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "scin/model.hpp"

namespace scin {

/// Checkpoint layout (all integers little-endian):
///
///   offset 0   4 bytes   magic "SCIN"
///   offset 4   1 byte    format version (currently 1)
///   offset 5   4 bytes   header length L (uint32)
///   offset 9   L bytes   UTF-8 JSON header:
///                          {"config": {...}, "input_mean": [...],
///                           "parameter_count": n,
///                           "parameters": [{"name": ..., "shape": [...]}, ...]}
///   9 + L      4n bytes  float32 parameters, concatenated in header order
///   end - 8    8 bytes   FNV-1a 64 of every preceding byte
inline constexpr std::uint8_t checkpoint_version = 1;

std::vector<std::uint8_t> encode_checkpoint(const Network& net);
Network decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace scin
