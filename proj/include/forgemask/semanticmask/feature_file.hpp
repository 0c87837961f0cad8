#pragma once

#include "forgemask/semanticmask/feature_map.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace forgemask::semanticmask {

/// FMAP v1 container for dense patch features:
///
///   offset  size  field
///   0       4     magic "FMAP"
///   4       2     u16 version (1)
///   6       2     u16 reserved (0)
///   8       4     u32 grid_h
///   12      4     u32 grid_w
///   16      4     u32 dim
///   20      4     u32 patch_size
///   24      ...   grid_h * grid_w * dim f32, row-major, cell-major then channel
///
/// All integers and floats are little-endian.
inline constexpr std::uint16_t kFmapVersion = 1;
inline constexpr std::size_t kFmapHeaderSize = 24;

std::vector<std::uint8_t> serialize_feature_map(const DenseFeatureMap& map);

/// Throws FormatError on bad magic/version, zero dimensions, truncation,
/// trailing bytes, or non-finite values.
DenseFeatureMap parse_feature_map(std::span<const std::uint8_t> bytes);

void store_feature_file(const std::filesystem::path& path, const DenseFeatureMap& map);
DenseFeatureMap load_feature_file(const std::filesystem::path& path);

}  // namespace forgemask::semanticmask
