#include "forgemask/semanticmask/feature_file.hpp"

#include "forgemask/error.hpp"
#include "forgemask/imagecore/codec.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

namespace forgemask::semanticmask {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> serialize_feature_map(const DenseFeatureMap& map) {
    std::vector<std::uint8_t> out;
    out.reserve(kFmapHeaderSize + map.values().size() * 4);
    for (char c : {'F', 'M', 'A', 'P'}) out.push_back(static_cast<std::uint8_t>(c));
    put_u16(out, kFmapVersion);
    put_u16(out, 0);
    put_u32(out, map.grid_h());
    put_u32(out, map.grid_w());
    put_u32(out, map.dim());
    put_u32(out, map.patch_size());
    for (float v : map.values()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

DenseFeatureMap parse_feature_map(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFmapHeaderSize) {
        throw FormatError("FMAP truncated: header needs " + std::to_string(kFmapHeaderSize) +
                          " bytes, missing " + std::to_string(kFmapHeaderSize - bytes.size()));
    }
    const std::uint8_t* p = bytes.data();
    if (std::memcmp(p, "FMAP", 4) != 0) throw FormatError("FMAP bad magic");
    const std::uint16_t version = get_u16(p + 4);
    if (version != kFmapVersion) {
        throw FormatError("FMAP unsupported version " + std::to_string(version));
    }
    if (get_u16(p + 6) != 0) throw FormatError("FMAP reserved field must be 0");
    const std::uint32_t grid_h = get_u32(p + 8);
    const std::uint32_t grid_w = get_u32(p + 12);
    const std::uint32_t dim = get_u32(p + 16);
    const std::uint32_t patch = get_u32(p + 20);
    if (grid_h == 0 || grid_w == 0) throw FormatError("FMAP grid dimensions must be positive");
    if (dim == 0) throw FormatError("FMAP dim must be positive");
    if (patch == 0) throw FormatError("FMAP patch_size must be positive");

    const std::uint64_t cells = static_cast<std::uint64_t>(grid_h) * grid_w;
    std::uint64_t payload = 0;
    if (__builtin_mul_overflow(cells, static_cast<std::uint64_t>(dim) * 4, &payload)) {
        throw FormatError("FMAP truncated: declared payload exceeds 2^64 bytes");
    }
    const std::uint64_t count = payload / 4;
    const std::size_t have = bytes.size() - kFmapHeaderSize;
    if (payload > have) {
        const auto missing = payload - have;
        throw FormatError("FMAP truncated: payload missing " +
                          std::to_string(static_cast<unsigned long long>(missing)) + " bytes");
    }
    if (payload < have) {
        throw FormatError("FMAP has " +
                          std::to_string(static_cast<unsigned long long>(have - payload)) +
                          " trailing bytes");
    }

    std::vector<float> values(static_cast<std::size_t>(count));
    const std::uint8_t* q = p + kFmapHeaderSize;
    for (std::size_t i = 0; i < values.size(); ++i, q += 4) {
        const float v = std::bit_cast<float>(get_u32(q));
        if (!std::isfinite(v)) {
            throw FormatError("FMAP non-finite value at cell " + std::to_string(i / dim) +
                              " channel " + std::to_string(i % dim));
        }
        values[i] = v;
    }
    return DenseFeatureMap(grid_h, grid_w, dim, patch, std::move(values));
}

void store_feature_file(const std::filesystem::path& path, const DenseFeatureMap& map) {
    write_file_bytes(path, serialize_feature_map(map));
}

DenseFeatureMap load_feature_file(const std::filesystem::path& path) {
    return parse_feature_map(read_file_bytes(path));
}

}  // namespace forgemask::semanticmask
