#pragma once

#include "forgemask/imagecore/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace forgemask {

/// Decodes a PNG or JPEG stream (sniffed from the signature).
/// JPEG always decodes to RGB; PNG keeps gray as 1 channel and drops alpha.
/// Throws DecodeError on malformed or truncated input.
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

/// Lossless PNG encoding (1 or 3 channels).
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);

/// Baseline JPEG at `quality` in [1, 100], 4:2:0 chroma subsampling for RGB.
std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality);

/// encode_jpeg followed by decode; the result has the input's channel count.
ImageBuffer jpeg_reencode(const ImageBuffer& img, int quality);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

ImageBuffer load_image(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const ImageBuffer& img);

}  // namespace forgemask
