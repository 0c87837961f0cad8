#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace forgemask {

/// Axis-aligned pixel rectangle; (x, y) is the top-left pixel.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// 8-bit raster, row-major, channel-interleaved. 1 (gray) or 3 (RGB) channels.
class ImageBuffer {
public:
    ImageBuffer() = default;
    /// Zero-filled image. Throws ParameterError on invalid dimensions.
    ImageBuffer(int width, int height, int channels);
    /// Adopts `data`; its size must equal width * height * channels.
    ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    std::uint8_t at(int x, int y, int c = 0) const noexcept {
        return data_[index(x, y, c)];
    }
    std::uint8_t& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

    Rect bounds() const noexcept { return {0, 0, width_, height_}; }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t index(int x, int y, int c) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> data_;
};

/// BT.601 luma, round(0.299 R + 0.587 G + 0.114 B). Gray input is returned as is.
ImageBuffer to_grayscale(const ImageBuffer& img);

/// Replicates a gray image into three channels. RGB input is returned as is.
ImageBuffer to_rgb(const ImageBuffer& img);

/// True when `r` has positive extent and lies inside a width x height image.
bool rect_within(const Rect& r, int width, int height) noexcept;

/// Copies the pixels of `r`. Throws BoundsError when `r` leaves the image.
ImageBuffer crop(const ImageBuffer& img, const Rect& r);

}  // namespace forgemask
