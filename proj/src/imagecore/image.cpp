#include "forgemask/imagecore/image.hpp"

#include "forgemask/error.hpp"

#include <algorithm>
#include <string>

namespace forgemask {

namespace {

void check_dims(int width, int height, int channels) {
    if (width < 1 || height < 1) {
        throw ParameterError("image dimensions must be positive, got " + std::to_string(width) +
                             "x" + std::to_string(height));
    }
    if (channels != 1 && channels != 3) {
        throw ParameterError("unsupported channel count " + std::to_string(channels));
    }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
    check_dims(width, height, channels);
    data_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    check_dims(width, height, channels);
    if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
        throw ParameterError("pixel buffer holds " + std::to_string(data_.size()) +
                             " bytes, expected " +
                             std::to_string(static_cast<std::size_t>(width) * height * channels));
    }
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
    if (img.channels() == 1) return img;
    ImageBuffer out(img.width(), img.height(), 1);
    const auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const unsigned r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
        // Integer form of round(0.299 R + 0.587 G + 0.114 B), halves rounded up.
        dst[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
    }
    return out;
}

ImageBuffer to_rgb(const ImageBuffer& img) {
    if (img.channels() == 3) return img;
    ImageBuffer out(img.width(), img.height(), 3);
    const auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
    }
    return out;
}

bool rect_within(const Rect& r, int width, int height) noexcept {
    return r.w >= 1 && r.h >= 1 && r.x >= 0 && r.y >= 0 &&
           static_cast<long long>(r.x) + r.w <= width &&
           static_cast<long long>(r.y) + r.h <= height;
}

ImageBuffer crop(const ImageBuffer& img, const Rect& r) {
    if (!rect_within(r, img.width(), img.height())) {
        throw BoundsError("crop rect {" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                          std::to_string(r.w) + "," + std::to_string(r.h) +
                          "} exceeds image " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()));
    }
    ImageBuffer out(r.w, r.h, img.channels());
    const std::size_t row_bytes = static_cast<std::size_t>(r.w) * img.channels();
    for (int y = 0; y < r.h; ++y) {
        const auto src = img.data().subspan(
            (static_cast<std::size_t>(r.y + y) * img.width() + r.x) * img.channels(), row_bytes);
        std::copy(src.begin(), src.end(), out.data().begin() + y * row_bytes);
    }
    return out;
}

}  // namespace forgemask
