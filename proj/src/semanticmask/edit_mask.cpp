#include "forgemask/semanticmask/edit_mask.hpp"

#include "forgemask/error.hpp"

#include <algorithm>
#include <string>

namespace forgemask::semanticmask {

namespace {

void check_size(int width, int height) {
    if (width < 1 || height < 1) {
        throw ParameterError("mask dimensions must be positive, got " + std::to_string(width) +
                             "x" + std::to_string(height));
    }
}

}  // namespace

EditMask::EditMask(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
    check_size(width, height);
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

EditMask::EditMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    check_size(width, height);
    if (bits_.size() != static_cast<std::size_t>(width) * height) {
        throw ParameterError("mask data size does not match its dimensions");
    }
    if (std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b > 1; })) {
        throw ParameterError("mask values must be 0 or 1");
    }
}

std::size_t EditMask::edited_count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double EditMask::edited_fraction() const noexcept {
    return bits_.empty() ? 0.0 : static_cast<double>(edited_count()) / bits_.size();
}

ImageBuffer EditMask::to_image() const {
    std::vector<std::uint8_t> px(bits_.size());
    std::transform(bits_.begin(), bits_.end(), px.begin(),
                   [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
    return ImageBuffer(width_, height_, 1, std::move(px));
}

EditMask EditMask::from_image(const ImageBuffer& img) {
    const ImageBuffer gray = to_grayscale(img);
    std::vector<std::uint8_t> bits(gray.data().size());
    std::transform(gray.data().begin(), gray.data().end(), bits.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v > 127 ? 1 : 0); });
    return EditMask(gray.width(), gray.height(), std::move(bits));
}

namespace {

int nearest_source(int i, int in, int out) {
    const long long s = (2LL * i + 1) * in / (2LL * out);
    return static_cast<int>(std::min<long long>(s, in - 1));
}

}  // namespace

EditMask resize_mask(const EditMask& mask, int out_w, int out_h) {
    EditMask out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const int sy = nearest_source(y, mask.height(), out_h);
        for (int x = 0; x < out_w; ++x) {
            out.set(x, y, mask.at(nearest_source(x, mask.width(), out_w), sy) != 0);
        }
    }
    return out;
}

EditMask grid_mask_to_image(const EditMask& grid, int patch_size, int image_w, int image_h,
                            int out_w, int out_h) {
    if (patch_size < 1) throw ParameterError("patch_size must be positive");
    EditMask out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        const int py = nearest_source(y, image_h, out_h);
        const int gy = std::min(py / patch_size, grid.height() - 1);
        for (int x = 0; x < out_w; ++x) {
            const int px = nearest_source(x, image_w, out_w);
            const int gx = std::min(px / patch_size, grid.width() - 1);
            out.set(x, y, grid.at(gx, gy) != 0);
        }
    }
    return out;
}

}  // namespace forgemask::semanticmask
