#pragma once

#include "forgemask/imagecore/image.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace forgemask::semanticmask {

/// Standardized dataset mask resolution.
inline constexpr int kMaskSize = 128;

/// Binary mask; 1 marks an edited (forged) pixel.
class EditMask {
public:
    EditMask() = default;
    EditMask(int width, int height, std::uint8_t fill = 0);
    /// `bits` must hold width * height values in {0, 1}.
    EditMask(int width, int height, std::vector<std::uint8_t> bits);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return bits_.size(); }

    std::uint8_t at(int x, int y) const noexcept { return bits_[index(x, y)]; }
    void set(int x, int y, bool edited) noexcept { bits_[index(x, y)] = edited ? 1 : 0; }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    std::size_t edited_count() const noexcept;
    double edited_fraction() const noexcept;

    /// 1-channel image with values {0, 255}.
    ImageBuffer to_image() const;
    /// Pixels > 127 become edited. RGB input is converted to luma first.
    static EditMask from_image(const ImageBuffer& img);

    friend bool operator==(const EditMask&, const EditMask&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Nearest-neighbour resampling; source index floor((i + 0.5) * in / out).
EditMask resize_mask(const EditMask& mask, int out_w, int out_h);

/// Renders a feature-grid mask over an image_w x image_h image whose cells
/// are patch_size pixels wide (pixels past the last full cell take the last
/// cell), then samples that picture at out_w x out_h by nearest neighbour.
EditMask grid_mask_to_image(const EditMask& grid, int patch_size, int image_w, int image_h,
                            int out_w, int out_h);

}  // namespace forgemask::semanticmask
