#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace forgemask::semanticmask {

/// grid_h x grid_w cells, each a `dim`-vector; row-major, cell-major then channel.
class DenseFeatureMap {
public:
    DenseFeatureMap() = default;
    /// Validates sizes and finiteness; throws ParameterError.
    DenseFeatureMap(std::uint32_t grid_h, std::uint32_t grid_w, std::uint32_t dim,
                    std::uint32_t patch_size, std::vector<float> values);

    std::uint32_t grid_h() const noexcept { return grid_h_; }
    std::uint32_t grid_w() const noexcept { return grid_w_; }
    std::uint32_t dim() const noexcept { return dim_; }
    /// Source pixels per cell side.
    std::uint32_t patch_size() const noexcept { return patch_size_; }
    std::size_t cell_count() const noexcept {
        return static_cast<std::size_t>(grid_h_) * grid_w_;
    }

    std::span<const float> values() const noexcept { return values_; }
    std::span<const float> cell(std::size_t row, std::size_t col) const noexcept {
        return cell(row * grid_w_ + col);
    }
    std::span<const float> cell(std::size_t index) const noexcept {
        return std::span<const float>(values_).subspan(index * dim_, dim_);
    }

    friend bool operator==(const DenseFeatureMap&, const DenseFeatureMap&) = default;

private:
    std::uint32_t grid_h_ = 0;
    std::uint32_t grid_w_ = 0;
    std::uint32_t dim_ = 0;
    std::uint32_t patch_size_ = 0;
    std::vector<float> values_;
};

}  // namespace forgemask::semanticmask
