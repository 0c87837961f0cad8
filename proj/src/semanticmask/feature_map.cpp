#include "forgemask/semanticmask/feature_map.hpp"

#include "forgemask/error.hpp"

#include <cmath>
#include <string>

namespace forgemask::semanticmask {

DenseFeatureMap::DenseFeatureMap(std::uint32_t grid_h, std::uint32_t grid_w, std::uint32_t dim,
                                 std::uint32_t patch_size, std::vector<float> values)
    : grid_h_(grid_h), grid_w_(grid_w), dim_(dim), patch_size_(patch_size), values_(std::move(values)) {
    if (grid_h == 0 || grid_w == 0 || dim == 0 || patch_size == 0) {
        throw ParameterError("feature map dimensions must be positive");
    }
    const std::size_t expected = static_cast<std::size_t>(grid_h) * grid_w * dim;
    if (values_.size() != expected) {
        throw ParameterError("feature map holds " + std::to_string(values_.size()) +
                             " values, expected " + std::to_string(expected));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw ParameterError("feature map value " + std::to_string(i) + " is not finite");
        }
    }
}

}  // namespace forgemask::semanticmask
