#pragma once

#include "forgemask/imagecore/image.hpp"
#include "forgemask/semanticmask/feature_map.hpp"

namespace forgemask::semanticmask {

inline constexpr int kBuiltinFeatureDim = 12;

/// Hand-crafted per-patch descriptor, a dependency-free stand-in for a learned
/// backbone. Each cell covers patch_size x patch_size pixels (trailing pixels
/// that do not fill a cell are ignored) and holds:
///   [0..2]  mean R, G, B mapped to [-1, 1]
///   [3..10] 8-bin gradient-orientation histogram, L2-normalized and damped by
///           mean gradient magnitude (all zero on flat patches)
///   [11]    luma standard deviation mapped to [-1, 1]
/// Gradients never read outside the cell, so a cell depends only on its own pixels.
DenseFeatureMap extract_features_builtin(const ImageBuffer& img, int patch_size);

}  // namespace forgemask::semanticmask
