#pragma once

#include "forgemask/alignment/affine.hpp"
#include "forgemask/imagecore/image.hpp"

#include <optional>

namespace forgemask::alignment {

/// Output pixel (x', y') is the bilinear sample of `img` at t^-1(x', y').
/// Samples outside [0, w-1] x [0, h-1] are black. Throws ParameterError when t
/// is not invertible.
ImageBuffer warp_affine(const ImageBuffer& img, const AffineTransform& t, int out_w, int out_h);

/// Largest axis-aligned pixel rectangle of the destination whose every pixel
/// samples the source from inside its bounds under warp_affine(src, t, ...).
/// Ties go to larger area, then smaller x, then smaller y. nullopt when empty.
std::optional<Rect> compute_common_crop(const AffineTransform& t, int src_w, int src_h, int dst_w,
                                        int dst_h);

}  // namespace forgemask::alignment
