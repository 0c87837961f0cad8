#pragma once

#include "forgemask/error.hpp"
#include "forgemask/imagecore/image.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <vector>

namespace forgemask::alignment {

struct Keypoint {
    float x = 0.0f;
    float y = 0.0f;
    /// Harris corner strength.
    float response = 0.0f;
    /// Intensity-centroid orientation in degrees, [0, 360).
    float angle = 0.0f;
};

/// 256-bit steered BRIEF descriptor.
struct BinaryDescriptor {
    std::array<std::uint8_t, 32> bits{};

    friend bool operator==(const BinaryDescriptor&, const BinaryDescriptor&) = default;
};

inline int hamming_distance(const BinaryDescriptor& a, const BinaryDescriptor& b) noexcept {
    int d = 0;
    for (std::size_t i = 0; i < 32; i += 8) {
        std::uint64_t wa, wb;
        std::memcpy(&wa, a.bits.data() + i, 8);
        std::memcpy(&wb, b.bits.data() + i, 8);
        d += std::popcount(wa ^ wb);
    }
    return d;
}

struct Feature {
    Keypoint keypoint;
    BinaryDescriptor descriptor;
};

/// Raised by detect_keypoints on unusable input.
class DetectionError : public Error {
public:
    using Error::Error;
};

struct DetectorConfig {
    /// Keypoints kept per image.
    int max_count = 1000;
    /// FAST-9 segment-test intensity threshold.
    int fast_threshold = 20;
};

/// Minimum width/height accepted by detect_keypoints.
inline constexpr int kMinDetectionSize = 32;

/// FAST-9 corners ranked by Harris response, oriented by intensity centroid and
/// described by a rotation-steered 256-pair binary test on a smoothed image.
/// Deterministic. Throws DetectionError when `gray` is not 1-channel or smaller
/// than kMinDetectionSize.
std::vector<Feature> detect_keypoints(const ImageBuffer& gray, const DetectorConfig& cfg = {});

}  // namespace forgemask::alignment
