#pragma once

#include "forgemask/alignment/affine.hpp"
#include "forgemask/alignment/features.hpp"
#include "forgemask/alignment/matching.hpp"
#include "forgemask/imagecore/image.hpp"

#include <optional>
#include <string>

namespace forgemask::alignment {

struct AlignConfig {
    DetectorConfig detector;
    double ratio = kDefaultRatio;
    RansacConfig ransac;
};

/// Provenance of one alignment run. Fields are filled stage by stage, so a
/// failed run still carries whatever was measured before the failure.
struct AlignmentStats {
    int keypoints_original = 0;
    int keypoints_edited = 0;
    std::optional<int> matches;
    std::optional<int> inliers;
    std::optional<double> inlier_ratio;
    std::optional<AffineTransform> coarse;
    std::optional<AffineTransform> refined;
    /// False when least-squares refinement failed and the coarse model was used.
    bool refinement_applied = false;
    std::optional<Rect> crop;

    /// Transform actually used for warping.
    const AffineTransform& transform() const { return refined ? *refined : *coarse; }
};

enum class AlignStage { detection, matching, estimation, crop };

const char* to_string(AlignStage stage) noexcept;

class AlignmentFailure : public Error {
public:
    AlignmentFailure(AlignStage stage, const std::string& what, AlignmentStats partial)
        : Error(std::string("alignment failed at ") + to_string(stage) + ": " + what),
          stage_(stage),
          stats_(std::move(partial)) {}

    AlignStage stage() const noexcept { return stage_; }
    const AlignmentStats& partial_stats() const noexcept { return stats_; }

private:
    AlignStage stage_;
    AlignmentStats stats_;
};

struct AlignedPair {
    ImageBuffer original;
    ImageBuffer edited;
    AlignmentStats stats;
};

/// Detect, match, RANSAC, refine, warp the original into the edited frame and
/// crop both to the common valid rectangle. Throws AlignmentFailure.
AlignedPair align_pair(const ImageBuffer& original, const ImageBuffer& edited,
                       const AlignConfig& cfg = {});

}  // namespace forgemask::alignment
