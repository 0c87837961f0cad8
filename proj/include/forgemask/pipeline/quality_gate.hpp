#pragma once

#include "forgemask/alignment/align.hpp"

#include <optional>
#include <string>

namespace forgemask::pipeline {

/// Dataset filtering thresholds. A pair is discarded when either image has
/// fewer than min_keypoints keypoints, there are fewer than min_matches
/// matches, or the inlier ratio is below min_inlier_ratio.
struct QualityGateConfig {
    int min_keypoints = 10;
    int min_matches = 10;
    double min_inlier_ratio = 0.60;

    /// Throws ParameterError unless all thresholds are positive and the ratio is in (0, 1].
    void validate() const;
};

enum class GateCriterion { keypoints, matches, inlier_ratio };

const char* to_string(GateCriterion c) noexcept;

struct GateDecision {
    /// First violated criterion in the order keypoints, matches, inlier ratio.
    std::optional<GateCriterion> violated;
    /// False when the stats stopped before every criterion could be checked.
    bool complete = true;

    bool accepted() const noexcept { return !violated && complete; }
};

/// Checks the criteria in order over whatever `stats` contains.
GateDecision quality_gate(const alignment::AlignmentStats& stats, const QualityGateConfig& cfg);

}  // namespace forgemask::pipeline
