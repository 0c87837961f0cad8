#include "forgemask/pipeline/quality_gate.hpp"

#include "forgemask/error.hpp"

namespace forgemask::pipeline {

void QualityGateConfig::validate() const {
    if (min_keypoints < 1 || min_matches < 1) {
        throw ParameterError("gate keypoint and match thresholds must be positive");
    }
    if (!(min_inlier_ratio > 0.0 && min_inlier_ratio <= 1.0)) {
        throw ParameterError("gate inlier ratio must lie in (0, 1]");
    }
}

const char* to_string(GateCriterion c) noexcept {
    switch (c) {
        case GateCriterion::keypoints: return "keypoints";
        case GateCriterion::matches: return "matches";
        case GateCriterion::inlier_ratio: return "inlier_ratio";
    }
    return "unknown";
}

GateDecision quality_gate(const alignment::AlignmentStats& stats, const QualityGateConfig& cfg) {
    GateDecision d;
    // Keypoints are counted per image.
    if (stats.keypoints_original < cfg.min_keypoints || stats.keypoints_edited < cfg.min_keypoints) {
        d.violated = GateCriterion::keypoints;
        return d;
    }
    if (!stats.matches) {
        d.complete = false;
        return d;
    }
    if (*stats.matches < cfg.min_matches) {
        d.violated = GateCriterion::matches;
        return d;
    }
    if (!stats.inlier_ratio) {
        d.complete = false;
        return d;
    }
    // "Below" is strict: exactly the minimum passes.
    if (*stats.inlier_ratio < cfg.min_inlier_ratio) d.violated = GateCriterion::inlier_ratio;
    return d;
}

}  // namespace forgemask::pipeline
