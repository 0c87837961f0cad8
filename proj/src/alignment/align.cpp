#include "forgemask/alignment/align.hpp"

#include "forgemask/alignment/warp.hpp"

#include <vector>

namespace forgemask::alignment {

const char* to_string(AlignStage stage) noexcept {
    switch (stage) {
        case AlignStage::detection: return "detection";
        case AlignStage::matching: return "matching";
        case AlignStage::estimation: return "estimation";
        case AlignStage::crop: return "crop";
    }
    return "unknown";
}

namespace {

std::vector<BinaryDescriptor> descriptors_of(const std::vector<Feature>& features) {
    std::vector<BinaryDescriptor> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(f.descriptor);
    return out;
}

}  // namespace

AlignedPair align_pair(const ImageBuffer& original, const ImageBuffer& edited,
                       const AlignConfig& cfg) {
    AlignmentStats stats;

    std::vector<Feature> feats_o, feats_e;
    try {
        feats_o = detect_keypoints(to_grayscale(original), cfg.detector);
        feats_e = detect_keypoints(to_grayscale(edited), cfg.detector);
    } catch (const DetectionError& e) {
        throw AlignmentFailure(AlignStage::detection, e.what(), stats);
    }
    stats.keypoints_original = static_cast<int>(feats_o.size());
    stats.keypoints_edited = static_cast<int>(feats_e.size());
    if (feats_o.empty() || feats_e.empty()) {
        throw AlignmentFailure(AlignStage::detection,
                               feats_o.empty() ? "no keypoints in original image"
                                               : "no keypoints in edited image",
                               stats);
    }

    const auto desc_o = descriptors_of(feats_o);
    const auto desc_e = descriptors_of(feats_e);
    const auto matches = match_descriptors(desc_o, desc_e, cfg.ratio);
    stats.matches = static_cast<int>(matches.size());
    if (matches.size() < 3) {
        throw AlignmentFailure(AlignStage::matching, "fewer than 3 matches survive the ratio test",
                               stats);
    }

    std::vector<PointPair> pairs;
    pairs.reserve(matches.size());
    for (const auto& m : matches) {
        const auto& ko = feats_o[static_cast<std::size_t>(m.query_idx)].keypoint;
        const auto& ke = feats_e[static_cast<std::size_t>(m.train_idx)].keypoint;
        pairs.push_back({{ko.x, ko.y}, {ke.x, ke.y}});
    }

    RansacResult coarse;
    try {
        coarse = estimate_affine_ransac(pairs, cfg.ransac);
    } catch (const EstimationError& e) {
        throw AlignmentFailure(AlignStage::estimation, e.what(), stats);
    }
    stats.coarse = coarse.transform;
    stats.inliers = static_cast<int>(coarse.inlier_count());
    stats.inlier_ratio = coarse.inlier_ratio;

    std::vector<PointPair> inliers;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (coarse.inlier_flags[i]) inliers.push_back(pairs[i]);
    }
    try {
        stats.refined = refine_affine_least_squares(inliers);
        stats.refinement_applied = true;
    } catch (const RefinementError&) {
        stats.refinement_applied = false;
    }

    const AffineTransform& t = stats.transform();
    const auto rect = compute_common_crop(t, original.width(), original.height(), edited.width(),
                                          edited.height());
    if (!rect) {
        throw AlignmentFailure(AlignStage::crop, "warped original does not overlap the edited image",
                               stats);
    }
    stats.crop = *rect;

    ImageBuffer warped = warp_affine(original, t, edited.width(), edited.height());
    AlignedPair out{crop(warped, *rect), crop(edited, *rect), stats};
    if (out.original.channels() != out.edited.channels()) {
        out.original = to_rgb(out.original);
        out.edited = to_rgb(out.edited);
    }
    return out;
}

}  // namespace forgemask::alignment
