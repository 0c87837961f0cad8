#pragma once

#include "forgemask/error.hpp"
#include "forgemask/imagecore/image.hpp"
#include "forgemask/semanticmask/edit_mask.hpp"
#include "forgemask/semanticmask/feature_map.hpp"
#include "forgemask/semanticmask/similarity.hpp"

#include <string>
#include <variant>

namespace forgemask::semanticmask {

struct BuiltinFeatures {
    int patch_size = 16;
};

/// Externally computed features of the two aligned images.
struct PrecomputedFeatures {
    DenseFeatureMap original;
    DenseFeatureMap edited;
    std::string source_id = "fmap";
};

using FeatureSource = std::variant<BuiltinFeatures, PrecomputedFeatures>;

std::string feature_source_id(const FeatureSource& source);

struct AnnotateConfig {
    int otsu_bins = kDefaultOtsuBins;
    int mask_width = kMaskSize;
    int mask_height = kMaskSize;
};

struct MaskStats {
    double threshold = 0.0;
    /// Edited fraction of the output mask.
    double edited_fraction = 0.0;
    std::string feature_source;
    int grid_h = 0;
    int grid_w = 0;
    double feature_seconds = 0.0;
    double similarity_seconds = 0.0;
};

struct Annotation {
    EditMask mask;
    /// Mask at feature-grid resolution, before resizing.
    EditMask grid_mask;
    SimilarityMap similarity;
    MaskStats stats;
};

class AnnotationFailure : public Error {
public:
    AnnotationFailure(std::string stage, const std::string& what)
        : Error("annotation failed at " + stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// features -> cosine similarity -> Otsu -> binarize -> resize. Builtin masks
/// are laid out with patch geometry; precomputed grids are stretched over the
/// image. Throws AnnotationFailure (stages: input, features, similarity,
/// threshold, mask).
Annotation annotate_masks(const ImageBuffer& aligned_original, const ImageBuffer& aligned_edited,
                          const FeatureSource& source, const AnnotateConfig& cfg = {});

}  // namespace forgemask::semanticmask
