#include "forgemask/semanticmask/annotate.hpp"

#include "forgemask/semanticmask/builtin_features.hpp"

#include <chrono>

namespace forgemask::semanticmask {

std::string feature_source_id(const FeatureSource& source) {
    if (const auto* b = std::get_if<BuiltinFeatures>(&source)) {
        return "builtin/p" + std::to_string(b->patch_size);
    }
    return std::get<PrecomputedFeatures>(source).source_id;
}

Annotation annotate_masks(const ImageBuffer& aligned_original, const ImageBuffer& aligned_edited,
                          const FeatureSource& source, const AnnotateConfig& cfg) {
    using clock = std::chrono::steady_clock;
    if (aligned_original.width() != aligned_edited.width() ||
        aligned_original.height() != aligned_edited.height()) {
        throw AnnotationFailure("input", "aligned images differ in size");
    }

    Annotation out;
    out.stats.feature_source = feature_source_id(source);

    const auto t0 = clock::now();
    DenseFeatureMap fa, fb;
    try {
        if (const auto* b = std::get_if<BuiltinFeatures>(&source)) {
            fa = extract_features_builtin(aligned_original, b->patch_size);
            fb = extract_features_builtin(aligned_edited, b->patch_size);
        } else {
            const auto& pre = std::get<PrecomputedFeatures>(source);
            fa = pre.original;
            fb = pre.edited;
        }
    } catch (const Error& e) {
        throw AnnotationFailure("features", e.what());
    }
    const auto t1 = clock::now();

    try {
        out.similarity = cosine_similarity_map(fa, fb);
    } catch (const Error& e) {
        throw AnnotationFailure("similarity", e.what());
    }
    out.stats.grid_h = out.similarity.grid_h;
    out.stats.grid_w = out.similarity.grid_w;
    try {
        out.stats.threshold = otsu_threshold(out.similarity, cfg.otsu_bins);
    } catch (const DegenerateHistogramError& e) {
        throw AnnotationFailure("threshold", e.what());
    }
    out.grid_mask = binarize(out.similarity, out.stats.threshold);
    if (std::holds_alternative<BuiltinFeatures>(source)) {
        out.mask = grid_mask_to_image(out.grid_mask, static_cast<int>(fa.patch_size()),
                                      aligned_original.width(), aligned_original.height(),
                                      cfg.mask_width, cfg.mask_height);
    } else {
        out.mask = resize_mask(out.grid_mask, cfg.mask_width, cfg.mask_height);
    }
    const auto t2 = clock::now();

    if (out.mask.edited_count() == 0) {
        throw AnnotationFailure("mask", "no edited pixel survives resizing");
    }
    out.stats.edited_fraction = out.mask.edited_fraction();
    out.stats.feature_seconds = std::chrono::duration<double>(t1 - t0).count();
    out.stats.similarity_seconds = std::chrono::duration<double>(t2 - t1).count();
    return out;
}

}  // namespace forgemask::semanticmask
