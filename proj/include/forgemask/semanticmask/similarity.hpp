#pragma once

#include "forgemask/error.hpp"
#include "forgemask/semanticmask/edit_mask.hpp"
#include "forgemask/semanticmask/feature_map.hpp"

#include <vector>

namespace forgemask::semanticmask {

struct SimilarityMap {
    int grid_h = 0;
    int grid_w = 0;
    /// Row-major cosine scores in [-1, 1].
    std::vector<double> scores;
};

/// Per-cell cosine similarity. A cell where either vector has norm < 1e-12
/// scores 0. Throws ParameterError on shape mismatch.
SimilarityMap cosine_similarity_map(const DenseFeatureMap& a, const DenseFeatureMap& b);

inline constexpr int kDefaultOtsuBins = 256;

/// The histogram has fewer than two occupied bins, so no threshold separates it.
class DegenerateHistogramError : public Error {
public:
    explicit DegenerateHistogramError(const std::string& what)
        : Error("degenerate histogram: " + what) {}
};

/// Bin of `score` in a `bins`-bin histogram over [-1, 1]; 1.0 lands in the last bin.
int score_bin(double score, int bins) noexcept;

/// Otsu's threshold over a fixed [-1, 1] histogram. Candidates are the interior
/// bin edges -1 + 2k/bins; the one maximizing between-class variance wins,
/// the lowest on ties. Comparisons are exact (integer arithmetic).
double otsu_threshold(const SimilarityMap& scores, int bins = kDefaultOtsuBins);

/// bit = 1 iff score < threshold. Mask has grid dimensions.
EditMask binarize(const SimilarityMap& scores, double threshold);

}  // namespace forgemask::semanticmask
