#pragma once

#include "forgemask/alignment/features.hpp"

#include <span>
#include <vector>

namespace forgemask::alignment {

struct Match {
    int query_idx = 0;
    int train_idx = 0;
    /// Hamming distance, 0..256.
    int distance = 0;

    friend bool operator==(const Match&, const Match&) = default;
};

/// Lowe's ratio threshold used by the annotation pipeline.
inline constexpr double kDefaultRatio = 0.75;

/// Brute-force Hamming matching with the nearest/second-nearest ratio test.
///
/// A query is matched to its nearest train descriptor when d1 <= ratio * d2.
/// When d2 == 0, or the train set has a single element, only exact (d1 == 0)
/// matches are emitted. Ties on the nearest distance go to the lowest train index.
std::vector<Match> match_descriptors(std::span<const BinaryDescriptor> query,
                                     std::span<const BinaryDescriptor> train,
                                     double ratio = kDefaultRatio);

}  // namespace forgemask::alignment
