#include "forgemask/alignment/matching.hpp"

#include "forgemask/error.hpp"

#include <limits>

namespace forgemask::alignment {

std::vector<Match> match_descriptors(std::span<const BinaryDescriptor> query,
                                     std::span<const BinaryDescriptor> train, double ratio) {
    if (query.empty() || train.empty()) throw ParameterError("descriptor lists must be non-empty");
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ParameterError("ratio must lie in (0, 1]");

    std::vector<Match> out;
    for (std::size_t q = 0; q < query.size(); ++q) {
        int best = std::numeric_limits<int>::max();
        int second = std::numeric_limits<int>::max();
        int best_idx = -1;
        for (std::size_t t = 0; t < train.size(); ++t) {
            const int d = hamming_distance(query[q], train[t]);
            if (d < best) {
                second = best;
                best = d;
                best_idx = static_cast<int>(t);
            } else if (d < second) {
                second = d;
            }
        }
        const bool degenerate = train.size() == 1 || second == 0;
        const bool keep = degenerate ? best == 0 : best <= ratio * second;
        if (keep) out.push_back({static_cast<int>(q), best_idx, best});
    }
    return out;
}

}  // namespace forgemask::alignment
