#include "forgemask/semanticmask/similarity.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace forgemask::semanticmask {

SimilarityMap cosine_similarity_map(const DenseFeatureMap& a, const DenseFeatureMap& b) {
    if (a.grid_h() != b.grid_h() || a.grid_w() != b.grid_w() || a.dim() != b.dim()) {
        throw ParameterError("feature maps differ in shape");
    }
    SimilarityMap out{static_cast<int>(a.grid_h()), static_cast<int>(a.grid_w()), {}};
    out.scores.resize(a.cell_count());
    for (std::size_t i = 0; i < a.cell_count(); ++i) {
        const auto va = a.cell(i), vb = b.cell(i);
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t c = 0; c < va.size(); ++c) {
            dot += static_cast<double>(va[c]) * vb[c];
            na += static_cast<double>(va[c]) * va[c];
            nb += static_cast<double>(vb[c]) * vb[c];
        }
        na = std::sqrt(na);
        nb = std::sqrt(nb);
        out.scores[i] = (na < 1e-12 || nb < 1e-12) ? 0.0 : std::clamp(dot / (na * nb), -1.0, 1.0);
    }
    return out;
}

int score_bin(double score, int bins) noexcept {
    const double pos = (score + 1.0) * 0.5 * bins;
    return std::clamp(static_cast<int>(std::floor(pos)), 0, bins - 1);
}

double otsu_threshold(const SimilarityMap& scores, int bins) {
    using boost::multiprecision::cpp_int;
    if (bins < 2) throw ParameterError("Otsu needs at least 2 bins");
    if (scores.scores.empty()) throw DegenerateHistogramError("similarity map is empty");

    std::vector<long long> hist(static_cast<std::size_t>(bins), 0);
    for (double s : scores.scores) ++hist[static_cast<std::size_t>(score_bin(s, bins))];

    // With bin indices as class values, between-class variance at edge k is
    // (S0 * N - S * n0)^2 / (N^2 * n0 * n1); N^2 is common to every edge.
    const long long total = static_cast<long long>(scores.scores.size());
    cpp_int total_sum = 0;
    for (int j = 0; j < bins; ++j) total_sum += cpp_int(j) * hist[static_cast<std::size_t>(j)];

    long long n0 = 0;
    cpp_int s0 = 0;
    std::optional<int> best_edge;
    cpp_int best_num = 0, best_den = 1;
    for (int k = 1; k < bins; ++k) {
        n0 += hist[static_cast<std::size_t>(k - 1)];
        s0 += cpp_int(k - 1) * hist[static_cast<std::size_t>(k - 1)];
        const long long n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const cpp_int d = s0 * total - total_sum * n0;
        const cpp_int num = d * d;
        const cpp_int den = cpp_int(n0) * n1;
        // Strict comparison keeps the lowest edge among equal maxima.
        if (!best_edge || num * best_den > best_num * den) {
            best_edge = k;
            best_num = num;
            best_den = den;
        }
    }
    if (!best_edge) {
        throw DegenerateHistogramError("all similarity scores fall in one histogram bin");
    }
    return -1.0 + 2.0 * static_cast<double>(*best_edge) / bins;
}

EditMask binarize(const SimilarityMap& scores, double threshold) {
    std::vector<std::uint8_t> bits(scores.scores.size());
    std::transform(scores.scores.begin(), scores.scores.end(), bits.begin(),
                   [threshold](double s) { return static_cast<std::uint8_t>(s < threshold ? 1 : 0); });
    return EditMask(scores.grid_w, scores.grid_h, std::move(bits));
}

}  // namespace forgemask::semanticmask
