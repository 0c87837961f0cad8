#include "forgemask/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace forgemask::losses {

VectorSet::VectorSet(std::size_t dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
    if (dim_ == 0) throw ParameterError("vector dimension must be positive");
    if (data_.size() % dim_ != 0) throw ParameterError("vector data is not a multiple of dim");
}

void VectorSet::push_back(std::span<const double> v) {
    if (v.size() != dim_) throw ParameterError("vector has wrong dimension");
    data_.insert(data_.end(), v.begin(), v.end());
}

void VectorSet::push_back(std::span<const float> v) {
    if (v.size() != dim_) throw ParameterError("vector has wrong dimension");
    data_.insert(data_.end(), v.begin(), v.end());
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < 1e-12 || nb < 1e-12) return 0.0;
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

namespace {

// log(sum exp(x_i)).
double log_sum_exp(std::span<const double> x) {
    const double m = *std::max_element(x.begin(), x.end());
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

VectorSet unit_rows(const VectorSet& in) {
    VectorSet out(in.dim());
    std::vector<double> row(in.dim());
    for (std::size_t i = 0; i < in.size(); ++i) {
        const auto v = in[i];
        double n = 0.0;
        for (double x : v) {
            if (!std::isfinite(x)) throw ParameterError("feature vectors must be finite");
            n += x * x;
        }
        n = std::sqrt(n);
        for (std::size_t c = 0; c < v.size(); ++c) row[c] = n < 1e-12 ? 0.0 : v[c] / n;
        out.push_back(std::span<const double>(row));
    }
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void check_mask_pair(const MaskPair& p) {
    if (p.predicted.size() != p.truth.size()) throw ParameterError("mask sizes differ");
    if (p.predicted.empty()) throw ParameterError("masks are empty");
    for (double v : p.predicted) {
        if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("predicted values must lie in [0, 1]");
    }
    for (auto m : p.truth) {
        if (m > 1) throw ParameterError("truth values must be 0 or 1");
    }
}

}  // namespace

double contrastive_loss(const PixelFeatureSet& s) {
    if (s.forged.empty() || s.real.empty()) {
        throw UndefinedLossError("contrastive loss needs at least one forged and one real vector");
    }
    if (s.forged.dim() != s.real.dim()) throw ParameterError("forged and real dims differ");
    if (!(s.tau > 0.0)) throw ParameterError("temperature must be positive");

    // Zero vectors stay zero, giving cosine 0 as in cosine_similarity.
    const VectorSet f = unit_rows(s.forged);
    const VectorSet r = unit_rows(s.real);
    const std::size_t nf = f.size(), nr = r.size();

    std::vector<double> pos(nf), neg(nr);
    double total = 0.0;
    for (std::size_t i = 0; i < nf; ++i) {
        for (std::size_t j = 0; j < nf; ++j) pos[j] = std::clamp(dot(f[i], f[j]), -1.0, 1.0) / s.tau;
        for (std::size_t k = 0; k < nr; ++k) neg[k] = std::clamp(dot(f[i], r[k]), -1.0, 1.0) / s.tau;
        const double log_num = log_sum_exp(pos) - std::log(static_cast<double>(nf));
        total += -(log_num - log_sum_exp(neg));
    }
    return total / static_cast<double>(nf);
}

PixelFeatureSet sample_pixels(const semanticmask::DenseFeatureMap& features,
                              const semanticmask::EditMask& mask, std::size_t cap,
                              std::uint64_t seed, double tau) {
    if (static_cast<std::uint32_t>(mask.width()) != features.grid_w() ||
        static_cast<std::uint32_t>(mask.height()) != features.grid_h()) {
        throw ParameterError("mask and feature grid are not aligned");
    }
    if (cap == 0) throw ParameterError("sampling cap must be positive");

    std::vector<std::size_t> forged, real;
    const auto bits = mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) (bits[i] ? forged : real).push_back(i);
    if (forged.empty() || real.empty()) {
        throw UndefinedLossError("mask must contain both forged and real pixels");
    }

    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates with raw engine output, reproducible across standard libraries.
    auto subsample = [&](std::vector<std::size_t>& idx) {
        if (idx.size() <= cap) return;
        for (std::size_t i = 0; i < cap; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(cap);
        std::sort(idx.begin(), idx.end());
    };
    subsample(forged);
    subsample(real);

    PixelFeatureSet out{VectorSet(features.dim()), VectorSet(features.dim()), tau};
    for (auto i : forged) out.forged.push_back(features.cell(i));
    for (auto i : real) out.real.push_back(features.cell(i));
    return out;
}

double dice_loss(const MaskPair& p) {
    check_mask_pair(p);
    double inter = 0.0, sp = 0.0, sm = 0.0;
    for (std::size_t i = 0; i < p.predicted.size(); ++i) {
        inter += p.predicted[i] * p.truth[i];
        sp += p.predicted[i];
        sm += p.truth[i];
    }
    return 1.0 - (2.0 * inter + kDiceSmooth) / (sp + sm + kDiceSmooth);
}

double focal_loss(const MaskPair& p, const FocalParams& params) {
    check_mask_pair(p);
    if (!(params.gamma >= 0.0)) throw ParameterError("focal gamma must be >= 0");
    if (!(params.alpha > 0.0 && params.alpha < 1.0)) throw ParameterError("focal alpha must lie in (0, 1)");
    constexpr double kEps = 1e-7;
    double sum = 0.0;
    for (std::size_t i = 0; i < p.predicted.size(); ++i) {
        const double q = std::clamp(p.predicted[i], kEps, 1.0 - kEps);
        const bool positive = p.truth[i] == 1;
        const double pt = positive ? q : 1.0 - q;
        const double at = positive ? params.alpha : 1.0 - params.alpha;
        sum += -at * std::pow(1.0 - pt, params.gamma) * std::log(pt);
    }
    return sum / static_cast<double>(p.predicted.size());
}

double total_loss(double contrastive, double dice, double focal, const LossWeights& w) {
    return w.contrastive * contrastive + w.dice * dice + w.focal * focal;
}

}  // namespace forgemask::losses
