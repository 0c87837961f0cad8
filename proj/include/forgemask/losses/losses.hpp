#pragma once

#include "forgemask/error.hpp"
#include "forgemask/semanticmask/edit_mask.hpp"
#include "forgemask/semanticmask/feature_map.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace forgemask::losses {

/// Row-major set of equal-length vectors.
class VectorSet {
public:
    VectorSet() = default;
    explicit VectorSet(std::size_t dim) : dim_(dim) {}
    VectorSet(std::size_t dim, std::vector<double> data);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    bool empty() const noexcept { return size() == 0; }
    std::span<const double> operator[](std::size_t i) const noexcept {
        return std::span<const double>(data_).subspan(i * dim_, dim_);
    }
    void push_back(std::span<const double> v);
    void push_back(std::span<const float> v);

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

/// Forged and real pixel features plus the softmax temperature.
struct PixelFeatureSet {
    VectorSet forged;
    VectorSet real;
    double tau = 0.1;
};

/// Predicted probabilities in [0, 1] against a binary truth, same length.
struct MaskPair {
    std::vector<double> predicted;
    std::vector<std::uint8_t> truth;
};

/// Raised when a loss has no forged or no real sample to work with.
class UndefinedLossError : public Error {
public:
    using Error::Error;
};

/// Cosine similarity; 0 when either vector has norm < 1e-12.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Intra-image contrastive loss:
///   mean_i -log( (1/n_f) sum_j exp(sim(f_i, f_j)/tau) / sum_k exp(sim(f_i, r_k)/tau) )
/// with j over every forged vector including i itself.
double contrastive_loss(const PixelFeatureSet& s);

inline constexpr std::size_t kDefaultSampleCap = 4096;

/// Splits feature cells by `mask` (same grid shape) and keeps at most `cap`
/// per class, drawn uniformly without replacement with `seed`. Kept indices are
/// in ascending cell order.
PixelFeatureSet sample_pixels(const semanticmask::DenseFeatureMap& features,
                              const semanticmask::EditMask& mask, std::size_t cap,
                              std::uint64_t seed, double tau = 0.1);

inline constexpr double kDiceSmooth = 1.0;

/// 1 - (2 sum(p m) + eps) / (sum p + sum m + eps), eps = 1.
double dice_loss(const MaskPair& p);

struct FocalParams {
    double gamma = 2.0;
    double alpha = 0.25;
};

/// Mean of -alpha_t (1 - p_t)^gamma log p_t with probabilities clamped to
/// [1e-7, 1 - 1e-7].
double focal_loss(const MaskPair& p, const FocalParams& params = {});

/// Loss weights (lambda1..3) of the training objective.
struct LossWeights {
    double contrastive = 1.0;
    double dice = 4.0;
    double focal = 20.0;
};

double total_loss(double contrastive, double dice, double focal, const LossWeights& w = {});

}  // namespace forgemask::losses
