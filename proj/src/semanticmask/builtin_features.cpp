#include "forgemask/semanticmask/builtin_features.hpp"

#include "forgemask/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace forgemask::semanticmask {

namespace {

constexpr int kOrientationBins = 8;
// Mean gradient magnitude (luma units per 2 px) at which the histogram block
// reaches half of its full weight.
constexpr double kGradientHalfWeight = 16.0;
// Luma standard deviation mapped to 0; twice this saturates at +1.
constexpr double kStdCenter = 32.0;

}  // namespace

DenseFeatureMap extract_features_builtin(const ImageBuffer& img, int patch_size) {
    if (patch_size < 2) throw ParameterError("patch_size must be at least 2");
    if (img.width() < patch_size || img.height() < patch_size) {
        throw ParameterError("image " + std::to_string(img.width()) + "x" +
                             std::to_string(img.height()) + " is smaller than one " +
                             std::to_string(patch_size) + "-pixel patch");
    }
    const int gw = img.width() / patch_size;
    const int gh = img.height() / patch_size;
    const int ch = img.channels();
    const int n = patch_size * patch_size;

    std::vector<float> values(static_cast<std::size_t>(gw) * gh * kBuiltinFeatureDim, 0.0f);
    std::vector<double> luma(static_cast<std::size_t>(n));

    for (int gy = 0; gy < gh; ++gy) {
        for (int gx = 0; gx < gw; ++gx) {
            const int x0 = gx * patch_size, y0 = gy * patch_size;
            double rgb_sum[3] = {0.0, 0.0, 0.0};
            for (int y = 0; y < patch_size; ++y) {
                for (int x = 0; x < patch_size; ++x) {
                    double px[3];
                    for (int c = 0; c < 3; ++c) px[c] = img.at(x0 + x, y0 + y, ch == 3 ? c : 0);
                    for (int c = 0; c < 3; ++c) rgb_sum[c] += px[c];
                    luma[static_cast<std::size_t>(y) * patch_size + x] =
                        0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
                }
            }

            double hist[kOrientationBins] = {};
            double mag_sum = 0.0, mean = 0.0;
            auto L = [&](int x, int y) { return luma[static_cast<std::size_t>(y) * patch_size + x]; };
            for (int y = 0; y < patch_size; ++y) {
                for (int x = 0; x < patch_size; ++x) {
                    const double dx = L(std::min(x + 1, patch_size - 1), y) - L(std::max(x - 1, 0), y);
                    const double dy = L(x, std::min(y + 1, patch_size - 1)) - L(x, std::max(y - 1, 0));
                    const double mag = std::hypot(dx, dy);
                    mean += L(x, y);
                    if (mag == 0.0) continue;
                    const double theta = std::atan2(dy, dx) + std::numbers::pi;  // [0, 2pi]
                    int bin = static_cast<int>(theta / (2.0 * std::numbers::pi) * kOrientationBins);
                    bin = std::clamp(bin, 0, kOrientationBins - 1);
                    hist[bin] += mag;
                    mag_sum += mag;
                }
            }
            mean /= n;
            double var = 0.0;
            for (double v : luma) var += (v - mean) * (v - mean);
            var /= n;

            float* out = values.data() +
                         (static_cast<std::size_t>(gy) * gw + gx) * kBuiltinFeatureDim;
            for (int c = 0; c < 3; ++c) {
                out[c] = static_cast<float>((rgb_sum[c] / n - 127.5) / 127.5);
            }
            double hnorm = 0.0;
            for (double h : hist) hnorm += h * h;
            hnorm = std::sqrt(hnorm);
            if (hnorm > 0.0) {
                const double mean_mag = mag_sum / n;
                const double weight = mean_mag / (mean_mag + kGradientHalfWeight);
                for (int b = 0; b < kOrientationBins; ++b) {
                    out[3 + b] = static_cast<float>(hist[b] / hnorm * weight);
                }
            }
            out[11] = static_cast<float>(std::clamp((std::sqrt(var) - kStdCenter) / kStdCenter, -1.0, 1.0));
        }
    }
    return DenseFeatureMap(static_cast<std::uint32_t>(gh), static_cast<std::uint32_t>(gw),
                           kBuiltinFeatureDim, static_cast<std::uint32_t>(patch_size),
                           std::move(values));
}

}  // namespace forgemask::semanticmask
