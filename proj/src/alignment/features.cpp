#include "forgemask/alignment/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace forgemask::alignment {

namespace {

// Steered-BRIEF test pairs (x1, y1, x2, y2), coordinates in [-13, 13].
constexpr int kPattern[256][4] = {
#include "brief_pattern.inc"
};

// Radius of the intensity-centroid disc.
constexpr int kOrientationRadius = 15;
// Keeps both the orientation disc and any rotated test point inside the image.
constexpr int kBorder = 20;
constexpr double kHarrisK = 0.04;
constexpr int kHarrisHalfBlock = 3;

// Bresenham circle of radius 3, clockwise from 12 o'clock.
constexpr int kCircle[16][2] = {{0, -3}, {1, -3},  {2, -2},  {3, -1}, {3, 0},  {3, 1},
                                {2, 2},  {1, 3},   {0, 3},   {-1, 3}, {-2, 2}, {-3, 1},
                                {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};
constexpr int kArcLength = 9;

class GrayView {
public:
    explicit GrayView(const ImageBuffer& img) : img_(img) {}
    int operator()(int x, int y) const noexcept { return img_.at(x, y); }
    int width() const noexcept { return img_.width(); }
    int height() const noexcept { return img_.height(); }

private:
    const ImageBuffer& img_;
};

bool has_arc(const int (&state)[16], int wanted) {
    int run = 0;
    // Walk the circle twice to catch arcs that wrap around index 0.
    for (int i = 0; i < 16 + kArcLength - 1; ++i) {
        if (state[i % 16] == wanted) {
            if (++run >= kArcLength) return true;
        } else {
            run = 0;
        }
    }
    return false;
}

// Segment-test score: 0 when (x, y) is not a FAST-9 corner, otherwise the
// larger of the summed brighter / darker excesses over the threshold.
int fast_score(const GrayView& g, int x, int y, int threshold) {
    const int center = g(x, y);
    const int hi = center + threshold;
    const int lo = center - threshold;

    // At least two of the four compass points must agree for any 9-arc.
    int bright = 0, dark = 0;
    for (int k = 0; k < 16; k += 4) {
        const int v = g(x + kCircle[k][0], y + kCircle[k][1]);
        bright += v > hi;
        dark += v < lo;
    }
    if (bright < 2 && dark < 2) return 0;

    int state[16];
    int sum_bright = 0, sum_dark = 0;
    for (int k = 0; k < 16; ++k) {
        const int v = g(x + kCircle[k][0], y + kCircle[k][1]);
        if (v > hi) {
            state[k] = 1;
            sum_bright += v - hi;
        } else if (v < lo) {
            state[k] = -1;
            sum_dark += lo - v;
        } else {
            state[k] = 0;
        }
    }
    const bool is_bright = has_arc(state, 1);
    const bool is_dark = has_arc(state, -1);
    if (!is_bright && !is_dark) return 0;
    return std::max(is_bright ? sum_bright : 0, is_dark ? sum_dark : 0);
}

double harris_response(const GrayView& g, int cx, int cy) {
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int y = cy - kHarrisHalfBlock; y <= cy + kHarrisHalfBlock; ++y) {
        for (int x = cx - kHarrisHalfBlock; x <= cx + kHarrisHalfBlock; ++x) {
            const double ix = (g(x + 1, y - 1) + 2 * g(x + 1, y) + g(x + 1, y + 1)) -
                              (g(x - 1, y - 1) + 2 * g(x - 1, y) + g(x - 1, y + 1));
            const double iy = (g(x - 1, y + 1) + 2 * g(x, y + 1) + g(x + 1, y + 1)) -
                              (g(x - 1, y - 1) + 2 * g(x, y - 1) + g(x + 1, y - 1));
            sxx += ix * ix;
            syy += iy * iy;
            sxy += ix * iy;
        }
    }
    // Unit-range gradients averaged over the block, so responses are O(1).
    const double norm = 1.0 / ((8.0 * 255.0) * (8.0 * 255.0) * 49.0);
    sxx *= norm;
    syy *= norm;
    sxy *= norm;
    return sxx * syy - sxy * sxy - kHarrisK * (sxx + syy) * (sxx + syy);
}

float centroid_angle(const GrayView& g, int cx, int cy) {
    long long m01 = 0, m10 = 0;
    const int r2 = kOrientationRadius * kOrientationRadius;
    for (int v = -kOrientationRadius; v <= kOrientationRadius; ++v) {
        for (int u = -kOrientationRadius; u <= kOrientationRadius; ++u) {
            if (u * u + v * v > r2) continue;
            const int i = g(cx + u, cy + v);
            m10 += static_cast<long long>(u) * i;
            m01 += static_cast<long long>(v) * i;
        }
    }
    double deg = std::atan2(static_cast<double>(m01), static_cast<double>(m10)) * 180.0 /
                 std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg -= 360.0;
    return static_cast<float>(deg);
}

// Separable Gaussian (sigma 2, 7 taps) with replicated borders.
std::vector<float> smooth(const ImageBuffer& gray) {
    constexpr int kRadius = 3;
    constexpr double kSigma = 2.0;
    float kernel[2 * kRadius + 1];
    double total = 0.0;
    for (int i = -kRadius; i <= kRadius; ++i) {
        kernel[i + kRadius] = static_cast<float>(std::exp(-(i * i) / (2.0 * kSigma * kSigma)));
        total += kernel[i + kRadius];
    }
    for (float& k : kernel) k = static_cast<float>(k / total);

    const int w = gray.width(), h = gray.height();
    std::vector<float> tmp(static_cast<std::size_t>(w) * h), out(tmp.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int i = -kRadius; i <= kRadius; ++i) {
                acc += kernel[i + kRadius] * gray.at(std::clamp(x + i, 0, w - 1), y);
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int i = -kRadius; i <= kRadius; ++i) {
                acc += kernel[i + kRadius] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

BinaryDescriptor describe(const std::vector<float>& smoothed, int w, const Keypoint& kp) {
    const double rad = kp.angle * std::numbers::pi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const int cx = static_cast<int>(kp.x), cy = static_cast<int>(kp.y);
    auto sample = [&](int px, int py) {
        const int rx = static_cast<int>(std::lround(px * c - py * s));
        const int ry = static_cast<int>(std::lround(px * s + py * c));
        return smoothed[static_cast<std::size_t>(cy + ry) * w + (cx + rx)];
    };
    BinaryDescriptor d;
    for (int i = 0; i < 256; ++i) {
        const auto& p = kPattern[i];
        if (sample(p[0], p[1]) < sample(p[2], p[3])) {
            d.bits[i / 8] = static_cast<std::uint8_t>(d.bits[i / 8] | (1u << (i % 8)));
        }
    }
    return d;
}

}  // namespace

std::vector<Feature> detect_keypoints(const ImageBuffer& gray, const DetectorConfig& cfg) {
    if (gray.channels() != 1) throw DetectionError("keypoint detection needs a 1-channel image");
    if (gray.width() < kMinDetectionSize || gray.height() < kMinDetectionSize) {
        throw DetectionError("image " + std::to_string(gray.width()) + "x" +
                             std::to_string(gray.height()) + " is below the minimum size " +
                             std::to_string(kMinDetectionSize));
    }
    if (cfg.max_count < 1) throw DetectionError("max_count must be positive");

    const GrayView g(gray);
    const int w = gray.width(), h = gray.height();
    // Scores are needed one pixel beyond the detection window for suppression.
    const int x0 = kBorder - 1, x1 = w - kBorder + 1;
    const int y0 = kBorder - 1, y1 = h - kBorder + 1;
    if (x1 - x0 < 3 || y1 - y0 < 3) return {};

    const int sw = x1 - x0, sh = y1 - y0;
    std::vector<int> score(static_cast<std::size_t>(sw) * sh, 0);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            score[static_cast<std::size_t>(y - y0) * sw + (x - x0)] =
                fast_score(g, x, y, cfg.fast_threshold);
        }
    }
    auto score_at = [&](int x, int y) { return score[static_cast<std::size_t>(y - y0) * sw + (x - x0)]; };

    std::vector<Keypoint> candidates;
    for (int y = kBorder; y < h - kBorder; ++y) {
        for (int x = kBorder; x < w - kBorder; ++x) {
            const int s = score_at(x, y);
            if (s == 0) continue;
            // Strict against earlier neighbours, non-strict against later ones,
            // so exactly one pixel of a tied plateau survives.
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int n = score_at(x + dx, y + dy);
                    const bool earlier = dy < 0 || (dy == 0 && dx < 0);
                    if (earlier ? s <= n : s < n) {
                        is_max = false;
                        break;
                    }
                }
            }
            if (!is_max) continue;
            const double r = harris_response(g, x, y);
            if (r <= 0.0) continue;
            candidates.push_back({static_cast<float>(x), static_cast<float>(y),
                                  static_cast<float>(r), 0.0f});
        }
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const Keypoint& a, const Keypoint& b) {
        return a.response > b.response;
    });
    if (candidates.size() > static_cast<std::size_t>(cfg.max_count)) {
        candidates.resize(static_cast<std::size_t>(cfg.max_count));
    }
    if (candidates.empty()) return {};

    const std::vector<float> smoothed = smooth(gray);
    std::vector<Feature> out;
    out.reserve(candidates.size());
    for (Keypoint kp : candidates) {
        kp.angle = centroid_angle(g, static_cast<int>(kp.x), static_cast<int>(kp.y));
        out.push_back({kp, describe(smoothed, w, kp)});
    }
    return out;
}

}  // namespace forgemask::alignment
