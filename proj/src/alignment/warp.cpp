#include "forgemask/alignment/warp.hpp"

#include "forgemask/error.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <vector>

namespace forgemask::alignment {

namespace {

constexpr double kInsideEps = 1e-6;

// Shared by warp_affine and compute_common_crop so a cropped pixel is never black.
bool sample_inside(double u, double v, int w, int h) noexcept {
    return u >= -kInsideEps && v >= -kInsideEps && u <= (w - 1) + kInsideEps &&
           v <= (h - 1) + kInsideEps;
}

}  // namespace

ImageBuffer warp_affine(const ImageBuffer& img, const AffineTransform& t, int out_w, int out_h) {
    if (!t.invertible()) throw ParameterError("warp_affine: transform is not invertible");
    const AffineTransform inv = t.inverse();
    const int w = img.width(), h = img.height(), ch = img.channels();
    ImageBuffer out(out_w, out_h, ch);

    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const Point2 s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
            if (!sample_inside(s.x, s.y, w, h)) continue;
            const double u = std::clamp(s.x, 0.0, static_cast<double>(w - 1));
            const double v = std::clamp(s.y, 0.0, static_cast<double>(h - 1));
            const int x0 = static_cast<int>(u), y0 = static_cast<int>(v);
            const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
            const double fx = u - x0, fy = v - y0;
            for (int c = 0; c < ch; ++c) {
                const double top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
                const double bottom = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
                const double value = top * (1.0 - fy) + bottom * fy;
                out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
            }
        }
    }
    return out;
}

std::optional<Rect> compute_common_crop(const AffineTransform& t, int src_w, int src_h, int dst_w,
                                        int dst_h) {
    if (!t.invertible()) throw ParameterError("compute_common_crop: transform is not invertible");
    if (src_w < 1 || src_h < 1 || dst_w < 1 || dst_h < 1) {
        throw ParameterError("compute_common_crop: dimensions must be positive");
    }
    const AffineTransform inv = t.inverse();
    auto inside = [&](int x, int y) {
        const Point2 s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
        return sample_inside(s.x, s.y, src_w, src_h);
    };

    // Valid pixels of each destination row form one interval (convex footprint).
    // The analytic bounds are snapped onto the shared predicate.
    std::vector<int> left(static_cast<std::size_t>(dst_h)), right(left.size());
    for (int y = 0; y < dst_h; ++y) {
        double lo = 0.0, hi = dst_w - 1.0;
        auto restrict = [&](double slope, double offset, double limit) {
            // 0 <= slope * x + offset <= limit
            if (std::abs(slope) < 1e-15) {
                if (offset < -kInsideEps || offset > limit + kInsideEps) hi = lo - 1.0;
                return;
            }
            double a = (-offset) / slope, b = (limit - offset) / slope;
            if (a > b) std::swap(a, b);
            lo = std::max(lo, a);
            hi = std::min(hi, b);
        };
        restrict(inv.a[0], inv.a[1] * y + inv.a[2], src_w - 1.0);
        restrict(inv.a[3], inv.a[4] * y + inv.a[5], src_h - 1.0);

        int l = INT_MAX, r = INT_MIN;
        if (lo <= hi + 1.0) {
            l = std::clamp(static_cast<int>(std::ceil(lo)), 0, dst_w - 1);
            r = std::clamp(static_cast<int>(std::floor(hi)), 0, dst_w - 1);
            while (l > 0 && inside(l - 1, y)) --l;
            while (l <= r && !inside(l, y)) ++l;
            while (r < dst_w - 1 && inside(r + 1, y)) ++r;
            while (r >= l && !inside(r, y)) --r;
            if (l > r) {
                l = INT_MAX;
                r = INT_MIN;
            }
        }
        left[static_cast<std::size_t>(y)] = l;
        right[static_cast<std::size_t>(y)] = r;
    }

    std::optional<Rect> best;
    long long best_area = 0;
    for (int y0 = 0; y0 < dst_h; ++y0) {
        int l = INT_MIN, r = INT_MAX;
        for (int y1 = y0; y1 < dst_h; ++y1) {
            l = std::max(l, left[static_cast<std::size_t>(y1)]);
            r = std::min(r, right[static_cast<std::size_t>(y1)]);
            if (l > r) break;
            const long long area = static_cast<long long>(r - l + 1) * (y1 - y0 + 1);
            const bool better = !best || area > best_area ||
                                (area == best_area && (l < best->x || (l == best->x && y0 < best->y)));
            if (better) {
                best = Rect{l, y0, r - l + 1, y1 - y0 + 1};
                best_area = area;
            }
        }
    }
    return best;
}

}  // namespace forgemask::alignment
