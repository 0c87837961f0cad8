#include "forgemask/alignment/affine.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace forgemask::alignment {

bool AffineTransform::invertible() const noexcept {
    const double det = determinant();
    return std::isfinite(det) && std::abs(det) > kMinAbsDeterminant;
}

AffineTransform AffineTransform::inverse() const {
    if (!invertible()) throw ParameterError("affine transform is not invertible");
    const double det = determinant();
    const double i0 = a[4] / det, i1 = -a[1] / det;
    const double i3 = -a[3] / det, i4 = a[0] / det;
    return {{i0, i1, -(i0 * a[2] + i1 * a[5]), i3, i4, -(i3 * a[2] + i4 * a[5])}};
}

AffineTransform AffineTransform::compose(const AffineTransform& o) const noexcept {
    const auto& b = o.a;
    return {{a[0] * b[0] + a[1] * b[3], a[0] * b[1] + a[1] * b[4], a[0] * b[2] + a[1] * b[5] + a[2],
             a[3] * b[0] + a[4] * b[3], a[3] * b[1] + a[4] * b[4], a[3] * b[2] + a[4] * b[5] + a[5]}};
}

std::size_t RansacResult::inlier_count() const {
    return static_cast<std::size_t>(std::count(inlier_flags.begin(), inlier_flags.end(), true));
}

std::optional<AffineTransform> affine_from_three(const PointPair& p0, const PointPair& p1,
                                                 const PointPair& p2) {
    // Work relative to p0 so the 2x2 solve is well conditioned.
    const double ux = p1.src.x - p0.src.x, uy = p1.src.y - p0.src.y;
    const double vx = p2.src.x - p0.src.x, vy = p2.src.y - p0.src.y;
    const double det = ux * vy - uy * vx;
    const double scale = std::hypot(ux, uy) * std::hypot(vx, vy);
    if (!(scale > 0.0) || std::abs(det) <= 1e-9 * scale) return std::nullopt;

    const double dx1 = p1.dst.x - p0.dst.x, dy1 = p1.dst.y - p0.dst.y;
    const double dx2 = p2.dst.x - p0.dst.x, dy2 = p2.dst.y - p0.dst.y;
    AffineTransform t;
    t.a[0] = (dx1 * vy - dx2 * uy) / det;
    t.a[1] = (ux * dx2 - vx * dx1) / det;
    t.a[3] = (dy1 * vy - dy2 * uy) / det;
    t.a[4] = (ux * dy2 - vx * dy1) / det;
    t.a[2] = p0.dst.x - t.a[0] * p0.src.x - t.a[1] * p0.src.y;
    t.a[5] = p0.dst.y - t.a[3] * p0.src.x - t.a[4] * p0.src.y;
    if (!t.invertible()) return std::nullopt;
    return t;
}

double reprojection_error(const AffineTransform& t, const PointPair& pair) noexcept {
    const Point2 q = t.apply(pair.src);
    return std::hypot(q.x - pair.dst.x, q.y - pair.dst.y);
}

double sum_squared_error(const AffineTransform& t, std::span<const PointPair> pairs) noexcept {
    double s = 0.0;
    for (const auto& p : pairs) {
        const double e = reprojection_error(t, p);
        s += e * e;
    }
    return s;
}

RansacResult estimate_affine_ransac(std::span<const PointPair> pairs, const RansacConfig& cfg) {
    const std::size_t n = pairs.size();
    if (n < 3) {
        throw EstimationError("RANSAC needs at least 3 correspondences, got " + std::to_string(n));
    }
    if (cfg.iterations < 1) throw ParameterError("RANSAC iterations must be positive");
    if (!(cfg.reproj_threshold > 0.0)) throw ParameterError("reprojection threshold must be positive");

    // Raw engine output reduced modulo n: identical draws on every standard library.
    std::mt19937_64 rng(cfg.seed);
    auto draw = [&] { return static_cast<std::size_t>(rng() % n); };

    std::optional<AffineTransform> best;
    std::size_t best_count = 0;
    double best_error = 0.0;
    for (int it = 0; it < cfg.iterations; ++it) {
        const std::size_t i = draw();
        std::size_t j = draw();
        while (j == i) j = draw();
        std::size_t k = draw();
        while (k == i || k == j) k = draw();

        const auto model = affine_from_three(pairs[i], pairs[j], pairs[k]);
        if (!model) continue;

        std::size_t count = 0;
        double error = 0.0;
        for (const auto& p : pairs) {
            const double e = reprojection_error(*model, p);
            if (e <= cfg.reproj_threshold) {
                ++count;
                error += e;
            }
        }
        if (!best || count > best_count || (count == best_count && error < best_error)) {
            best = model;
            best_count = count;
            best_error = error;
        }
    }
    if (!best) throw EstimationError("every minimal sample was collinear");
    if (best_count < 3) {
        throw EstimationError("best model has only " + std::to_string(best_count) + " inliers");
    }

    RansacResult result;
    result.transform = *best;
    result.inlier_flags.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.inlier_flags[i] = reprojection_error(*best, pairs[i]) <= cfg.reproj_threshold;
    }
    result.inlier_ratio = static_cast<double>(best_count) / static_cast<double>(n);
    return result;
}

AffineTransform refine_affine_least_squares(std::span<const PointPair> pairs) {
    const auto n = static_cast<Eigen::Index>(pairs.size());
    if (n < 3) throw RefinementError("least squares needs at least 3 correspondences");

    double mx = 0.0, my = 0.0;
    for (const auto& p : pairs) {
        mx += p.src.x;
        my += p.src.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    Eigen::MatrixXd design(n, 3);
    Eigen::MatrixXd rhs(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = pairs[static_cast<std::size_t>(i)];
        design(i, 0) = p.src.x - mx;
        design(i, 1) = p.src.y - my;
        design(i, 2) = 1.0;
        rhs(i, 0) = p.dst.x;
        rhs(i, 1) = p.dst.y;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw RefinementError("correspondences are collinear (rank deficient)");
    const Eigen::MatrixXd coef = qr.solve(rhs);

    AffineTransform t;
    t.a[0] = coef(0, 0);
    t.a[1] = coef(1, 0);
    t.a[2] = coef(2, 0) - coef(0, 0) * mx - coef(1, 0) * my;
    t.a[3] = coef(0, 1);
    t.a[4] = coef(1, 1);
    t.a[5] = coef(2, 1) - coef(0, 1) * mx - coef(1, 1) * my;
    if (!t.invertible()) throw RefinementError("refined transform is not invertible");
    return t;
}

}  // namespace forgemask::alignment
