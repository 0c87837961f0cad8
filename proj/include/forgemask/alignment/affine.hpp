#pragma once

#include "forgemask/error.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace forgemask::alignment {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// A point in the original image and its correspondence in the edited image.
struct PointPair {
    Point2 src;
    Point2 dst;
};

/// 2x3 affine map (x, y) -> (a1 x + a2 y + a3, a4 x + a5 y + a6).
struct AffineTransform {
    std::array<double, 6> a{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};

    static AffineTransform identity() { return {}; }
    static AffineTransform translation(double tx, double ty) {
        return {{1.0, 0.0, tx, 0.0, 1.0, ty}};
    }

    Point2 apply(Point2 p) const noexcept {
        return {a[0] * p.x + a[1] * p.y + a[2], a[3] * p.x + a[4] * p.y + a[5]};
    }
    double determinant() const noexcept { return a[0] * a[4] - a[1] * a[3]; }
    bool invertible() const noexcept;
    /// Throws ParameterError when not invertible.
    AffineTransform inverse() const;
    /// (this o other)(p) == this->apply(other.apply(p)).
    AffineTransform compose(const AffineTransform& other) const noexcept;
};

inline constexpr double kMinAbsDeterminant = 1e-8;

struct RansacConfig {
    int iterations = 2000;
    double reproj_threshold = 3.0;
    std::uint64_t seed = 0x5EED;
};

struct RansacResult {
    AffineTransform transform;
    /// One flag per input pair; true when the pair is an inlier of `transform`.
    std::vector<bool> inlier_flags;
    double inlier_ratio = 0.0;

    std::size_t inlier_count() const;
};

/// No model supported by at least three inliers could be found.
class EstimationError : public Error {
public:
    using Error::Error;
};

/// The least-squares system was rank deficient.
class RefinementError : public Error {
public:
    using Error::Error;
};

/// Exact affine through three correspondences; nullopt when the source points
/// are collinear or the result is not invertible.
std::optional<AffineTransform> affine_from_three(const PointPair& p0, const PointPair& p1,
                                                 const PointPair& p2);

/// Euclidean distance between t(src) and dst.
double reprojection_error(const AffineTransform& t, const PointPair& pair) noexcept;

/// RANSAC over minimal three-point samples. The best model has the most
/// inliers (error <= reproj_threshold); ties go to the lower summed inlier error.
/// Deterministic for a fixed seed. Throws EstimationError.
RansacResult estimate_affine_ransac(std::span<const PointPair> pairs, const RansacConfig& cfg = {});

/// Minimizes sum ||A src - dst||^2 by column-pivoted QR. Throws RefinementError
/// on rank-deficient input (fewer than three non-collinear source points).
AffineTransform refine_affine_least_squares(std::span<const PointPair> pairs);

/// Sum of squared reprojection errors.
double sum_squared_error(const AffineTransform& t, std::span<const PointPair> pairs) noexcept;

}  // namespace forgemask::alignment
