#include "forgemask/alignment/affine.hpp"
#include "forgemask/alignment/align.hpp"
#include "forgemask/alignment/features.hpp"
#include "forgemask/alignment/matching.hpp"
#include "forgemask/alignment/warp.hpp"
#include "forgemask/error.hpp"
#include "synthetic.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <set>

using namespace forgemask;
using namespace forgemask::alignment;

namespace {

// 3x3 box filter with clamped borders.
ImageBuffer box_blur(const ImageBuffer& img) {
    ImageBuffer out(img.width(), img.height(), img.channels());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < img.channels(); ++c) {
                int sum = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        sum += img.at(std::clamp(x + dx, 0, img.width() - 1), std::clamp(y + dy, 0, img.height() - 1), c);
                    }
                }
                out.at(x, y, c) = static_cast<std::uint8_t>((sum + 4) / 9);
            }
        }
    }
    return out;
}

BinaryDescriptor random_descriptor(std::mt19937_64& rng) {
    BinaryDescriptor d;
    for (auto& b : d.bits) b = static_cast<std::uint8_t>(rng() & 0xFF);
    return d;
}

// Descriptor at Hamming distance `k` from `base`, flipping the first k bits.
BinaryDescriptor flip_bits(BinaryDescriptor base, int k) {
    for (int i = 0; i < k; ++i) base.bits[i / 8] ^= static_cast<std::uint8_t>(1u << (i % 8));
    return base;
}

ImageBuffer checkerboard(int size, int square, int levels) {
    ImageBuffer img(size, size, 1);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const int cell = (x / square) + 3 * (y / square);
            img.at(x, y) = static_cast<std::uint8_t>(levels == 2 ? ((x / square + y / square) % 2) * 255
                                                                 : 30 + 60 * (cell % levels));
        }
    }
    return img;
}

const AffineTransform kExampleA{{1.1, 0.02, 5.0, -0.01, 0.98, -3.0}};

std::vector<PointPair> exact_pairs(const AffineTransform& a, int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coord(0.0, 500.0);
    std::vector<PointPair> pairs;
    for (int i = 0; i < n; ++i) {
        const Point2 p{coord(rng), coord(rng)};
        pairs.push_back({p, a.apply(p)});
    }
    return pairs;
}

// Normal-equation least squares solved with an explicit pseudo-inverse.
AffineTransform normal_equation_oracle(const std::vector<PointPair>& pairs) {
    Eigen::MatrixXd m(pairs.size(), 3);
    Eigen::VectorXd bx(pairs.size()), by(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        m(i, 0) = pairs[i].src.x;
        m(i, 1) = pairs[i].src.y;
        m(i, 2) = 1.0;
        bx(i) = pairs[i].dst.x;
        by(i) = pairs[i].dst.y;
    }
    const Eigen::Matrix3d mtm = m.transpose() * m;
    const Eigen::Matrix3d inv = mtm.inverse();
    const Eigen::Vector3d ax = inv * (m.transpose() * bx);
    const Eigen::Vector3d ay = inv * (m.transpose() * by);
    return AffineTransform{{ax(0), ax(1), ax(2), ay(0), ay(1), ay(2)}};
}

// Valid-pixel predicate written out from the warp definition.
bool samples_inside(const AffineTransform& inv, int x, int y, int w, int h) {
    const double sx = inv.a[0] * x + inv.a[1] * y + inv.a[2];
    const double sy = inv.a[3] * x + inv.a[4] * y + inv.a[5];
    return sx >= -1e-6 && sy >= -1e-6 && sx <= w - 1 + 1e-6 && sy <= h - 1 + 1e-6;
}

// Exhaustive search over every rectangle with the documented tie-break.
std::optional<Rect> brute_force_crop(const AffineTransform& t, int sw, int sh, int dw, int dh) {
    const auto inv = t.inverse();
    std::vector<int> prefix((dw + 1) * (dh + 1), 0);
    for (int y = 0; y < dh; ++y) {
        for (int x = 0; x < dw; ++x) {
            prefix[(y + 1) * (dw + 1) + x + 1] = (samples_inside(inv, x, y, sw, sh) ? 0 : 1) +
                                                 prefix[y * (dw + 1) + x + 1] +
                                                 prefix[(y + 1) * (dw + 1) + x] -
                                                 prefix[y * (dw + 1) + x];
        }
    }
    std::optional<Rect> best;
    for (int x = 0; x < dw; ++x) {
        for (int y = 0; y < dh; ++y) {
            for (int x2 = x + 1; x2 <= dw; ++x2) {
                for (int y2 = y + 1; y2 <= dh; ++y2) {
                    const int bad = prefix[y2 * (dw + 1) + x2] - prefix[y * (dw + 1) + x2] -
                                    prefix[y2 * (dw + 1) + x] + prefix[y * (dw + 1) + x];
                    if (bad != 0) break;
                    const Rect r{x, y, x2 - x, y2 - y};
                    const long area = static_cast<long>(r.w) * r.h;
                    if (!best) {
                        best = r;
                        continue;
                    }
                    const long best_area = static_cast<long>(best->w) * best->h;
                    if (area > best_area ||
                        (area == best_area && (r.x < best->x || (r.x == best->x && r.y < best->y)))) {
                        best = r;
                    }
                }
            }
        }
    }
    return best;
}

}  // namespace

// ---------------------------------------------------------------- descriptors

TEST(Hamming, IsAMetric) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 500; ++t) {
        const auto a = random_descriptor(rng), b = random_descriptor(rng), c = random_descriptor(rng);
        EXPECT_EQ(hamming_distance(a, b), hamming_distance(b, a));
        EXPECT_EQ(hamming_distance(a, a), 0);
        EXPECT_EQ(hamming_distance(a, b) == 0, a == b);
        EXPECT_LE(hamming_distance(a, c), hamming_distance(a, b) + hamming_distance(b, c));
        int naive = 0;
        for (int i = 0; i < 32; ++i) naive += std::popcount(static_cast<unsigned>(a.bits[i] ^ b.bits[i]));
        EXPECT_EQ(hamming_distance(a, b), naive);
    }
}

// ------------------------------------------------------------------- detector

TEST(Detector, FlatImageHasNoKeypoints) {
    ImageBuffer flat(128, 128, 1);
    for (auto& v : flat.data()) v = 128;
    EXPECT_TRUE(detect_keypoints(flat).empty());
}

TEST(Detector, RejectsSmallOrColorInput) {
    EXPECT_THROW(detect_keypoints(ImageBuffer(31, 64, 1)), DetectionError);
    EXPECT_THROW(detect_keypoints(ImageBuffer(64, 64, 3)), DetectionError);
    EXPECT_NO_THROW(detect_keypoints(ImageBuffer(32, 32, 1)));
}

TEST(Detector, MultiLevelCheckerboardYieldsManyKeypoints) {
    const auto kps = detect_keypoints(checkerboard(256, 16, 4), {1000, 20});
    EXPECT_GE(kps.size(), 100u);
    EXPECT_LE(kps.size(), 1000u);
}

TEST(Detector, TwoToneCheckerboardJunctionsAreNotFastCorners) {
    // X-junctions leave only 4-pixel arcs on the 16-pixel circle, fewer than
    // the 9 contiguous pixels a FAST-9 corner needs.
    EXPECT_TRUE(detect_keypoints(checkerboard(256, 16, 2)).empty());
}

TEST(Detector, DeterministicBoundedAndRanked) {
    const auto img = testkit::render_texture(300, 200, 42, false);
    const auto a = detect_keypoints(img, {150, 20});
    const auto b = detect_keypoints(img, {150, 20});
    ASSERT_EQ(a.size(), b.size());
    ASSERT_EQ(a.size(), 150u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].keypoint.x, b[i].keypoint.x);
        EXPECT_EQ(a[i].keypoint.y, b[i].keypoint.y);
        EXPECT_EQ(a[i].descriptor, b[i].descriptor);
        EXPECT_GT(a[i].keypoint.response, 0.0f);
        EXPECT_GE(a[i].keypoint.angle, 0.0f);
        EXPECT_LT(a[i].keypoint.angle, 360.0f);
        EXPECT_GE(a[i].keypoint.x, 0.0f);
        EXPECT_LT(a[i].keypoint.x, 300.0f);
        EXPECT_GE(a[i].keypoint.y, 0.0f);
        EXPECT_LT(a[i].keypoint.y, 200.0f);
        if (i > 0) {
            EXPECT_GE(a[i - 1].keypoint.response, a[i].keypoint.response);
        }
    }
}

TEST(Detector, DescriptorsSurviveSmallShift) {
    const auto big = testkit::render_texture(260, 260, 9, false);
    const auto a = detect_keypoints(crop(big, Rect{0, 0, 256, 256}));
    const auto b = detect_keypoints(crop(big, Rect{3, 2, 256, 256}));
    std::vector<BinaryDescriptor> da, db;
    for (const auto& f : a) da.push_back(f.descriptor);
    for (const auto& f : b) db.push_back(f.descriptor);
    const auto matches = match_descriptors(da, db);
    ASSERT_GT(matches.size(), 50u);
    int consistent = 0;
    for (const auto& m : matches) {
        const auto& ka = a[m.query_idx].keypoint;
        const auto& kb = b[m.train_idx].keypoint;
        if (std::abs(ka.x - 3 - kb.x) < 1.5 && std::abs(ka.y - 2 - kb.y) < 1.5) ++consistent;
    }
    EXPECT_GT(consistent, static_cast<int>(0.9 * matches.size()));
}

// ------------------------------------------------------------------- matching

TEST(Matching, IdenticalSetsMatchThemselves) {
    std::mt19937_64 rng(3);
    std::vector<BinaryDescriptor> d;
    for (int i = 0; i < 40; ++i) d.push_back(random_descriptor(rng));
    const auto matches = match_descriptors(d, d);
    ASSERT_EQ(matches.size(), d.size());
    for (std::size_t i = 0; i < matches.size(); ++i) {
        EXPECT_EQ(matches[i].query_idx, static_cast<int>(i));
        EXPECT_EQ(matches[i].train_idx, static_cast<int>(i));
        EXPECT_EQ(matches[i].distance, 0);
    }
}

TEST(Matching, RatioThresholdArithmetic) {
    std::mt19937_64 rng(4);
    const auto q = random_descriptor(rng);
    {
        const std::vector<BinaryDescriptor> train = {flip_bits(q, 10), flip_bits(q, 20)};
        const auto m = match_descriptors(std::vector{q}, train);
        ASSERT_EQ(m.size(), 1u);
        EXPECT_EQ(m[0].train_idx, 0);
        EXPECT_EQ(m[0].distance, 10);
    }
    {
        const std::vector<BinaryDescriptor> train = {flip_bits(q, 19), flip_bits(q, 24)};
        EXPECT_TRUE(match_descriptors(std::vector{q}, train).empty());
    }
    {
        // 15 <= 0.75 * 20 exactly.
        const std::vector<BinaryDescriptor> train = {flip_bits(q, 20), flip_bits(q, 15)};
        const auto m = match_descriptors(std::vector{q}, train);
        ASSERT_EQ(m.size(), 1u);
        EXPECT_EQ(m[0].train_idx, 1);
    }
}

TEST(Matching, DegenerateSecondNeighbour) {
    std::mt19937_64 rng(5);
    const auto q = random_descriptor(rng);
    EXPECT_EQ(match_descriptors(std::vector{q}, std::vector{q}).size(), 1u);
    EXPECT_TRUE(match_descriptors(std::vector{q}, std::vector{flip_bits(q, 1)}).empty());
    // Two exact twins: d2 == 0, d1 == 0 -> emitted, lowest index.
    const auto m = match_descriptors(std::vector{q}, std::vector{q, q});
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].train_idx, 0);
}

TEST(Matching, InvalidArguments) {
    std::mt19937_64 rng(6);
    const std::vector<BinaryDescriptor> d = {random_descriptor(rng), random_descriptor(rng)};
    EXPECT_THROW(match_descriptors({}, d), ParameterError);
    EXPECT_THROW(match_descriptors(d, {}), ParameterError);
    EXPECT_THROW(match_descriptors(d, d, 0.0), ParameterError);
    EXPECT_THROW(match_descriptors(d, d, 1.5), ParameterError);
}

TEST(Matching, AgreesWithBruteForceRatioTest) {
    std::mt19937_64 rng(8);
    std::vector<BinaryDescriptor> train, query;
    for (int i = 0; i < 60; ++i) train.push_back(random_descriptor(rng));
    for (int i = 0; i < 60; ++i) query.push_back(flip_bits(train[rng() % 60], static_cast<int>(rng() % 90)));
    const auto matches = match_descriptors(query, train, 0.75);
    std::size_t k = 0;
    for (int qi = 0; qi < 60; ++qi) {
        std::vector<int> d;
        for (const auto& t : train) d.push_back(hamming_distance(query[qi], t));
        const int best = static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin());
        std::vector<int> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        const bool keep = sorted[1] == 0 ? sorted[0] == 0 : sorted[0] <= 0.75 * sorted[1];
        if (keep) {
            ASSERT_LT(k, matches.size());
            EXPECT_EQ(matches[k].query_idx, qi);
            EXPECT_EQ(matches[k].train_idx, best);
            EXPECT_EQ(matches[k].distance, sorted[0]);
            ++k;
        }
    }
    EXPECT_EQ(k, matches.size());
}

// ---------------------------------------------------------------------- affine

TEST(Affine, InverseAndCompose) {
    const auto inv = kExampleA.inverse();
    const auto id = kExampleA.compose(inv);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(id.a[i], AffineTransform::identity().a[i], 1e-12);
    const Point2 p{12.5, -7.25};
    const auto q = kExampleA.compose(AffineTransform::translation(3, 4)).apply(p);
    const auto r = kExampleA.apply(AffineTransform::translation(3, 4).apply(p));
    EXPECT_NEAR(q.x, r.x, 1e-12);
    EXPECT_NEAR(q.y, r.y, 1e-12);
    EXPECT_THROW((AffineTransform{{1, 2, 0, 2, 4, 0}}).inverse(), ParameterError);
}

TEST(Affine, ThreePointFitAndCollinearity) {
    std::mt19937_64 rng(10);
    const auto pairs = exact_pairs(kExampleA, 3, rng);
    const auto fit = affine_from_three(pairs[0], pairs[1], pairs[2]);
    ASSERT_TRUE(fit);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(fit->a[i], kExampleA.a[i], 1e-9);
    const PointPair c0{{0, 0}, {0, 0}}, c1{{1, 1}, {1, 1}}, c2{{2, 2}, {2, 2}};
    EXPECT_FALSE(affine_from_three(c0, c1, c2));
}

TEST(Ransac, ExactCorrespondencesRecovered) {
    std::mt19937_64 rng(11);
    const auto pairs = exact_pairs(kExampleA, 50, rng);
    const auto result = estimate_affine_ransac(pairs);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(result.transform.a[i], kExampleA.a[i], 1e-6);
    EXPECT_DOUBLE_EQ(result.inlier_ratio, 1.0);
    EXPECT_EQ(result.inlier_count(), 50u);
}

TEST(Ransac, OutliersFlaggedAndDeterministic) {
    std::mt19937_64 rng(12);
    auto pairs = exact_pairs(kExampleA, 50, rng);
    std::uniform_real_distribution<double> coord(0.0, 500.0);
    for (int i = 0; i < 20; ++i) pairs.push_back({{coord(rng), coord(rng)}, {coord(rng), coord(rng)}});
    const auto a = estimate_affine_ransac(pairs);
    const auto b = estimate_affine_ransac(pairs);
    EXPECT_EQ(a.inlier_flags, b.inlier_flags);
    EXPECT_EQ(a.transform.a, b.transform.a);
    for (std::size_t i = 0; i < pairs.size(); ++i) EXPECT_EQ(a.inlier_flags[i], i < 50) << i;
    EXPECT_NEAR(a.inlier_ratio, 50.0 / 70.0, 1e-15);
}

TEST(Ransac, FlagsMatchModelRecheck) {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 10; ++t) {
        auto pairs = exact_pairs(kExampleA, 40, rng);
        std::normal_distribution<double> noise(0.0, 1.5);
        for (auto& p : pairs) {
            p.dst.x += noise(rng);
            p.dst.y += noise(rng);
        }
        const auto r = estimate_affine_ransac(pairs, {500, 3.0, rng()});
        std::size_t count = 0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            EXPECT_EQ(static_cast<bool>(r.inlier_flags[i]),
                      reprojection_error(r.transform, pairs[i]) <= 3.0);
            count += r.inlier_flags[i];
        }
        EXPECT_DOUBLE_EQ(r.inlier_ratio, static_cast<double>(count) / pairs.size());
        EXPECT_GE(count, 3u);
    }
}

TEST(Ransac, DegenerateInputFails) {
    const std::vector<PointPair> collinear = {{{0, 0}, {0, 0}}, {{1, 1}, {2, 2}}, {{2, 2}, {4, 4}}};
    EXPECT_THROW(estimate_affine_ransac(collinear), EstimationError);
    EXPECT_THROW(estimate_affine_ransac(std::vector<PointPair>(collinear.begin(), collinear.begin() + 2)),
                 EstimationError);
}

TEST(Refine, ExactDataRecoversTransform) {
    std::mt19937_64 rng(14);
    const auto pairs = exact_pairs(kExampleA, 30, rng);
    const auto fit = refine_affine_least_squares(pairs);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(fit.a[i], kExampleA.a[i], 1e-9);
}

TEST(Refine, IdentityCorrespondences) {
    std::mt19937_64 rng(15);
    const auto fit = refine_affine_least_squares(exact_pairs(AffineTransform::identity(), 10, rng));
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(fit.a[i], AffineTransform::identity().a[i], 1e-12);
}

TEST(Refine, NoisyDataMatchesNormalEquationOracle) {
    std::mt19937_64 rng(16);
    auto pairs = exact_pairs(kExampleA, 200, rng);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (auto& p : pairs) {
        p.dst.x += noise(rng);
        p.dst.y += noise(rng);
    }
    const auto fit = refine_affine_least_squares(pairs);
    const auto oracle = normal_equation_oracle(pairs);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(fit.a[i], oracle.a[i], 1e-8 * (1 + std::abs(oracle.a[i])));
    EXPECT_LE(sum_squared_error(fit, pairs), sum_squared_error(kExampleA, pairs));
}

TEST(Refine, ResidualNeverExceedsCoarseModel) {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
        auto pairs = exact_pairs(kExampleA, 60, rng);
        std::normal_distribution<double> noise(0.0, 1.0);
        for (auto& p : pairs) {
            p.dst.x += noise(rng);
            p.dst.y += noise(rng);
        }
        const auto coarse = estimate_affine_ransac(pairs, {300, 3.0, rng()});
        std::vector<PointPair> inliers;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (coarse.inlier_flags[i]) inliers.push_back(pairs[i]);
        }
        const auto refined = refine_affine_least_squares(inliers);
        EXPECT_LE(sum_squared_error(refined, inliers), sum_squared_error(coarse.transform, inliers) + 1e-9);
    }
}

TEST(Refine, RankDeficientThrows) {
    const std::vector<PointPair> collinear = {{{0, 0}, {0, 0}}, {{1, 1}, {1, 1}}, {{3, 3}, {3, 3}}, {{5, 5}, {5, 5}}};
    EXPECT_THROW(refine_affine_least_squares(collinear), RefinementError);
}

// ------------------------------------------------------------------------ warp

TEST(Warp, IdentityIsExact) {
    const auto img = testkit::render_texture(40, 30, 2);
    EXPECT_EQ(warp_affine(img, AffineTransform::identity(), 40, 30), img);
}

TEST(Warp, TranslationShiftsAndBlacksOut) {
    const auto img = testkit::render_texture(50, 40, 3, false);
    const auto out = warp_affine(img, AffineTransform::translation(10, 0), 50, 40);
    for (int y = 0; y < 40; ++y) {
        for (int x = 0; x < 10; ++x) EXPECT_EQ(out.at(x, y), 0);
        for (int x = 10; x < 50; ++x) EXPECT_EQ(out.at(x, y), img.at(x - 10, y));
    }
}

TEST(Warp, MatchesReferenceBilinearSampler) {
    const auto img = testkit::render_texture(64, 64, 4);
    const AffineTransform t{{0.93, 0.05, 3.3, -0.04, 1.07, -2.1}};
    const auto out = warp_affine(img, t, 64, 64);
    const auto inv = t.inverse();
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            if (!samples_inside(inv, x, y, 64, 64)) continue;
            const auto p = inv.apply({double(x), double(y)});
            for (int c = 0; c < 3; ++c) {
                EXPECT_NEAR(out.at(x, y, c), testkit::sample_bilinear(img, p.x, p.y, c), 0.5 + 1e-9);
            }
        }
    }
}

TEST(Warp, RoundTripPsnrAbove30dB) {
    // Band-limited content, as in a camera image; hard synthetic step edges
    // lose more to two bilinear passes than any real photograph does.
    const auto img = box_blur(box_blur(testkit::render_texture(128, 128, 5)));
    const AffineTransform t{{1.05, 0.02, 4.0, -0.03, 0.96, 2.0}};
    const auto back = warp_affine(warp_affine(img, t, 128, 128), t.inverse(), 128, 128);
    double mse = 0;
    int n = 0;
    for (int y = 16; y < 112; ++y) {
        for (int x = 16; x < 112; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double d = double(back.at(x, y, c)) - img.at(x, y, c);
                mse += d * d;
                ++n;
            }
        }
    }
    mse /= n;
    EXPECT_GT(10 * std::log10(255.0 * 255.0 / mse), 30.0);
}

TEST(Warp, NonInvertibleThrows) {
    EXPECT_THROW(warp_affine(ImageBuffer(4, 4, 1), AffineTransform{{0, 0, 0, 0, 0, 0}}, 4, 4), ParameterError);
}

// ------------------------------------------------------------------------ crop

TEST(CommonCrop, Examples) {
    EXPECT_EQ(compute_common_crop(AffineTransform::identity(), 100, 100, 100, 100), (Rect{0, 0, 100, 100}));
    EXPECT_EQ(compute_common_crop(AffineTransform::translation(10, 0), 100, 100, 100, 100),
              (Rect{10, 0, 90, 100}));
    EXPECT_EQ(compute_common_crop(AffineTransform{{0.5, 0, 0, 0, 0.5, 0}}, 100, 100, 100, 100),
              (Rect{0, 0, 50, 50}));
    EXPECT_FALSE(compute_common_crop(AffineTransform::translation(500, 0), 100, 100, 100, 100));
}

TEST(CommonCrop, MatchesExhaustiveSearch) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 60; ++t) {
        const AffineTransform a{{1 + 0.15 * u(rng), 0.2 * u(rng), 4 * u(rng), 0.2 * u(rng),
                                 1 + 0.15 * u(rng), 4 * u(rng)}};
        const int sw = 14 + static_cast<int>(rng() % 8), sh = 14 + static_cast<int>(rng() % 8);
        const int dw = 14 + static_cast<int>(rng() % 8), dh = 14 + static_cast<int>(rng() % 8);
        EXPECT_EQ(compute_common_crop(a, sw, sh, dw, dh), brute_force_crop(a, sw, sh, dw, dh)) << t;
    }
}

TEST(CommonCrop, NoBlackBorderSurvives) {
    std::mt19937_64 rng(22);
    testkit::PairSpec spec;
    for (int t = 0; t < 20; ++t) {
        const auto a = testkit::random_affine(rng, spec);
        ImageBuffer white(200, 200, 1);
        for (auto& v : white.data()) v = 255;
        const auto crop_rect = compute_common_crop(a, 200, 200, 200, 200);
        ASSERT_TRUE(crop_rect);
        const auto cropped = crop(warp_affine(white, a, 200, 200), *crop_rect);
        for (auto v : cropped.data()) ASSERT_EQ(v, 255);
    }
}

// ------------------------------------------------------------------ align_pair

TEST(AlignPair, IdenticalPairIsIdentity) {
    const auto img = testkit::render_texture(256, 256, 31);
    const auto aligned = align_pair(img, img);
    const auto& t = aligned.stats.transform();
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(t.a[i], AffineTransform::identity().a[i], 0.01);
    EXPECT_EQ(aligned.stats.crop, (Rect{0, 0, 256, 256}));
    EXPECT_TRUE(aligned.stats.refinement_applied);
    EXPECT_EQ(aligned.original.width(), 256);
}

TEST(AlignPair, EightPixelFrameCrop) {
    const auto img = testkit::render_texture(256, 256, 32);
    const auto edited = crop(img, Rect{8, 8, 240, 240});
    const auto aligned = align_pair(img, edited);
    const auto& t = aligned.stats.transform();
    EXPECT_NEAR(t.a[2], -8.0, 0.05);
    EXPECT_NEAR(t.a[5], -8.0, 0.05);
    EXPECT_EQ(aligned.stats.crop, (Rect{0, 0, 240, 240}));
    EXPECT_EQ(aligned.edited, edited);
}

TEST(AlignPair, FlatOriginalFailsAtDetection) {
    ImageBuffer flat(128, 128, 3);
    for (auto& v : flat.data()) v = 120;
    try {
        align_pair(flat, testkit::render_texture(128, 128, 33));
        FAIL() << "flat image aligned";
    } catch (const AlignmentFailure& e) {
        EXPECT_EQ(e.stage(), AlignStage::detection);
        EXPECT_EQ(e.partial_stats().keypoints_original, 0);
    }
}

TEST(AlignPair, UnrelatedImagesFailWithPartialStats) {
    try {
        const auto aligned = align_pair(testkit::render_texture(200, 200, 34), testkit::render_texture(200, 200, 35));
        // A lucky alignment must still come with poor statistics.
        EXPECT_LT(*aligned.stats.inlier_ratio, 0.6);
    } catch (const AlignmentFailure& e) {
        EXPECT_NE(e.stage(), AlignStage::detection);
        EXPECT_GT(e.partial_stats().keypoints_original, 0);
    }
}

TEST(AlignPair, AlignedImagesAgreeWithinCrop) {
    testkit::PairSpec spec;
    spec.with_patch = false;
    spec.jpeg_quality = 0;
    spec.size = 256;
    for (std::uint64_t seed : {41u, 42u, 43u}) {
        const auto pair = testkit::make_synthetic_pair(seed, spec);
        const auto aligned = align_pair(pair.original, pair.edited);
        double diff = 0;
        const auto a = aligned.original.data();
        const auto b = aligned.edited.data();
        for (std::size_t i = 0; i < a.size(); ++i) diff += std::abs(int(a[i]) - int(b[i]));
        EXPECT_LT(diff / a.size(), 5.0) << seed;
    }
}
