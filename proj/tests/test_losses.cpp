#include "forgemask/error.hpp"
#include "forgemask/losses/losses.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

using namespace forgemask;
using namespace forgemask::losses;
using forgemask::testkit::contrastive_reference;
using forgemask::testkit::dice_reference;
using forgemask::testkit::focal_reference;

namespace {

VectorSet rows(std::size_t dim, std::vector<double> v) { return VectorSet(dim, std::move(v)); }

VectorSet random_set(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(n * dim);
    for (auto& x : v) x = g(rng);
    return VectorSet(dim, std::move(v));
}

}  // namespace

// ----------------------------------------------------------------- contrastive

TEST(Contrastive, HandComputedOrthogonalCase) {
    PixelFeatureSet s{rows(2, {1, 0}), rows(2, {0, 1}), 1.0};
    EXPECT_NEAR(contrastive_loss(s), -1.0, 1e-12);
}

TEST(Contrastive, AllIdenticalVectorsGiveLogNr) {
    for (std::size_t nf : {1u, 3u, 7u}) {
        for (std::size_t nr : {1u, 2u, 5u}) {
            PixelFeatureSet s{rows(3, std::vector<double>(nf * 3, 0.5)),
                              rows(3, std::vector<double>(nr * 3, 0.5)), 0.1};
            EXPECT_NEAR(contrastive_loss(s), std::log(static_cast<double>(nr)), 1e-12);
        }
    }
}

TEST(Contrastive, ScaleInvariant) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> k(0.1, 10.0);
    for (int t = 0; t < 10; ++t) {
        const auto f = random_set(6, 4, rng), r = random_set(5, 4, rng);
        VectorSet f2(4), r2(4);
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::vector<double> v(f[i].begin(), f[i].end());
            const double s = k(rng);
            for (auto& x : v) x *= s;
            f2.push_back(std::span<const double>(v));
        }
        for (std::size_t i = 0; i < r.size(); ++i) {
            std::vector<double> v(r[i].begin(), r[i].end());
            for (auto& x : v) x *= 2.0;
            r2.push_back(std::span<const double>(v));
        }
        EXPECT_NEAR(contrastive_loss({f, r, 0.1}), contrastive_loss({f2, r2, 0.1}), 1e-10);
    }
}

TEST(Contrastive, DecreasesAsNegativesMoveAway) {
    // Forged vectors fixed at (1, 0); the real vector rotates away from them.
    const auto forged = rows(2, {1, 0, 1, 0});
    double previous = std::numeric_limits<double>::infinity();
    for (int step = 0; step <= 12; ++step) {
        const double angle = step * (std::numbers::pi / 12.0);
        const PixelFeatureSet s{forged, rows(2, {std::cos(angle), std::sin(angle)}), 0.2};
        const double loss = contrastive_loss(s);
        EXPECT_LT(loss, previous);
        previous = loss;
    }
}

TEST(Contrastive, MatchesDirectReference) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 30; ++t) {
        const std::size_t dim = 1 + rng() % 8;
        const auto f = random_set(1 + rng() % 40, dim, rng);
        const auto r = random_set(1 + rng() % 40, dim, rng);
        const double tau = t % 2 ? 0.1 : 0.5;
        const double ref = contrastive_reference(f, r, tau);
        EXPECT_NEAR(contrastive_loss({f, r, tau}), ref, 1e-10 * std::abs(ref)) << t;
    }
}

TEST(Contrastive, Errors) {
    EXPECT_THROW(contrastive_loss({VectorSet(2), rows(2, {1, 0}), 0.1}), UndefinedLossError);
    EXPECT_THROW(contrastive_loss({rows(2, {1, 0}), VectorSet(2), 0.1}), UndefinedLossError);
    EXPECT_THROW(contrastive_loss({rows(2, {1, 0}), rows(2, {0, 1}), 0.0}), ParameterError);
    EXPECT_THROW(contrastive_loss({rows(2, {1, 0}), rows(2, {0, 1}), -1.0}), ParameterError);
}

// -------------------------------------------------------------------- sampling

TEST(Sampling, NoSamplingBelowCap) {
    const semanticmask::DenseFeatureMap fm(1, 4, 1, 1, {10, 11, 12, 13});
    const semanticmask::EditMask mask(4, 1, std::vector<std::uint8_t>{1, 1, 0, 0});
    const auto s = sample_pixels(fm, mask, 10, 0);
    ASSERT_EQ(s.forged.size(), 2u);
    ASSERT_EQ(s.real.size(), 2u);
    EXPECT_EQ(s.forged[0][0], 10.0);
    EXPECT_EQ(s.forged[1][0], 11.0);
    EXPECT_EQ(s.real[0][0], 12.0);
    EXPECT_EQ(s.real[1][0], 13.0);
    EXPECT_DOUBLE_EQ(s.tau, 0.1);
}

TEST(Sampling, CapKeepsDistinctPixelsDeterministically) {
    // 100x101 grid: 10,000 forged cells, 100 real cells; values are cell indices.
    std::vector<float> values(100 * 101);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(i);
    const semanticmask::DenseFeatureMap fm(101, 100, 1, 1, values);
    std::vector<std::uint8_t> bits(values.size(), 1);
    for (int i = 0; i < 100; ++i) bits[10000 + i] = 0;
    const semanticmask::EditMask mask(100, 101, bits);

    const auto a = sample_pixels(fm, mask, kDefaultSampleCap, 42);
    const auto b = sample_pixels(fm, mask, kDefaultSampleCap, 42);
    const auto c = sample_pixels(fm, mask, kDefaultSampleCap, 43);
    ASSERT_EQ(a.forged.size(), 4096u);
    ASSERT_EQ(a.real.size(), 100u);
    std::set<double> seen;
    bool differs = false;
    for (std::size_t i = 0; i < 4096; ++i) {
        seen.insert(a.forged[i][0]);
        EXPECT_EQ(a.forged[i][0], b.forged[i][0]);
        EXPECT_LT(a.forged[i][0], 10000.0);
        differs |= a.forged[i][0] != c.forged[i][0];
    }
    EXPECT_EQ(seen.size(), 4096u);
    EXPECT_TRUE(differs);
}

TEST(Sampling, Errors) {
    const semanticmask::DenseFeatureMap fm(1, 2, 1, 1, {1, 2});
    EXPECT_THROW(sample_pixels(fm, semanticmask::EditMask(2, 1, 1), 8, 0), UndefinedLossError);
    EXPECT_THROW(sample_pixels(fm, semanticmask::EditMask(2, 1, 0), 8, 0), UndefinedLossError);
    EXPECT_THROW(sample_pixels(fm, semanticmask::EditMask(3, 1, 0), 8, 0), ParameterError);
}

// ------------------------------------------------------------------------ dice

TEST(Dice, Examples) {
    const std::vector<std::uint8_t> m = {1, 1, 1, 1, 0, 0, 0, 0};
    EXPECT_NEAR(dice_loss({std::vector<double>(8, 0.5), m}), 1.0 - 5.0 / 9.0, 1e-12);
    EXPECT_NEAR(dice_loss({std::vector<double>(8, 0.5), m}), 0.4444, 1e-4);
    EXPECT_DOUBLE_EQ(dice_loss({{1, 1, 1, 1, 0, 0, 0, 0}, m}), 0.0);
    // Disjoint: 1 - eps / (N + eps).
    EXPECT_NEAR(dice_loss({{0, 0, 0, 0, 1, 1, 1, 1}, m}), 1.0 - 1.0 / 9.0, 1e-12);
    const std::vector<std::uint8_t> m3 = {1, 0, 0, 0, 0, 0};
    EXPECT_NEAR(dice_loss({{0, 1, 1, 1, 1, 1}, m3}), 1.0 - 1.0 / 7.0, 1e-12);
}

TEST(Dice, ComplementSymmetryAtEqualClassSizes) {
    const std::vector<std::uint8_t> m = {1, 0, 1, 0, 1, 0};
    const std::vector<std::uint8_t> mc = {0, 1, 0, 1, 0, 1};
    EXPECT_NEAR(dice_loss({{1, 0, 1, 0, 1, 0}, m}), dice_loss({{0, 1, 0, 1, 0, 1}, mc}), 1e-15);
}

TEST(Dice, RangeAndValidation) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> p(20);
        std::vector<std::uint8_t> m(20);
        for (auto& v : p) v = u(rng);
        for (auto& v : m) v = rng() % 2;
        const double d = dice_loss({p, m});
        EXPECT_GE(d, 0.0);
        EXPECT_LT(d, 1.0);
    }
    EXPECT_THROW(dice_loss({{0.5}, {1, 0}}), ParameterError);
    EXPECT_THROW(dice_loss({{1.5}, {1}}), ParameterError);
    EXPECT_THROW(dice_loss({{0.5}, {2}}), ParameterError);
}

// ----------------------------------------------------------------------- focal

TEST(Focal, Examples) {
    EXPECT_NEAR(focal_loss({{0.5}, {1}}), 0.25 * 0.25 * std::log(2.0), 1e-15);
    EXPECT_NEAR(focal_loss({{0.5}, {1}}), 0.04332, 1e-5);
    const double perfect = focal_loss({{1, 0, 1}, {1, 0, 1}});
    EXPECT_GE(perfect, 0.0);
    EXPECT_LE(perfect, 0.75 * 1e-14 * 2e-7);
}

TEST(Focal, GammaZeroIsScaledBce) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    std::vector<double> p(50);
    std::vector<std::uint8_t> m(50);
    for (auto& v : p) v = u(rng);
    for (auto& v : m) v = rng() % 2;
    double bce = 0;
    for (std::size_t i = 0; i < p.size(); ++i) bce += m[i] ? -std::log(p[i]) : -std::log(1 - p[i]);
    bce /= p.size();
    EXPECT_NEAR(focal_loss({p, m}, {0.0, 0.5}), 0.5 * bce, 1e-12);
}

TEST(Focal, NonNegativeAndValidated) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> p(10);
        std::vector<std::uint8_t> m(10);
        for (auto& v : p) v = u(rng);
        for (auto& v : m) v = rng() % 2;
        EXPECT_GE(focal_loss({p, m}), 0.0);
    }
    EXPECT_THROW(focal_loss({{0.5}, {1}}, {-1.0, 0.25}), ParameterError);
    EXPECT_THROW(focal_loss({{0.5}, {1}}, {2.0, 0.0}), ParameterError);
    EXPECT_THROW(focal_loss({{0.5}, {1}}, {2.0, 1.0}), ParameterError);
}

// ------------------------------------------------------------------ references

TEST(References, DiceAndFocalMatchDirectEvaluation) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng() % 4096;
        std::vector<double> p(n);
        std::vector<std::uint8_t> m(n);
        for (auto& v : p) v = u(rng);
        for (auto& v : m) v = rng() % 2;
        const double dr = dice_reference(p, m);
        const double fr = focal_reference(p, m, 2.0, 0.25);
        EXPECT_NEAR(dice_loss({p, m}), dr, 1e-10 * std::abs(dr));
        EXPECT_NEAR(focal_loss({p, m}), fr, 1e-10 * std::abs(fr));
    }
}

// ----------------------------------------------------------------------- total

TEST(Total, WeightsAndLinearity) {
    EXPECT_DOUBLE_EQ(total_loss(0, 0, 0), 0.0);
    EXPECT_DOUBLE_EQ(total_loss(1, 1, 1), 25.0);
    const LossWeights w;
    EXPECT_EQ(w.contrastive, 1.0);
    EXPECT_EQ(w.dice, 4.0);
    EXPECT_EQ(w.focal, 20.0);
    EXPECT_NEAR(total_loss(0.6, 0.2, 0.04), 0.6 + 0.8 + 0.8, 1e-15);
    EXPECT_NEAR(total_loss(2 * 0.3, 2 * 0.7, 2 * 0.11), 2 * total_loss(0.3, 0.7, 0.11), 1e-14);
}
