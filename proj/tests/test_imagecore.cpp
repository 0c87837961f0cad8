#include "forgemask/error.hpp"
#include "forgemask/imagecore/codec.hpp"
#include "forgemask/imagecore/image.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

using namespace forgemask;

namespace {

ImageBuffer random_image(int w, int h, int c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * c);
    for (auto& v : data) v = static_cast<std::uint8_t>(rng() & 0xFF);
    return ImageBuffer(w, h, c, std::move(data));
}

ImageBuffer rgb_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return ImageBuffer(1, 1, 3, {r, g, b});
}

}  // namespace

TEST(ImageBuffer, RejectsInvalidShapes) {
    EXPECT_THROW(ImageBuffer(0, 4, 3), ParameterError);
    EXPECT_THROW(ImageBuffer(4, 0, 1), ParameterError);
    EXPECT_THROW(ImageBuffer(4, 4, 2), ParameterError);
    EXPECT_THROW(ImageBuffer(2, 2, 3, std::vector<std::uint8_t>(11)), ParameterError);
    EXPECT_NO_THROW(ImageBuffer(2, 2, 3, std::vector<std::uint8_t>(12)));
}

TEST(Grayscale, LumaExamples) {
    EXPECT_EQ(to_grayscale(rgb_pixel(255, 255, 255)).at(0, 0), 255);
    EXPECT_EQ(to_grayscale(rgb_pixel(0, 0, 0)).at(0, 0), 0);
    EXPECT_EQ(to_grayscale(rgb_pixel(100, 200, 50)).at(0, 0), 153);
}

TEST(Grayscale, MatchesRoundedFormulaOnAllSampledColors) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 5000; ++i) {
        const auto r = static_cast<std::uint8_t>(rng() & 0xFF);
        const auto g = static_cast<std::uint8_t>(rng() & 0xFF);
        const auto b = static_cast<std::uint8_t>(rng() & 0xFF);
        const double luma = 0.299 * r + 0.587 * g + 0.114 * b;
        // Exact halves are blurred by binary floating point; they round up.
        const bool half = std::abs(luma - std::floor(luma) - 0.5) < 1e-9;
        const long want = half ? static_cast<long>(std::ceil(luma)) : std::lround(luma);
        EXPECT_EQ(to_grayscale(rgb_pixel(r, g, b)).at(0, 0), want);
    }
}

TEST(Grayscale, IdempotentOnGray) {
    const auto g = random_image(9, 7, 1, 3);
    EXPECT_EQ(to_grayscale(g), g);
    EXPECT_EQ(to_grayscale(to_grayscale(random_image(9, 7, 3, 4))),
              to_grayscale(random_image(9, 7, 3, 4)));
}

TEST(Crop, Examples) {
    const auto img = random_image(4, 4, 1, 11);
    EXPECT_EQ(crop(img, img.bounds()), img);

    const auto center = crop(img, Rect{1, 1, 2, 2});
    ASSERT_EQ(center.width(), 2);
    ASSERT_EQ(center.height(), 2);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 2; ++x) EXPECT_EQ(center.at(x, y), img.at(1 + x, 1 + y));
    }
    EXPECT_THROW(crop(img, Rect{3, 3, 2, 2}), BoundsError);
    EXPECT_THROW(crop(img, Rect{0, 0, 0, 1}), BoundsError);
    EXPECT_THROW(crop(img, Rect{-1, 0, 2, 2}), BoundsError);
}

TEST(Crop, ComposesProperty) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const int w = 4 + static_cast<int>(rng() % 30), h = 4 + static_cast<int>(rng() % 30);
        const auto img = random_image(w, h, 3, rng());
        const Rect a{static_cast<int>(rng() % (w / 2)), static_cast<int>(rng() % (h / 2)), w / 2, h / 2};
        const Rect b{static_cast<int>(rng() % (a.w / 2 + 1)), static_cast<int>(rng() % (a.h / 2 + 1)),
                     a.w / 2, a.h / 2};
        EXPECT_EQ(crop(crop(img, a), b), crop(img, Rect{a.x + b.x, a.y + b.y, b.w, b.h}));
    }
}

TEST(Png, ZeroImageDecodes) {
    const ImageBuffer img(2, 2, 3);
    const auto decoded = decode_image(encode_png(img));
    EXPECT_EQ(decoded, img);
}

TEST(Png, RoundTripIsBitExact) {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 40; ++t) {
        const int c = t % 2 == 0 ? 1 : 3;
        const auto img = random_image(1 + static_cast<int>(rng() % 70), 1 + static_cast<int>(rng() % 70), c, rng());
        const auto decoded = decode_image(encode_png(img));
        EXPECT_EQ(decoded, img);
    }
}

TEST(Decode, MalformedStreams) {
    const auto jpeg = encode_jpeg(random_image(32, 32, 3, 1), 90);
    const std::vector<std::uint8_t> truncated(jpeg.begin(), jpeg.begin() + jpeg.size() / 2);
    try {
        decode_image(truncated);
        FAIL() << "truncated JPEG decoded";
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.format(), "JPEG");
    }

    const auto png = encode_png(random_image(16, 16, 3, 2));
    const std::vector<std::uint8_t> png_cut(png.begin(), png.begin() + png.size() - 20);
    try {
        decode_image(png_cut);
        FAIL() << "truncated PNG decoded";
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.format(), "PNG");
    }

    const std::vector<std::uint8_t> junk = {'n', 'o', 't', ' ', 'a', 'n', ' ', 'i', 'm', 'g'};
    try {
        decode_image(junk);
        FAIL() << "junk decoded";
    } catch (const DecodeError& e) {
        EXPECT_EQ(e.format(), "unknown");
    }
    EXPECT_THROW(decode_image(std::vector<std::uint8_t>{}), DecodeError);
}

TEST(Jpeg, DecodesToRgbAndPreservesDimensions) {
    const auto img = random_image(37, 23, 3, 8);
    const auto decoded = decode_image(encode_jpeg(img, 60));
    EXPECT_EQ(decoded.channels(), 3);
    EXPECT_EQ(decoded.width(), 37);
    EXPECT_EQ(decoded.height(), 23);
    const auto re = jpeg_reencode(img, 60);
    EXPECT_EQ(re.width(), 37);
    EXPECT_EQ(re.height(), 23);
}

TEST(Jpeg, FlatGrayAtQuality100IsNearlyExact) {
    ImageBuffer img(64, 48, 3);
    for (auto& v : img.data()) v = 128;
    const auto re = jpeg_reencode(img, 100);
    for (std::size_t i = 0; i < img.data().size(); ++i) {
        EXPECT_LE(std::abs(int(re.data()[i]) - int(img.data()[i])), 2);
    }
}

TEST(Jpeg, QualityRangeChecked) {
    const auto img = random_image(8, 8, 3, 1);
    EXPECT_THROW(jpeg_reencode(img, 0), ParameterError);
    EXPECT_THROW(jpeg_reencode(img, 101), ParameterError);
    EXPECT_NO_THROW(jpeg_reencode(img, 1));
    EXPECT_NO_THROW(jpeg_reencode(img, 100));
}

TEST(Jpeg, LowerQualityLosesMoreDetail) {
    const auto img = random_image(64, 64, 3, 21);
    const auto error = [&](int q) {
        const auto re = jpeg_reencode(img, q);
        double sum = 0;
        for (std::size_t i = 0; i < img.data().size(); ++i) {
            sum += std::abs(int(re.data()[i]) - int(img.data()[i]));
        }
        return sum;
    };
    EXPECT_LT(error(95), error(60));
}

TEST(Files, SaveAndLoadPng) {
    const auto dir = std::filesystem::temp_directory_path() / "forgemask_imagecore_test";
    std::filesystem::create_directories(dir);
    const auto img = random_image(13, 17, 1, 4);
    save_png(dir / "x.png", img);
    EXPECT_EQ(load_image(dir / "x.png"), img);
    EXPECT_THROW(load_image(dir / "missing.png"), IoError);
    std::filesystem::remove_all(dir);
}
