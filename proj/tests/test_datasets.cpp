#include "opium/datasets.hpp"
#include "opium/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace opium;

namespace {

std::string error_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Idx, TwoByTwoExample)
{
    const std::vector<std::uint8_t> px{0, 255, 51, 102, 10, 20, 30, 40};
    const auto images = encode_idx_images(px, 2, 2, 2);
    const auto labels = encode_idx_labels(std::vector<std::uint8_t>{3, 7});
    ASSERT_EQ(images.size(), 24u);
    EXPECT_EQ(images[3], 0x03);
    EXPECT_EQ(labels[3], 0x01);
    const auto ds = parse_idx(images, labels);
    EXPECT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds.input_dim(), 4u);
    EXPECT_EQ(ds.image_rows, 2u);
    EXPECT_EQ(ds.labels, (std::vector<int>{3, 7}));
    EXPECT_EQ(ds.sample(0), (Vector{0.0, 1.0, 0.2, 0.4}));
    EXPECT_DOUBLE_EQ(ds.inputs(3, 1), 40 / 255.0);
    EXPECT_EQ(ds.num_classes, 10u);
}

TEST(Idx, ErrorsNameByteOffset)
{
    const std::vector<std::uint8_t> px(8, 0);
    auto images = encode_idx_images(px, 2, 2, 2);
    const auto labels = encode_idx_labels(std::vector<std::uint8_t>{1, 2});

    auto bad_magic = images;
    bad_magic[3] = 0x02;
    EXPECT_NE(error_of([&] { parse_idx(bad_magic, labels); }).find("byte offset 0"), std::string::npos);

    const std::vector<std::uint8_t> short_header(images.begin(), images.begin() + 10);
    EXPECT_NE(error_of([&] { parse_idx(short_header, labels); }).find("byte offset 8"), std::string::npos);

    const std::vector<std::uint8_t> truncated(images.begin(), images.end() - 1);
    EXPECT_NE(error_of([&] { parse_idx(truncated, labels); }).find("byte offset 23"), std::string::npos);

    const auto three = encode_idx_labels(std::vector<std::uint8_t>{1, 2, 3});
    EXPECT_NE(error_of([&] { parse_idx(images, three); }).find("byte offset 4"), std::string::npos);

    try {
        parse_idx(bad_magic, labels);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::parse_error);
    }
    EXPECT_THROW(load_idx("/nonexistent/images", "/nonexistent/labels"), Error);
}

TEST(Idx, LoadFromFiles)
{
    const auto dir = std::filesystem::path(::testing::TempDir());
    const std::vector<std::uint8_t> px{1, 2, 3};
    const auto img = encode_idx_images(px, 3, 1, 1);
    const auto lbl = encode_idx_labels(std::vector<std::uint8_t>{0, 11, 5});
    std::ofstream(dir / "t-img", std::ios::binary).write(reinterpret_cast<const char*>(img.data()), img.size());
    std::ofstream(dir / "t-lbl", std::ios::binary).write(reinterpret_cast<const char*>(lbl.data()), lbl.size());
    const auto ds = load_idx(dir / "t-img", dir / "t-lbl");
    EXPECT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.num_classes, 12u);
}

TEST(Csv, Examples)
{
    EXPECT_EQ(parse_csv_series("1.5\n2\n-3e-1\n"), (std::vector<double>{1.5, 2.0, -0.3}));
    EXPECT_EQ(parse_csv_series("value\n1\n2"), (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(parse_csv_series("1\r\n\n 2 \r\n"), (std::vector<double>{1.0, 2.0}));
}

TEST(Csv, ErrorsNameLine)
{
    const std::string msg = error_of([] { parse_csv_series("1\n2\nabc\n4\n"); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(error_of([] { parse_csv_series("1\nnan\n"); }).find("line 2"), std::string::npos);
    EXPECT_NE(error_of([] { parse_csv_series(""); }).find("empty"), std::string::npos);
    EXPECT_NE(error_of([] { parse_csv_series("header only\n"); }).find("empty"), std::string::npos);
    EXPECT_THROW(load_csv_series("/nonexistent.csv"), Error);
}

TEST(Ecg, DeterministicAndBounded)
{
    const auto a = synthetic_ecg(2000, 0.004, 7);
    EXPECT_EQ(a, synthetic_ecg(2000, 0.004, 7));
    EXPECT_NE(a, synthetic_ecg(2000, 0.004, 8));
    double lo = 0, hi = 0;
    for (double v : a) {
        ASSERT_TRUE(std::isfinite(v));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    EXPECT_GT(hi, 0.8); // R peaks
    EXPECT_LT(hi, 1.5);
    EXPECT_LT(lo, 0.0);
    EXPECT_THROW(synthetic_ecg(10, 0.0, 1), Error);
}

TEST(OneHot, Examples)
{
    EXPECT_EQ(one_hot(2, 4), (Vector{0, 0, 1, 0}));
    EXPECT_EQ(one_hot(0, 1), (Vector{1}));
    EXPECT_THROW(one_hot(4, 4), Error);
    EXPECT_THROW(one_hot(-1, 4), Error);
}
