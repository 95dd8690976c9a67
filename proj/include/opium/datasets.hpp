#pragma once

#include "opium/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace opium {

/// Samples stored one per column: inputs is L x num_samples.
struct LabeledDataset {
    Matrix inputs;
    std::vector<int> labels;
    std::size_t num_classes = 10;
    std::size_t image_rows = 0;
    std::size_t image_cols = 0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t input_dim() const noexcept { return inputs.rows(); }
    Vector sample(std::size_t i) const { return inputs.col(i); }
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Reads a big-endian IDX image tensor and label vector (the MNIST
/// distribution format). Pixels are scaled to [0, 1] by dividing by 255.
LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);
LabeledDataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);

/// Builds IDX byte streams; used to write fixtures and in tests.
std::vector<std::uint8_t> encode_idx_images(std::span<const std::uint8_t> pixels, std::uint32_t count,
                                            std::uint32_t rows, std::uint32_t cols);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

/// One value per line; a single non-numeric first line is taken as a header.
std::vector<double> load_csv_series(const std::filesystem::path& path);
std::vector<double> parse_csv_series(std::string_view text);

/// ECG-like test signal: a PQRST template of Gaussian bumps repeated with
/// beat-to-beat jitter in period and amplitude. A stand-in for a recorded
/// ECG, not physiological data.
std::vector<double> synthetic_ecg(std::size_t num_samples, double dt, std::uint64_t seed);

Vector one_hot(int label, std::size_t num_classes);

} // namespace opium
