#include "opium/datasets.hpp"

#include "opium/error.hpp"
#include "opium/prng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>

namespace opium {

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::io_error, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset, const char* what)
{
    if (offset + 4 > bytes.size())
        fail(Errc::parse_error, std::string(what) + ": truncated header at byte offset " + std::to_string(offset) +
                                    " (file is " + std::to_string(bytes.size()) + " bytes)");
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex32(std::uint32_t v)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", v);
    return buf;
}

} // namespace

LabeledDataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels)
{
    const auto img_magic = read_be32(images, 0, "idx images");
    if (img_magic != kIdxImageMagic)
        fail(Errc::parse_error, "idx images: bad magic " + hex32(img_magic) + " at byte offset 0, expected " +
                                    hex32(kIdxImageMagic));
    const auto lbl_magic = read_be32(labels, 0, "idx labels");
    if (lbl_magic != kIdxLabelMagic)
        fail(Errc::parse_error, "idx labels: bad magic " + hex32(lbl_magic) + " at byte offset 0, expected " +
                                    hex32(kIdxLabelMagic));

    const std::size_t count = read_be32(images, 4, "idx images");
    const std::size_t rows = read_be32(images, 8, "idx images");
    const std::size_t cols = read_be32(images, 12, "idx images");
    const std::size_t label_count = read_be32(labels, 4, "idx labels");
    if (count != label_count)
        fail(Errc::parse_error, "idx: image count " + std::to_string(count) + " (byte offset 4 of images) != label count " +
                                    std::to_string(label_count) + " (byte offset 4 of labels)");

    const std::size_t pixels = rows * cols;
    const std::size_t img_needed = 16 + count * pixels;
    if (images.size() < img_needed)
        fail(Errc::parse_error, "idx images: payload truncated at byte offset " + std::to_string(images.size()) +
                                    ", expected " + std::to_string(img_needed) + " bytes");
    if (labels.size() < 8 + count)
        fail(Errc::parse_error, "idx labels: payload truncated at byte offset " + std::to_string(labels.size()) +
                                    ", expected " + std::to_string(8 + count) + " bytes");

    LabeledDataset ds;
    ds.image_rows = rows;
    ds.image_cols = cols;
    ds.inputs = Matrix(pixels, count);
    ds.labels.resize(count);
    int max_label = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t* src = images.data() + 16 + i * pixels;
        for (std::size_t p = 0; p < pixels; ++p)
            ds.inputs(p, i) = src[p] / 255.0;
        ds.labels[i] = labels[8 + i];
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.num_classes = std::max<std::size_t>(10, static_cast<std::size_t>(max_label) + 1);
    return ds;
}

LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path)
{
    const auto images = read_bytes(images_path);
    const auto labels = read_bytes(labels_path);
    try {
        return parse_idx(images, labels);
    } catch (const Error& e) {
        fail(e.code(), std::string(e.what()) + " [" + images_path.string() + ", " + labels_path.string() + "]");
    }
}

std::vector<std::uint8_t> encode_idx_images(std::span<const std::uint8_t> pixels, std::uint32_t count,
                                            std::uint32_t rows, std::uint32_t cols)
{
    if (pixels.size() != std::size_t{count} * rows * cols)
        fail(Errc::dimension_mismatch, "encode_idx_images: pixel count does not match dims");
    std::vector<std::uint8_t> out;
    out.reserve(16 + pixels.size());
    write_be32(out, kIdxImageMagic);
    write_be32(out, count);
    write_be32(out, rows);
    write_be32(out, cols);
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels)
{
    std::vector<std::uint8_t> out;
    out.reserve(8 + labels.size());
    write_be32(out, kIdxLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.insert(out.end(), labels.begin(), labels.end());
    return out;
}

std::vector<double> parse_csv_series(std::string_view text)
{
    std::vector<double> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;

        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t' || line.back() == ','))
            line.remove_suffix(1);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
            line.remove_prefix(1);
        if (line.empty())
            continue;
        if (!line.empty() && line.front() == '+')
            line.remove_prefix(1);

        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        const bool numeric = ec == std::errc() && ptr == line.data() + line.size() && std::isfinite(v);
        if (!numeric) {
            if (line_no == 1)
                continue; // header
            fail(Errc::parse_error, "csv line " + std::to_string(line_no) + ": '" + std::string(line) +
                                        "' is not a finite number");
        }
        out.push_back(v);
    }
    if (out.empty())
        fail(Errc::parse_error, "csv series is empty");
    return out;
}

std::vector<double> load_csv_series(const std::filesystem::path& path)
{
    const auto bytes = read_bytes(path);
    try {
        return parse_csv_series({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
    } catch (const Error& e) {
        fail(e.code(), std::string(e.what()) + " [" + path.string() + "]");
    }
}

std::vector<double> synthetic_ecg(std::size_t num_samples, double dt, std::uint64_t seed)
{
    if (!(dt > 0.0))
        fail(Errc::invalid_argument, "synthetic_ecg: dt must be > 0");

    struct Bump {
        double amplitude;
        double center; // seconds after beat onset
        double width;
    };
    // P, Q, R, S, T
    constexpr Bump kTemplate[] = {
        {0.15, 0.16, 0.025}, {-0.12, 0.26, 0.010}, {1.00, 0.29, 0.012}, {-0.25, 0.32, 0.012}, {0.32, 0.52, 0.045},
    };
    constexpr double kPeriod = 0.8;

    Rng rng(seed);
    std::vector<double> out(num_samples, 0.0);
    double onset = 0.0;
    const double end = static_cast<double>(num_samples) * dt;
    while (onset < end) {
        const double period = kPeriod * rng.uniform(0.94, 1.06);
        const double gain = rng.uniform(0.9, 1.1);
        for (const auto& b : kTemplate) {
            const double c = onset + b.center * period / kPeriod;
            const auto lo = static_cast<std::ptrdiff_t>(std::floor((c - 5 * b.width) / dt));
            const auto hi = static_cast<std::ptrdiff_t>(std::ceil((c + 5 * b.width) / dt));
            for (auto i = std::max<std::ptrdiff_t>(lo, 0); i <= hi && i < static_cast<std::ptrdiff_t>(num_samples); ++i) {
                const double z = (static_cast<double>(i) * dt - c) / b.width;
                out[static_cast<std::size_t>(i)] += gain * b.amplitude * std::exp(-0.5 * z * z);
            }
        }
        onset += period;
    }
    return out;
}

Vector one_hot(int label, std::size_t num_classes)
{
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes)
        fail(Errc::invalid_argument, "label " + std::to_string(label) + " outside [0, " + std::to_string(num_classes) + ")");
    Vector v(num_classes, 0.0);
    v[static_cast<std::size_t>(label)] = 1.0;
    return v;
}

} // namespace opium
