#pragma once

// Run traces: a JSON header line echoing the full run configuration, one JSON
// record per update, and a JSON footer with the metrics.
//
//   {"type":"header","format":"opium-trace","version":1,"config":{...}}
//   {"k":1,"target":[...],"prediction":[...],"error":...}
//   ...
//   {"type":"footer","records":K,"metrics":{...}[,"timings":{...}]}
//
// Predictions are made before the update that consumes the same sample.

#include "opium/matrix.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opium {

inline constexpr int kTraceVersion = 1;

struct StepRecord {
    std::uint64_t k = 0;
    Vector target;
    Vector prediction;
    /// target - prediction for scalar outputs, Euclidean norm of it otherwise.
    double error = 0.0;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

double step_error(std::span<const double> target, std::span<const double> prediction);

struct Timings {
    double train_seconds = 0.0;
    double test_seconds = 0.0;
    double total_seconds = 0.0;
};

struct RunTrace {
    nlohmann::json config;
    std::vector<StepRecord> records;
    std::map<std::string, double> metrics;
    Timings timings;
    Matrix final_weights; // not persisted
};

/// Streams a trace to disk as it is produced.
class TraceWriter {
public:
    TraceWriter(const std::filesystem::path& path, const nlohmann::json& config);

    void write(const StepRecord& record);
    void finish(const std::map<std::string, double>& metrics, const std::optional<Timings>& timings);

    std::uint64_t records_written() const noexcept { return count_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::uint64_t count_ = 0;
};

void write_trace(const std::filesystem::path& path, const RunTrace& trace, bool include_timings);
RunTrace read_trace(const std::filesystem::path& path);

} // namespace opium
