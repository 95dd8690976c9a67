#include "opium/trace.hpp"

#include "opium/error.hpp"

#include <cmath>

namespace opium {

using nlohmann::json;

double step_error(std::span<const double> target, std::span<const double> prediction)
{
    if (target.size() != prediction.size())
        fail(Errc::dimension_mismatch, "step_error: target and prediction lengths differ");
    if (target.size() == 1)
        return target[0] - prediction[0];
    double sum = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double d = target[i] - prediction[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

TraceWriter::TraceWriter(const std::filesystem::path& path, const json& config)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc)
{
    if (!out_)
        fail(Errc::io_error, "cannot open trace file " + path.string());
    json header = {{"type", "header"}, {"format", "opium-trace"}, {"version", kTraceVersion}, {"config", config}};
    out_ << header.dump() << '\n';
}

void TraceWriter::write(const StepRecord& r)
{
    json rec = {{"k", r.k}, {"target", r.target}, {"prediction", r.prediction}, {"error", r.error}};
    out_ << rec.dump() << '\n';
    ++count_;
}

void TraceWriter::finish(const std::map<std::string, double>& metrics, const std::optional<Timings>& timings)
{
    json footer = {{"type", "footer"}, {"records", count_}, {"metrics", metrics}};
    if (timings)
        footer["timings"] = {{"train_seconds", timings->train_seconds},
                             {"test_seconds", timings->test_seconds},
                             {"total_seconds", timings->total_seconds}};
    out_ << footer.dump() << '\n';
    out_.flush();
    if (!out_)
        fail(Errc::io_error, "write failed for trace file " + path_.string());
}

void write_trace(const std::filesystem::path& path, const RunTrace& trace, bool include_timings)
{
    TraceWriter w(path, trace.config);
    for (const auto& r : trace.records)
        w.write(r);
    w.finish(trace.metrics, include_timings ? std::optional<Timings>(trace.timings) : std::nullopt);
}

RunTrace read_trace(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(Errc::io_error, "cannot open trace file " + path.string());

    RunTrace trace;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    bool have_footer = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail(Errc::parse_error, "trace line " + std::to_string(line_no) + ": " + e.what());
        }
        if (have_footer)
            fail(Errc::parse_error, "trace line " + std::to_string(line_no) + ": data after footer");
        try {
            if (!have_header) {
                if (j.value("type", "") != "header" || j.value("format", "") != "opium-trace")
                    fail(Errc::parse_error, "trace line 1: missing opium-trace header");
                if (j.at("version").get<int>() != kTraceVersion)
                    fail(Errc::parse_error, "trace: unsupported version");
                trace.config = j.at("config");
                have_header = true;
            } else if (j.contains("type") && j["type"] == "footer") {
                trace.metrics = j.at("metrics").get<std::map<std::string, double>>();
                if (j.contains("timings")) {
                    const auto& t = j["timings"];
                    trace.timings = {t.at("train_seconds").get<double>(), t.at("test_seconds").get<double>(),
                                     t.at("total_seconds").get<double>()};
                }
                if (j.at("records").get<std::uint64_t>() != trace.records.size())
                    fail(Errc::parse_error, "trace footer record count does not match body");
                have_footer = true;
            } else {
                StepRecord r;
                r.k = j.at("k").get<std::uint64_t>();
                r.target = j.at("target").get<Vector>();
                r.prediction = j.at("prediction").get<Vector>();
                r.error = j.at("error").get<double>();
                trace.records.push_back(std::move(r));
            }
        } catch (const json::exception& e) {
            fail(Errc::parse_error, "trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header || !have_footer)
        fail(Errc::parse_error, "trace file " + path.string() + " is incomplete");
    return trace;
}

} // namespace opium
