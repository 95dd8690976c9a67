#include "opium/error.hpp"
#include "opium/metrics.hpp"
#include "opium/tasks.hpp"
#include "opium/trace.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace opium;

TEST(SineTask, Shape)
{
    SineTaskConfig c;
    EXPECT_EQ(c.steps_per_phase(), 5000u);
    const auto task = make_sine_task(c);
    ASSERT_EQ(task.size(), 10000u);
    EXPECT_EQ(task[0].input, Vector(10, 0.0));
    EXPECT_EQ(task[0].target, (Vector{0.0}));
    EXPECT_NEAR(task[25].target[0], 1.0, 1e-12);
    // first tap is ten samples back
    EXPECT_EQ(task[35].input[0], task[25].target[0]);
    EXPECT_EQ(task[35].input[1], task[15].target[0]);
    EXPECT_EQ(task[35].input[3], 0.0);
}

TEST(SineTask, FrequencySwitch)
{
    SineTaskConfig c;
    c.duration_each = 1.0;
    // last sample of phase one uses f1, first of phase two uses f2
    EXPECT_NEAR(sine_target(c, 999), std::sin(2 * M_PI * 10 * 0.999), 1e-12);
    EXPECT_NEAR(sine_target(c, 1000), std::sin(2 * M_PI * 20 * 1.0), 1e-12);
    EXPECT_NEAR(sine_target(c, 1012), std::sin(2 * M_PI * 20 * 1.012), 1e-12);
    EXPECT_EQ(c.total_steps(), 2000u);
}

TEST(SineTask, InvalidConfig)
{
    SineTaskConfig c;
    c.dt = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.num_taps = 0;
    EXPECT_THROW(make_sine_task(c), Error);
    c = {};
    c.duration_each = 1e-5;
    EXPECT_THROW(c.validate(), Error);
}

TEST(SeriesTask, Example)
{
    const std::vector<double> s{1, 2, 3, 4, 5};
    const auto task = make_series_task(s, 2);
    ASSERT_EQ(task.size(), 3u);
    EXPECT_EQ(task[0].input, (Vector{2, 1}));
    EXPECT_EQ(task[0].target, (Vector{3}));
    EXPECT_EQ(task[2].input, (Vector{4, 3}));
    EXPECT_EQ(task[2].target, (Vector{5}));
}

TEST(SeriesTask, TooShort)
{
    try {
        make_series_task(std::vector<double>{1, 2}, 2);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_argument);
        EXPECT_NE(std::string(e.what()).find("too short"), std::string::npos);
    }
}

TEST(RandomTask, DeterministicPerSeed)
{
    const auto a = make_random_task(4, 2, 20, 5);
    const auto b = make_random_task(4, 2, 20, 5);
    ASSERT_EQ(a.size(), 20u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].input, b[i].input);
        EXPECT_EQ(a[i].target, b[i].target);
        for (double v : a[i].input) {
            EXPECT_GE(v, -1.0);
            EXPECT_LE(v, 1.0);
        }
    }
    EXPECT_NE(make_random_task(4, 2, 20, 6)[0].input, a[0].input);
}

TEST(Metrics, Rms)
{
    EXPECT_NEAR(rms(std::vector<double>{3, 4}, 2), 3.5355339059327378, 1e-15);
    EXPECT_DOUBLE_EQ(rms(std::vector<double>{100, -2, 2}, 2), 2.0);
    EXPECT_EQ(rms(std::vector<double>{0, 0}, 2), 0.0);
    EXPECT_THROW(rms(std::vector<double>{1}, 2), Error);
    EXPECT_THROW(rms(std::vector<double>{1}, 0), Error);
}

TEST(Metrics, ArgmaxTiesGoLow)
{
    EXPECT_EQ(argmax(std::vector<double>{0.1, 0.9, 0.9}), 1u);
    EXPECT_EQ(argmax(std::vector<double>{-1, -2}), 0u);
    EXPECT_THROW(argmax(std::vector<double>{}), Error);
}

TEST(Metrics, ClassificationError)
{
    const Matrix p = Matrix::from_rows({{0.9, 0.1, 0.5, 0.5}, {0.1, 0.8, 0.5, 0.2}, {0.0, 0.1, 0.0, 0.3}});
    EXPECT_DOUBLE_EQ(classification_error(p, std::vector<int>{0, 1, 0, 2}), 0.25);
    EXPECT_DOUBLE_EQ(classification_error(p, std::vector<int>{0, 1, 1, 0}), 0.25); // tie at column 2 picks class 0
    EXPECT_THROW(classification_error(p, std::vector<int>{0, 1}), Error);
}

TEST(Metrics, StepError)
{
    EXPECT_DOUBLE_EQ(step_error(std::vector<double>{1.0}, std::vector<double>{0.25}), 0.75);
    EXPECT_DOUBLE_EQ(step_error(std::vector<double>{0.0}, std::vector<double>{0.25}), -0.25);
    EXPECT_DOUBLE_EQ(step_error(std::vector<double>{3, 0}, std::vector<double>{0, 4}), 5.0);
}

TEST(Trace, RoundTripAndRecomputedMetric)
{
    RunTrace t;
    t.config = {{"task", "sine-switch"}, {"epsilon", 0.1}};
    for (std::uint64_t k = 1; k <= 50; ++k) {
        StepRecord r;
        r.k = k;
        r.target = {std::sin(0.1 * k)};
        r.prediction = {std::sin(0.1 * k) * 0.9 + 1.0 / 3.0};
        r.error = step_error(r.target, r.prediction);
        t.records.push_back(r);
    }
    t.metrics["rms_final"] = rms_error(t, 20);
    const auto path = std::filesystem::path(::testing::TempDir()) / "opium_trace_test.ndjson";
    write_trace(path, t, false);
    const RunTrace back = read_trace(path);
    EXPECT_EQ(back.config, t.config);
    EXPECT_EQ(back.records, t.records);
    EXPECT_NEAR(rms_error(back, 20), back.metrics.at("rms_final"), 1e-12);

    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    EXPECT_NE(first.find("\"opium-trace\""), std::string::npos);
    std::filesystem::remove(path);
}

TEST(Trace, RejectsDamagedFiles)
{
    const auto path = std::filesystem::path(::testing::TempDir()) / "opium_trace_bad.ndjson";
    RunTrace t;
    t.records.push_back({1, {1.0}, {0.5}, 0.5});
    write_trace(path, t, false);
    std::string text;
    {
        std::ifstream in(path);
        text.assign(std::istreambuf_iterator<char>(in), {});
    }
    // drop the footer
    std::ofstream(path) << text.substr(0, text.rfind('\n', text.size() - 2) + 1);
    EXPECT_THROW(read_trace(path), Error);
    std::ofstream(path) << "not json\n";
    try {
        read_trace(path);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::parse_error);
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
    std::filesystem::remove(path);
}
