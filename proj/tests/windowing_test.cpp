#include <evtrack/windowing.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace evtrack;

namespace {

SequenceManifest frames_at(double fps, int count) {
    SequenceManifest m;
    m.frame_rate = fps;
    for (int f = 0; f < count; ++f) m.frames.push_back({f, std::llround(f * 1e6 / fps), ""});
    return m;
}

}  // namespace

TEST(PlanWindows, TwoHundredHertzStepsFiveMilliseconds) {
    WindowConfig cfg{200.0, 50.0, 0.05};
    const auto m = frames_at(24, 10);
    const auto s = plan_windows(cfg, m, 0, m.frames.back().t);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_EQ(s[i].t_now - s[i - 1].t_now, 5000);
}

TEST(PlanWindows, EqualRatesPutAnImageInEveryWindow) {
    WindowConfig cfg{24.0, 50.0, 0.05};
    const auto m = frames_at(24, 48);
    const auto s = plan_windows(cfg, m, 0, m.frames.back().t);
    ASSERT_EQ(s.size(), 48u);
    for (const auto& w : s) {
        ASSERT_EQ(w.frames.size(), 1u);
        EXPECT_EQ(w.frames[0], static_cast<std::size_t>(w.index - 1));
    }
}

TEST(PlanWindows, SixteenWindowsPerFrameAt384) {
    WindowConfig cfg{384.0, 50.0, 0.05};
    const auto m = frames_at(24, 48);
    const auto s = plan_windows(cfg, m, 0, m.frames.back().t);
    int images = 0;
    for (const auto& w : s) {
        EXPECT_LE(w.frames.size(), 1u);
        if (w.has_image()) {
            EXPECT_EQ((w.index - 1) % 16, 0) << "window " << w.index;
            ++images;
        }
    }
    EXPECT_EQ(images, 48);
}

TEST(PlanWindows, EveryFrameAssignedToFirstWindowAtOrAfterIt) {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const double fps = std::uniform_real_distribution<double>(10, 30)(rng);
        const double k = fps * std::uniform_real_distribution<double>(1, 20)(rng);
        const auto m = frames_at(fps, 20);
        WindowConfig cfg{k, 50.0, 0.05};
        const auto s = plan_windows(cfg, m, 0, m.frames.back().t);
        std::vector<int> seen(m.frames.size(), 0);
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (auto slot : s[i].frames) {
                ++seen[slot];
                EXPECT_GE(s[i].t_now, m.frames[slot].t);
                if (i > 0) EXPECT_LT(s[i - 1].t_now, m.frames[slot].t);
            }
        }
        for (int n : seen) EXPECT_EQ(n, 1);
    }
}

TEST(PlanWindows, RateBelowFrameRateIsConfigError) {
    WindowConfig cfg{12.0, 50.0, 0.05};
    EXPECT_THROW(plan_windows(cfg, frames_at(24, 3), 0, 100000), ConfigError);
}

TEST(SliceWindow, HalfOpenInterval) {
    std::vector<Event> ev{{10'000, 0, 0, 1}, {20'000, 0, 0, 1}, {30'000, 0, 0, 1}};
    auto s = slice_window(ev, 30'000, 15'000);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].t, 20'000);
    EXPECT_EQ(s[1].t, 30'000);
    EXPECT_TRUE(slice_window(ev, 5'000, 15'000).empty());
    // boundary event at t_now - interval is excluded
    EXPECT_EQ(slice_window(ev, 30'000, 20'000).size(), 2u);
}

TEST(SliceWindow, MatchesLinearScan) {
    std::mt19937 rng(11);
    std::vector<Event> ev;
    Micros t = 0;
    for (int i = 0; i < 500; ++i) {
        t += std::uniform_int_distribution<int>(0, 300)(rng);
        ev.push_back({t, 0, 0, 1});
    }
    for (Micros now = 0; now < t + 1000; now += 777) {
        std::size_t expected = 0;
        for (const auto& e : ev) expected += (e.t > now - 5000 && e.t <= now);
        EXPECT_EQ(slice_window(ev, now, 5000).size(), expected);
    }
}

TEST(TemporalWeight, Examples) {
    EXPECT_DOUBLE_EQ(temporal_weight(50'000, 50'000, 50'000, 0.05), 1.0);
    EXPECT_DOUBLE_EQ(temporal_weight(25'000, 50'000, 50'000, 0.05), 0.5);
    EXPECT_DOUBLE_EQ(temporal_weight(500, 50'000, 50'000, 0.05), 0.05);
    EXPECT_THROW(temporal_weight(0, 50'000, 50'000, 0.05), ContractError);
    EXPECT_THROW(temporal_weight(50'001, 50'000, 50'000, 0.05), ContractError);
}

TEST(TemporalWeight, MonotoneAndBounded) {
    double prev = 0.0;
    for (Micros t = 1; t <= 50'000; t += 37) {
        const double w = temporal_weight(t, 50'000, 50'000, 0.05);
        EXPECT_GE(w, 0.05);
        EXPECT_LE(w, 1.0);
        EXPECT_GE(w, prev);
        prev = w;
    }
}

TEST(WindowConfig, Validation) {
    EXPECT_THROW((WindowConfig{0.0, 50.0, 0.05}.validate()), ConfigError);
    EXPECT_THROW((WindowConfig{384.0, 0.0, 0.05}.validate()), ConfigError);
    EXPECT_THROW((WindowConfig{384.0, 50.0, 1.0}.validate()), ConfigError);
    EXPECT_EQ((WindowConfig{}.interval_us()), 50'000);
}
