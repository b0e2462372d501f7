#include <evtrack/masks.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace evtrack;

TEST(EnlargeBbox, Examples) {
    const SensorSize big{1000, 1000};
    EXPECT_EQ(enlarge_bbox({10, 10, 80, 45}, 0.0, big), (PixelRect{10, 10, 80, 45}));
    EXPECT_EQ(enlarge_bbox({10, 10, 100, 50}, 0.1, big), (PixelRect{0, 5, 120, 60}));
    EXPECT_EQ(enlarge_bbox({200, 150, 80, 45}, 0.1, SensorSize{240, 180}), (PixelRect{192, 145, 48, 35}));
}

TEST(EnlargeBbox, FractionalEdgesGrowOutward) {
    EXPECT_EQ(enlarge_bbox({10.5, 10.5, 5, 5}, 0.0, SensorSize{}), (PixelRect{10, 10, 6, 6}));
}

TEST(EnlargeBbox, DegenerateOrOffSensorIsValueError) {
    EXPECT_THROW(enlarge_bbox({10, 10, 0, 5}, 0.1, SensorSize{}), ValueError);
    EXPECT_THROW(enlarge_bbox({300, 10, 5, 5}, 0.1, SensorSize{}), ValueError);
}

TEST(EnlargeBbox, ContainsInputWithinSensor) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> pos(0, 200), size(1, 60), fac(0, 0.5);
    for (int i = 0; i < 500; ++i) {
        const BBox b{pos(rng), pos(rng) * 0.8, size(rng), size(rng)};
        const PixelRect r = enlarge_bbox(b, fac(rng), SensorSize{240, 180});
        EXPECT_TRUE((SensorSize{240, 180}.rect().contains(r)));
        EXPECT_LE(r.left, std::max(0.0, b.left));
        EXPECT_LE(r.top, std::max(0.0, b.top));
        EXPECT_GE(r.right(), std::min(240.0, b.right()) - 1e-9);
        EXPECT_GE(r.bottom(), std::min(180.0, b.bottom()) - 1e-9);
    }
}

TEST(EventMask, MostRecentPolarityWins) {
    std::vector<Event> ev{{1, 3, 3, 1}, {2, 3, 3, -1}};
    const auto m = build_event_mask(ev, {0, 0, 5, 5}, 2);
    EXPECT_EQ(m.at(3, 3), -1);
    EXPECT_EQ(m.nonzero_count(), 1);
}

TEST(EventMask, EqualTimestampsTakeLaterRecord) {
    std::vector<Event> ev{{5, 1, 1, -1}, {5, 1, 1, 1}};
    EXPECT_EQ(build_event_mask(ev, {0, 0, 3, 3}, 5).at(1, 1), 1);
}

TEST(EventMask, SingleEvent) {
    std::vector<Event> ev{{1, 0, 0, 1}};
    const auto m = build_event_mask(ev, {0, 0, 4, 4}, 1);
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) EXPECT_EQ(m.at(x, y), (x == 0 && y == 0) ? 1 : 0);
    }
}

TEST(EventMask, NoEventsIsEmptyMaskError) {
    std::vector<Event> ev{{1, 50, 50, 1}};
    EXPECT_THROW(build_event_mask(ev, {0, 0, 4, 4}, 1), EmptyMaskError);
}

TEST(EventMask, ValuesMatchPerPixelScan) {
    std::mt19937 rng(9);
    std::vector<Event> ev;
    Micros t = 0;
    for (int i = 0; i < 400; ++i) {
        t += std::uniform_int_distribution<int>(0, 2)(rng);
        ev.push_back({t, std::uniform_int_distribution<int>(0, 19)(rng), std::uniform_int_distribution<int>(0, 14)(rng),
                      static_cast<std::int8_t>(rng() % 2 ? 1 : -1)});
    }
    const PixelRect region{3, 2, 12, 10};
    const auto m = build_event_mask(ev, region, t);
    for (int y = 0; y < region.height; ++y) {
        for (int x = 0; x < region.width; ++x) {
            int expected = 0;
            for (const auto& e : ev) {
                if (e.x == region.left + x && e.y == region.top + y) expected = e.p;  // last in stream wins
            }
            EXPECT_EQ(m.at(x, y), expected);
        }
    }
}

TEST(EventMask, ConstructorValidates) {
    EXPECT_THROW(EventMask(MaskKind::event_based, {0, 0, 2, 2}, {}, {0, 1, 0}, 0), ValueError);
    EXPECT_THROW(EventMask(MaskKind::edge_based, {0, 0, 2, 1}, {}, {0, -1}, 0), ValueError);
    EXPECT_THROW(EventMask(MaskKind::event_based, {0, 0, 2, 1}, {}, {0, 0}, 0), EmptyMaskError);
}

TEST(EdgeMask, UniformCropIsEmpty) {
    GrayImage img(20, 20, 128);
    EXPECT_THROW(build_edge_mask(img, {2, 2, 10, 10}), EmptyMaskError);
}

TEST(EdgeMask, VerticalStepMatchesSobelOtsuOracle) {
    GrayImage img(16, 8, 0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 8; x < 16; ++x) img.at(x, y) = 255;
    }
    const PixelRect region{2, 1, 12, 6};
    const auto m = build_edge_mask(img, region);

    std::vector<std::uint8_t> crop;
    for (int y = 0; y < region.height; ++y) {
        for (int x = 0; x < region.width; ++x) crop.push_back(img.at(region.left + x, region.top + y));
    }
    const auto mag = oracle::sobel_magnitude(crop, region.width, region.height);
    const int mx = *std::max_element(mag.begin(), mag.end());
    std::vector<std::uint8_t> scaled;
    for (int v : mag) scaled.push_back(static_cast<std::uint8_t>(v * 255 / mx));
    const auto t = oracle::otsu(scaled);
    ASSERT_TRUE(t);
    for (int y = 0; y < region.height; ++y) {
        for (int x = 0; x < region.width; ++x) {
            EXPECT_EQ(m.at(x, y), scaled[y * region.width + x] > *t ? 1 : 0);
        }
        // the step sits between crop columns 5 and 6
        EXPECT_EQ(m.at(5, y), 1);
        EXPECT_EQ(m.at(6, y), 1);
        EXPECT_EQ(m.at(0, y), 0);
        EXPECT_EQ(m.at(11, y), 0);
    }
}

TEST(EdgeMask, RegionOutsideImageIsValueError) {
    GrayImage img(10, 10, 0);
    EXPECT_THROW(build_edge_mask(img, {5, 5, 10, 10}), ValueError);
}

TEST(MaskKind, StringRoundTrip) {
    EXPECT_EQ(mask_kind_from_string(to_string(MaskKind::event_based)), MaskKind::event_based);
    EXPECT_EQ(mask_kind_from_string(to_string(MaskKind::edge_based)), MaskKind::edge_based);
    EXPECT_THROW(mask_kind_from_string("optical"), ConfigError);
}
