#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "wiloc/synthgen.hpp"

using namespace wiloc;

namespace {

SiteConfig small_site() {
    SiteConfig cfg;
    cfg.floors = 3;
    cfg.width = 30;
    cfg.length = 20;
    cfg.aps_per_floor = 6;
    cfg.waypoints_per_floor = 25;
    cfg.seed = 11;
    return cfg;
}

}  // namespace

TEST(RssiAt, ReferenceDistanceSameFloorGivesTxPower) {
    SiteConfig cfg;
    cfg.ref_distance = 1.0;
    Pos3 ap{0, 0, 2.5}, dev{1.0, 0, 2.5};
    auto r = rssi_at(ap, dev, cfg, 0.0);
    ASSERT_TRUE(r.has_value());
    EXPECT_DOUBLE_EQ(*r, cfg.tx_power_dbm);
}

TEST(RssiAt, DoubleDistanceWithExponentTwo) {
    // independent hand computation: 10 * 2 * log10(2) dB below tx power
    const double expected_drop = 20.0 * std::log10(2.0);  // 6.0205999132796239...
    SiteConfig cfg;
    cfg.path_loss_exponent = 2.0;
    cfg.ref_distance = 1.0;
    Pos3 ap{0, 0, 2.5}, dev{2.0, 0, 2.5};
    auto r = rssi_at(ap, dev, cfg, 0.0);
    ASSERT_TRUE(r.has_value());
    EXPECT_NEAR(*r, cfg.tx_power_dbm - expected_drop, 1e-12);
    EXPECT_NEAR(*r, cfg.tx_power_dbm - 6.0206, 1e-4);
}

TEST(RssiAt, OneFloorApartAtReferenceDistance) {
    SiteConfig cfg;
    cfg.ref_distance = 3.0;
    cfg.floor_attenuation_dbm = 15.0;
    Pos3 ap{0, 0, 2.5}, dev{0, 0, 5.5};  // directly above, d = 3 = ref, one slab crossed
    auto r = rssi_at(ap, dev, cfg, 0.0);
    ASSERT_TRUE(r.has_value());
    EXPECT_DOUBLE_EQ(*r, cfg.tx_power_dbm - 15.0);
}

TEST(RssiAt, BelowCutoffReturnsNothing) {
    SiteConfig cfg;
    cfg.rssi_floor = -60.0;
    Pos3 ap{0, 0, 2.5}, dev{1000.0, 0, 2.5};
    EXPECT_FALSE(rssi_at(ap, dev, cfg, 0.0).has_value());
}

TEST(RssiAt, WithinReferenceDistanceClampsToTx) {
    SiteConfig cfg;
    Pos3 ap{0, 0, 2.5}, dev{0.01, 0, 2.5};
    auto r = rssi_at(ap, dev, cfg, 0.0);
    ASSERT_TRUE(r.has_value());
    EXPECT_DOUBLE_EQ(*r, cfg.tx_power_dbm);
}

TEST(RssiAt, MonotoneNonIncreasingInDistance) {
    SiteConfig cfg;
    Pos3 ap{0, 0, 2.5};
    double prev = 1e300;
    for (double d = 0.5; d < 80.0; d += 0.5) {
        auto r = rssi_at(ap, {d, 0, 2.5}, cfg, 0.0);
        if (!r) break;
        EXPECT_LE(*r, prev + 1e-12);
        prev = *r;
    }
}

TEST(RssiAt, SymmetricUnderRoleSwap) {
    SiteConfig cfg;
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        Pos3 a{rng.uniform(0, 30), rng.uniform(0, 20), rng.uniform(0, 9)};
        Pos3 b{rng.uniform(0, 30), rng.uniform(0, 20), rng.uniform(0, 9)};
        auto r1 = rssi_at(a, b, cfg, 0.0);
        auto r2 = rssi_at(b, a, cfg, 0.0);
        EXPECT_EQ(r1.has_value(), r2.has_value());
        if (r1) EXPECT_DOUBLE_EQ(*r1, *r2);
    }
}

TEST(GenerateSite, MinimalCase) {
    SiteConfig cfg;
    cfg.floors = 1;
    cfg.aps_per_floor = 1;
    cfg.waypoints_per_floor = 1;
    cfg.width = 5;
    cfg.length = 5;
    cfg.noise_sigma_dbm = 0.0;
    auto site = generate_site(cfg);
    ASSERT_EQ(site.records.size(), 1u);
    EXPECT_EQ(site.records[0].readings.size(), 1u);
    EXPECT_EQ(site.ground_truth.size(), 1u);
}

TEST(GenerateSite, SameSeedGivesByteIdenticalOutput) {
    auto a = generate_site(small_site());
    auto b = generate_site(small_site());
    std::ostringstream sa, sb;
    for (const auto& r : a.records) sa << record_to_json(r).dump() << '\n';
    for (const auto& r : b.records) sb << record_to_json(r).dump() << '\n';
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(GenerateSite, DifferentSeedChangesOutput) {
    auto a = generate_site(small_site());
    auto cfg = small_site();
    cfg.seed = 12;
    auto b = generate_site(cfg);
    std::ostringstream sa, sb;
    for (const auto& r : a.records) sa << record_to_json(r).dump() << '\n';
    for (const auto& r : b.records) sb << record_to_json(r).dump() << '\n';
    EXPECT_NE(sa.str(), sb.str());
}

TEST(GenerateSite, CrossFloorAudibilityAtModerateAttenuation) {
    // brute-force count of (waypoint, AP) audible pairs on different floors;
    // must be positive for attenuation <= 10 dB at default power
    auto cfg = small_site();
    cfg.floor_attenuation_dbm = 10.0;
    cfg.noise_sigma_dbm = 0.0;
    auto site = generate_site(cfg);
    int cross = 0;
    for (const auto& rec : site.records) {
        const int wp_floor = rec.floor_id[1] - '0';
        for (const auto& rd : rec.readings) {
            const int ap_floor = rd.bssid[4] - '0';  // AP_F<d>_...
            if (ap_floor != wp_floor) ++cross;
        }
    }
    EXPECT_GT(cross, 0);
}

TEST(GenerateSite, AudibilityDecaysWithFloorAttenuation) {
    double prev_avg = 1e300;
    for (double att : {0.0, 8.0, 16.0, 30.0}) {
        auto cfg = small_site();
        cfg.noise_sigma_dbm = 0.0;
        cfg.floor_attenuation_dbm = att;
        auto site = generate_site(cfg);
        double total = 0;
        for (const auto& rec : site.records) total += static_cast<double>(rec.readings.size());
        const double avg = total / static_cast<double>(site.records.size());
        EXPECT_LE(avg, prev_avg + 1e-12);
        prev_avg = avg;
    }
}

TEST(GenerateSite, DeafWaypointConfigThrowsWithHint) {
    SiteConfig cfg;
    cfg.floors = 1;
    cfg.aps_per_floor = 1;
    cfg.waypoints_per_floor = 30;
    cfg.width = 2000;
    cfg.length = 2000;
    cfg.rssi_floor = -50.0;
    cfg.noise_sigma_dbm = 0.0;
    try {
        generate_site(cfg);
        FAIL() << "expected Error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("rssi_floor"), std::string::npos);
    }
}

TEST(GenerateSite, ConfigValidation) {
    SiteConfig cfg;
    cfg.floors = 0;
    EXPECT_THROW(generate_site(cfg), Error);
    cfg = SiteConfig{};
    cfg.ref_distance = 0.0;
    EXPECT_THROW(generate_site(cfg), Error);
    cfg = SiteConfig{};
    cfg.rssi_floor = -10.0;
    cfg.tx_power_dbm = -40.0;
    EXPECT_THROW(generate_site(cfg), Error);
}

TEST(GenerateSite, RecordsSatisfyRawInvariants) {
    auto site = generate_site(small_site());
    for (const auto& r : site.records) EXPECT_NO_THROW(validate_raw_record(r));
}
