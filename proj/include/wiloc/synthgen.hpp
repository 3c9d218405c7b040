#ifndef WILOC_SYNTHGEN_HPP
#define WILOC_SYNTHGEN_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wiloc/fingerprint.hpp"
#include "wiloc/rng.hpp"

// Deterministic multi-floor site generator: log-distance path loss with
// per-floor attenuation, Gaussian reading noise, integer-dBm quantization.
// Keeps the pipeline testable without the real dataset while reproducing its
// central difficulty (one AP audible on several floors).

namespace wiloc {

struct SiteConfig {
    int floors = 3;
    double width = 60.0;   // meters, x extent
    double length = 40.0;  // meters, y extent
    int aps_per_floor = 30;
    int waypoints_per_floor = 300;
    double tx_power_dbm = -40.0;       // at ref_distance
    double path_loss_exponent = 2.5;
    double ref_distance = 1.0;         // meters
    double floor_attenuation_dbm = 15.0;
    double noise_sigma_dbm = 2.0;
    double rssi_floor = -95.0;         // audibility cutoff, dBm
    std::uint64_t seed = 1;

    void validate() const {
        detail::require(floors >= 1 && aps_per_floor >= 1 && waypoints_per_floor >= 1,
                        "SiteConfig: counts must be >= 1");
        detail::require(ref_distance > 0.0, "SiteConfig: ref_distance must be positive");
        detail::require(noise_sigma_dbm >= 0.0, "SiteConfig: noise sigma must be non-negative");
        detail::require(rssi_floor <= tx_power_dbm, "SiteConfig: rssi_floor must not exceed tx power");
        detail::require(width > 0.0 && length > 0.0, "SiteConfig: dimensions must be positive");
    }
};

struct Pos3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

constexpr double kFloorHeight = 3.0;  // meters between floor slabs

inline int floor_index_of(double z) { return static_cast<int>(std::floor(z / kFloorHeight)); }

/// Log-distance path loss with per-floor attenuation. Returns the received
/// power in dBm, or nothing when it falls below the audibility cutoff.
inline std::optional<double> rssi_at(const Pos3& ap, const Pos3& device, const SiteConfig& cfg,
                                     double noise_draw = 0.0) {
    const double dx = ap.x - device.x, dy = ap.y - device.y, dz = ap.z - device.z;
    const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    const int crossings = std::abs(floor_index_of(ap.z) - floor_index_of(device.z));
    const double r = cfg.tx_power_dbm -
                     10.0 * cfg.path_loss_exponent * std::log10(std::max(d, cfg.ref_distance) / cfg.ref_distance) -
                     cfg.floor_attenuation_dbm * crossings + noise_draw;
    if (r < cfg.rssi_floor) return std::nullopt;
    return r;
}

struct SyntheticSite {
    std::vector<FingerprintRecord> records;        // fully labeled
    std::map<std::string, Vec2> ground_truth;      // waypoint_id -> coord
    std::vector<Pos3> ap_positions;                // by AP index order below
    std::vector<std::string> ap_bssids;
};

namespace synth_detail {

inline std::string ap_name(int floor, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "AP_F%d_%03d", floor, i);
    return buf;
}

inline std::string wp_name(int floor, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "F%d:wp%04d", floor, i);
    return buf;
}

}  // namespace synth_detail

/// APs uniform per floor, waypoints on a jittered grid; each record reads
/// every audible AP (pre top-k). Bit-deterministic per seed: every waypoint
/// has its own derived RNG stream and noise is drawn for every AP whether or
/// not it ends up audible.
inline SyntheticSite generate_site(const SiteConfig& cfg) {
    cfg.validate();
    SyntheticSite site;

    for (int f = 0; f < cfg.floors; ++f) {
        Rng ap_rng(mix_seed(cfg.seed, fnv1a64("aps"), static_cast<std::uint64_t>(f)));
        for (int a = 0; a < cfg.aps_per_floor; ++a) {
            Pos3 p{ap_rng.uniform(0.0, cfg.width), ap_rng.uniform(0.0, cfg.length), f * kFloorHeight + 2.5};
            site.ap_positions.push_back(p);
            site.ap_bssids.push_back(synth_detail::ap_name(f, a));
        }
    }

    // jittered grid: enough cells for the requested count, aspect-matched
    const int cols = std::max(1, static_cast<int>(std::ceil(
                                      std::sqrt(cfg.waypoints_per_floor * cfg.width / cfg.length))));
    const int rows = std::max(1, (cfg.waypoints_per_floor + cols - 1) / cols);
    const double cw = cfg.width / cols, cl = cfg.length / rows;

    for (int f = 0; f < cfg.floors; ++f) {
        for (int i = 0; i < cfg.waypoints_per_floor; ++i) {
            Rng wp_rng(mix_seed(cfg.seed, fnv1a64("wp"), static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(i)));
            const int gx = i % cols, gy = i / cols;
            const double x = std::clamp((gx + 0.5 + wp_rng.uniform(-0.35, 0.35)) * cw, 0.0, cfg.width);
            const double y = std::clamp((gy % rows + 0.5 + wp_rng.uniform(-0.35, 0.35)) * cl, 0.0, cfg.length);
            const Pos3 dev{x, y, f * kFloorHeight + 1.2};

            FingerprintRecord rec;
            rec.waypoint_id = synth_detail::wp_name(f, i);
            rec.floor_id = "F" + std::to_string(f);
            rec.coord = Vec2{x, y};
            for (std::size_t a = 0; a < site.ap_positions.size(); ++a) {
                const double noise = cfg.noise_sigma_dbm > 0.0 ? wp_rng.normal(0.0, cfg.noise_sigma_dbm) : 0.0;
                auto r = rssi_at(site.ap_positions[a], dev, cfg, noise);
                if (r) {
                    const double q = std::clamp(std::round(*r), -100.0, 0.0);  // integer dBm as a receiver reports
                    rec.readings.push_back({site.ap_bssids[a], q});
                }
            }
            if (rec.readings.empty())
                throw Error("generate_site: waypoint " + rec.waypoint_id +
                            " hears no APs; lower rssi_floor or raise tx power");
            site.ground_truth[rec.waypoint_id] = *rec.coord;
            site.records.push_back(std::move(rec));
        }
    }
    return site;
}

}  // namespace wiloc

#endif  // WILOC_SYNTHGEN_HPP
