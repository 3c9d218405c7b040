#ifndef WILOC_FINGERPRINT_HPP
#define WILOC_FINGERPRINT_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "wiloc/common.hpp"

namespace wiloc {

struct Reading {
    std::string bssid;
    double rssi = 0.0;  // dBm before preprocessing, z-score after

    friend bool operator==(const Reading& a, const Reading& b) = default;
};

/// One waypoint observation. coord is absent for crowdsensed records.
struct FingerprintRecord {
    std::string waypoint_id;
    std::optional<Vec2> coord;
    std::string floor_id;
    std::vector<Reading> readings;
    std::optional<std::int64_t> timestamp = std::nullopt;  // milliseconds
};

inline void validate_raw_record(const FingerprintRecord& r) {
    detail::require(!r.readings.empty(), "record " + r.waypoint_id + ": readings must be non-empty");
    if (r.coord) detail::require(r.coord->finite(), "record " + r.waypoint_id + ": coord must be finite");
    std::vector<std::string> seen;
    for (const auto& rd : r.readings) {
        detail::require(rd.rssi >= -100.0 && rd.rssi <= 0.0,
                        "record " + r.waypoint_id + ": rssi out of [-100, 0]");
        seen.push_back(rd.bssid);
    }
    std::sort(seen.begin(), seen.end());
    detail::require(std::adjacent_find(seen.begin(), seen.end()) == seen.end(),
                    "record " + r.waypoint_id + ": duplicate bssid");
}

/// bssid -> contiguous index in [1, n_bssid]; 0 is reserved for unknown.
class ApIndex {
public:
    ApIndex() = default;

    /// Builds from the bssids observed in the given records (sorted, 1-based).
    static ApIndex build(const std::vector<FingerprintRecord>& records) {
        std::vector<std::string> ids;
        for (const auto& r : records)
            for (const auto& rd : r.readings) ids.push_back(rd.bssid);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        ApIndex idx;
        idx.bssids_ = std::move(ids);
        for (std::size_t i = 0; i < idx.bssids_.size(); ++i) idx.map_[idx.bssids_[i]] = static_cast<int>(i) + 1;
        return idx;
    }

    /// 0 when the bssid was never seen at fit time.
    int index_of(const std::string& bssid) const {
        auto it = map_.find(bssid);
        return it == map_.end() ? 0 : it->second;
    }

    int n_bssid() const { return static_cast<int>(bssids_.size()); }

    const std::vector<std::string>& known_bssids() const { return bssids_; }

    void insert(const std::string& bssid, int index) {
        detail::require(index >= 1, "ApIndex: index 0 is reserved");
        map_[bssid] = index;
        if (bssids_.size() < static_cast<std::size_t>(index)) bssids_.resize(static_cast<std::size_t>(index));
        bssids_[static_cast<std::size_t>(index) - 1] = bssid;
    }

private:
    std::unordered_map<std::string, int> map_;
    std::vector<std::string> bssids_;  // index i holds bssid with index i+1
};

/// Standardization statistics fitted on training readings, plus the raw dBm
/// range needed downstream (edge-weight scaling, missing-AP fill value).
struct NormStats {
    double mu = 0.0;
    double sigma = 1.0;
    double rssi_min = 0.0;  // raw dBm extremes over the fitted readings
    double rssi_max = 0.0;

    double z(double raw) const { return (raw - mu) / sigma; }
    double raw(double zval) const { return zval * sigma + mu; }
    double z_min() const { return z(rssi_min); }
    double z_max() const { return z(rssi_max); }
};

// ---- canonical dataset file: one JSON object per line ----

inline nlohmann::json record_to_json(const FingerprintRecord& r) {
    nlohmann::json j;
    j["waypoint_id"] = r.waypoint_id;
    if (r.coord)
        j["coord"] = {r.coord->x, r.coord->y};
    else
        j["coord"] = nullptr;
    j["floor_id"] = r.floor_id;
    nlohmann::json reads = nlohmann::json::array();
    for (const auto& rd : r.readings) reads.push_back({rd.bssid, rd.rssi});
    j["readings"] = std::move(reads);
    if (r.timestamp)
        j["timestamp"] = *r.timestamp;
    else
        j["timestamp"] = nullptr;
    return j;
}

inline FingerprintRecord record_from_json(const nlohmann::json& j) {
    FingerprintRecord r;
    r.waypoint_id = j.at("waypoint_id").get<std::string>();
    if (!j.at("coord").is_null()) {
        auto c = j.at("coord");
        r.coord = Vec2{c.at(0).get<double>(), c.at(1).get<double>()};
    }
    r.floor_id = j.at("floor_id").get<std::string>();
    for (const auto& e : j.at("readings")) r.readings.push_back({e.at(0).get<std::string>(), e.at(1).get<double>()});
    if (!j.at("timestamp").is_null()) r.timestamp = j.at("timestamp").get<std::int64_t>();
    return r;
}

inline void write_records(const std::string& path, const std::vector<FingerprintRecord>& records) {
    std::ofstream os(path);
    detail::require(static_cast<bool>(os), "cannot write dataset: " + path);
    for (const auto& r : records) os << record_to_json(r).dump() << '\n';
    detail::require(static_cast<bool>(os), "dataset write failed: " + path);
}

inline std::vector<FingerprintRecord> read_records(const std::string& path) {
    std::ifstream is(path);
    detail::require(static_cast<bool>(is), "cannot open dataset: " + path);
    std::vector<FingerprintRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw Error(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
        }
    }
    return out;
}

// ---- sidecar stats file: mu, sigma, raw range, bssid table ----

inline void save_stats(const std::string& path, const NormStats& stats, const ApIndex& index) {
    nlohmann::json j;
    j["mu"] = stats.mu;
    j["sigma"] = stats.sigma;
    j["rssi_min"] = stats.rssi_min;
    j["rssi_max"] = stats.rssi_max;
    nlohmann::json table = nlohmann::json::object();
    const auto& ids = index.known_bssids();
    for (std::size_t i = 0; i < ids.size(); ++i) table[ids[i]] = static_cast<int>(i) + 1;
    j["bssid_index"] = std::move(table);
    std::ofstream os(path);
    detail::require(static_cast<bool>(os), "cannot write stats: " + path);
    os << j.dump(2) << '\n';
}

inline std::pair<NormStats, ApIndex> load_stats(const std::string& path) {
    std::ifstream is(path);
    detail::require(static_cast<bool>(is), "cannot open stats: " + path);
    nlohmann::json j;
    is >> j;
    NormStats stats;
    stats.mu = j.at("mu").get<double>();
    stats.sigma = j.at("sigma").get<double>();
    stats.rssi_min = j.at("rssi_min").get<double>();
    stats.rssi_max = j.at("rssi_max").get<double>();
    ApIndex idx;
    for (auto it = j.at("bssid_index").begin(); it != j.at("bssid_index").end(); ++it)
        idx.insert(it.key(), it.value().get<int>());
    return {stats, idx};
}

// ---- ground-truth sidecar (synthetic sites, hidden-label scoring) ----

inline void write_truth(const std::string& path, const std::map<std::string, Vec2>& truth) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, c] : truth) j[id] = {c.x, c.y};
    std::ofstream os(path);
    detail::require(static_cast<bool>(os), "cannot write ground truth: " + path);
    os << j.dump() << '\n';
}

inline std::map<std::string, Vec2> read_truth(const std::string& path) {
    std::ifstream is(path);
    detail::require(static_cast<bool>(is), "cannot open ground truth: " + path);
    nlohmann::json j;
    is >> j;
    std::map<std::string, Vec2> out;
    for (auto it = j.begin(); it != j.end(); ++it)
        out[it.key()] = Vec2{it.value().at(0).get<double>(), it.value().at(1).get<double>()};
    return out;
}

}  // namespace wiloc

#endif  // WILOC_FINGERPRINT_HPP
