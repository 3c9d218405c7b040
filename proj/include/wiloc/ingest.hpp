#ifndef WILOC_INGEST_HPP
#define WILOC_INGEST_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wiloc/fingerprint.hpp"
#include "wiloc/rng.hpp"

namespace wiloc {

// ---- trace parsing ----
//
// Trace TSV rows:
//   ts \t TYPE_WAYPOINT \t x \t y
//   ts \t TYPE_WIFI \t ssid \t bssid \t rssi [\t freq [\t last_ts]]
// Lines starting with '#' are comments. WIFI rows sharing a timestamp form a
// burst; each burst becomes one record labeled by the nearest-in-time
// waypoint of the same file, or an unlabeled record when the file has no
// waypoints. floor_id defaults to the parent directory name.

using WarnFn = std::function<void(const std::string&)>;

namespace ingest_detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find('\t', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline bool parse_ll(const std::string& s, std::int64_t& v) {
    try {
        std::size_t pos = 0;
        v = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline bool parse_d(const std::string& s, double& v) {
    try {
        std::size_t pos = 0;
        v = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(v);
    } catch (...) {
        return false;
    }
}

}  // namespace ingest_detail

inline std::vector<FingerprintRecord> parse_trace_file(const std::string& path, const WarnFn& warn,
                                                       const std::string& floor_override = "") {
    namespace fs = std::filesystem;
    std::ifstream is(path);
    detail::require(static_cast<bool>(is), "cannot open trace file: " + path);

    const std::string floor_id =
        !floor_override.empty() ? floor_override : fs::path(path).parent_path().filename().string();
    const std::string stem = fs::path(path).stem().string();

    struct Waypoint {
        std::int64_t ts;
        Vec2 pos;
    };
    std::vector<Waypoint> waypoints;
    // burst timestamp -> strongest reading per bssid
    std::map<std::int64_t, std::map<std::string, double>> bursts;

    std::string line;
    std::size_t lineno = 0, valid = 0;
    auto report = [&](const std::string& msg) {
        if (warn) warn(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto f = ingest_detail::split_tabs(line);
        std::int64_t ts = 0;
        if (f.size() < 2 || !ingest_detail::parse_ll(f[0], ts)) {
            report("malformed line, skipped");
            continue;
        }
        if (f[1] == "TYPE_WAYPOINT") {
            double x = 0, y = 0;
            if (f.size() < 4 || !ingest_detail::parse_d(f[2], x) || !ingest_detail::parse_d(f[3], y)) {
                report("malformed waypoint row, skipped");
                continue;
            }
            waypoints.push_back({ts, {x, y}});
            ++valid;
        } else if (f[1] == "TYPE_WIFI") {
            double rssi = 0;
            if (f.size() < 5 || !ingest_detail::parse_d(f[4], rssi) || rssi < -100.0 || rssi > 0.0) {
                report("malformed wifi row, skipped");
                continue;
            }
            const std::string& bssid = f[3];
            if (bssid.empty()) {
                report("empty bssid, skipped");
                continue;
            }
            auto& burst = bursts[ts];
            auto it = burst.find(bssid);
            if (it == burst.end() || rssi > it->second) burst[bssid] = rssi;  // keep strongest on collision
            ++valid;
        } else {
            // other sensor rows (IMU etc.) are out of scope; ignore silently
        }
    }
    detail::require(valid > 0, "trace file has no valid rows: " + path);

    std::vector<FingerprintRecord> out;
    for (const auto& [ts, readings] : bursts) {
        FingerprintRecord r;
        r.waypoint_id = stem + "#" + std::to_string(ts);
        r.floor_id = floor_id;
        r.timestamp = ts;
        if (!waypoints.empty()) {
            const Waypoint* best = &waypoints.front();
            for (const auto& w : waypoints)
                if (std::llabs(w.ts - ts) < std::llabs(best->ts - ts)) best = &w;
            r.coord = best->pos;
        }
        for (const auto& [bssid, rssi] : readings) r.readings.push_back({bssid, rssi});
        out.push_back(std::move(r));
    }
    return out;
}

/// Parses every file; merge order follows the sorted path list so the result
/// is independent of any per-file parallelism.
inline std::vector<FingerprintRecord> parse_traces(std::vector<std::string> paths, const WarnFn& warn = nullptr,
                                                   const std::string& floor_override = "") {
    detail::require(!paths.empty(), "parse_traces: no input files");
    std::sort(paths.begin(), paths.end());
    std::vector<FingerprintRecord> out;
    for (const auto& p : paths) {
        auto recs = parse_trace_file(p, warn, floor_override);
        out.insert(out.end(), recs.begin(), recs.end());
    }
    return out;
}

// ---- preprocessing ----

struct PreprocessResult {
    std::vector<FingerprintRecord> records;
    ApIndex index;
    NormStats stats;
};

namespace ingest_detail {

/// Keep the k strongest readings; ties broken by ascending bssid. Retained
/// readings are stored strongest-first (canonical order).
inline void keep_top_k(FingerprintRecord& r, std::size_t k) {
    std::sort(r.readings.begin(), r.readings.end(), [](const Reading& a, const Reading& b) {
        if (a.rssi != b.rssi) return a.rssi > b.rssi;
        return a.bssid < b.bssid;
    });
    if (r.readings.size() > k) r.readings.resize(k);
}

}  // namespace ingest_detail

/// Fits stats and the AP index on the given records (the data visible at
/// training time) and standardizes them in place. k is the strongest-readings
/// cutoff per record.
inline PreprocessResult preprocess(std::vector<FingerprintRecord> records, std::size_t k = 50) {
    detail::require(k >= 1, "preprocess: k must be >= 1");
    detail::require(!records.empty(), "preprocess: no records");
    for (auto& r : records) ingest_detail::keep_top_k(r, k);

    // accumulate in canonical id order so the fitted stats, and everything
    // derived from them, are independent of input ordering to the last bit
    std::vector<const FingerprintRecord*> canon;
    canon.reserve(records.size());
    for (const auto& r : records) canon.push_back(&r);
    std::sort(canon.begin(), canon.end(),
              [](const auto* a, const auto* b) { return a->waypoint_id < b->waypoint_id; });

    double sum = 0.0;
    std::size_t n = 0;
    double lo = 1e300, hi = -1e300;
    for (const auto* r : canon)
        for (const auto& rd : r->readings) {
            sum += rd.rssi;
            lo = std::min(lo, rd.rssi);
            hi = std::max(hi, rd.rssi);
            ++n;
        }
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto* r : canon)
        for (const auto& rd : r->readings) ss += (rd.rssi - mu) * (rd.rssi - mu);
    const double sigma = std::sqrt(ss / static_cast<double>(n));
    detail::require(sigma > 0.0, "degenerate RSSI distribution");

    NormStats stats{mu, sigma, lo, hi};
    ApIndex index = ApIndex::build(records);
    for (auto& r : records)
        for (auto& rd : r.readings) rd.rssi = stats.z(rd.rssi);
    return {std::move(records), std::move(index), stats};
}

/// Applies previously fitted stats to new records (inference path). Readings
/// from bssids unknown to the index are kept; they resolve to index 0.
inline std::vector<FingerprintRecord> apply_preprocess(std::vector<FingerprintRecord> records, std::size_t k,
                                                       const NormStats& stats) {
    detail::require(k >= 1, "apply_preprocess: k must be >= 1");
    for (auto& r : records) {
        ingest_detail::keep_top_k(r, k);
        for (auto& rd : r.readings) rd.rssi = stats.z(rd.rssi);
    }
    return records;
}

// ---- domain splitting ----

struct DomainDataset {
    std::string floor_id;
    int domain_id = 0;
    std::vector<FingerprintRecord> records;  // fully labeled
};

struct DomainSplit {
    std::vector<DomainDataset> sources;
    std::vector<FingerprintRecord> target_labeled;
    std::vector<FingerprintRecord> target_unlabeled_train;  // records with no ground truth at all
    std::vector<FingerprintRecord> target_val;              // labels hidden
    std::vector<FingerprintRecord> target_test;             // labels hidden
    std::map<std::string, Vec2> hidden_truth;               // val/test ground truth for scoring
    std::string target_floor;
    int target_domain_id = 0;
    double label_fraction = 0.0;
    std::uint64_t seed = 0;
};

/// Rotates one floor into the target role. Non-target floors become fully
/// labeled source domains; a uniform label_fraction of coordinate-bearing
/// target records keep labels, the rest are hidden and split 2:8 into
/// validation and test (rounding toward test). Coordinate-free target records
/// land in target_unlabeled_train. Deterministic in (records, seed).
inline DomainSplit split_domains(const std::vector<FingerprintRecord>& records, const std::string& target_floor,
                                 double label_fraction, std::uint64_t seed) {
    detail::require(label_fraction > 0.0 && label_fraction < 1.0, "split_domains: label_fraction must be in (0,1)");

    std::map<std::string, std::vector<FingerprintRecord>> by_floor;
    for (const auto& r : records) by_floor[r.floor_id].push_back(r);
    detail::require(by_floor.size() >= 2, "split_domains: need at least 2 floors");
    detail::require(by_floor.count(target_floor), "split_domains: target floor not present: " + target_floor);

    DomainSplit out;
    out.target_floor = target_floor;
    out.label_fraction = label_fraction;
    out.seed = seed;
    for (auto& [floor, recs] : by_floor) {
        if (floor == target_floor) continue;
        DomainDataset d;
        d.floor_id = floor;
        d.domain_id = static_cast<int>(out.sources.size());
        d.records = std::move(recs);
        std::sort(d.records.begin(), d.records.end(),
                  [](const auto& a, const auto& b) { return a.waypoint_id < b.waypoint_id; });
        out.sources.push_back(std::move(d));
    }
    out.target_domain_id = static_cast<int>(out.sources.size());

    std::vector<FingerprintRecord> labeled_pool;
    for (auto& r : by_floor[target_floor]) {
        if (r.coord)
            labeled_pool.push_back(std::move(r));
        else
            out.target_unlabeled_train.push_back(std::move(r));
    }
    std::sort(labeled_pool.begin(), labeled_pool.end(),
              [](const auto& a, const auto& b) { return a.waypoint_id < b.waypoint_id; });
    std::sort(out.target_unlabeled_train.begin(), out.target_unlabeled_train.end(),
              [](const auto& a, const auto& b) { return a.waypoint_id < b.waypoint_id; });

    const std::size_t n = labeled_pool.size();
    const std::size_t n_labeled = static_cast<std::size_t>(std::llround(label_fraction * static_cast<double>(n)));
    detail::require(n_labeled >= 1, "split_domains: label_fraction yields 0 labeled records");
    detail::require(n_labeled < n, "split_domains: label_fraction leaves no records for val/test");

    Rng rng(mix_seed(seed, fnv1a64(target_floor)));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    const std::size_t n_rest = n - n_labeled;
    const std::size_t n_val = static_cast<std::size_t>(std::floor(0.2 * static_cast<double>(n_rest)));
    for (std::size_t i = 0; i < n; ++i) {
        FingerprintRecord r = labeled_pool[order[i]];
        if (i < n_labeled) {
            out.target_labeled.push_back(std::move(r));
        } else {
            out.hidden_truth[r.waypoint_id] = *r.coord;
            r.coord = std::nullopt;
            if (i < n_labeled + n_val)
                out.target_val.push_back(std::move(r));
            else
                out.target_test.push_back(std::move(r));
        }
    }
    auto by_id = [](const auto& a, const auto& b) { return a.waypoint_id < b.waypoint_id; };
    std::sort(out.target_labeled.begin(), out.target_labeled.end(), by_id);
    std::sort(out.target_val.begin(), out.target_val.end(), by_id);
    std::sort(out.target_test.begin(), out.target_test.end(), by_id);
    return out;
}

/// All records of the split in one list (sources + every target partition).
inline std::vector<FingerprintRecord> all_split_records(const DomainSplit& split) {
    std::vector<FingerprintRecord> out;
    for (const auto& s : split.sources) out.insert(out.end(), s.records.begin(), s.records.end());
    out.insert(out.end(), split.target_labeled.begin(), split.target_labeled.end());
    out.insert(out.end(), split.target_unlabeled_train.begin(), split.target_unlabeled_train.end());
    out.insert(out.end(), split.target_val.begin(), split.target_val.end());
    out.insert(out.end(), split.target_test.begin(), split.target_test.end());
    return out;
}

}  // namespace wiloc

#endif  // WILOC_INGEST_HPP
