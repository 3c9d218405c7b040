#ifndef WILOC_MODELS_KNN_HPP
#define WILOC_MODELS_KNN_HPP

#include <algorithm>
#include <vector>

#include "wiloc/models/common.hpp"

// Fingerprint nearest-neighbor baseline. Records become sparse vectors over
// the AP index; APs absent from a fingerprint take the standardized floor
// value (the z-score of the weakest reading seen at fit time).

namespace wiloc::models {

class KnnModel {
public:
    static constexpr const char* kKind = "knn";

    KnnModel(const std::vector<FingerprintRecord>& train, const ApIndex& index, const NormStats& stats)
        : fill_(stats.z_min()) {
        detail::require(!train.empty(), "KnnModel: empty train set");
        for (const auto& r : train) {
            detail::require(r.coord.has_value(), "KnnModel: unlabeled record in train set: " + r.waypoint_id);
            refs_.push_back(sparsify(r, index));
            coords_.push_back(*r.coord);
        }
    }

    /// Mean coordinate of the k nearest training fingerprints by Euclidean
    /// distance; ties resolved by training order.
    Vec2 predict(const FingerprintRecord& query, const ApIndex& index, int k) const {
        detail::require(k >= 1, "KnnModel: k must be >= 1");
        const auto q = sparsify(query, index);
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(refs_.size());
        for (std::size_t i = 0; i < refs_.size(); ++i) dist.push_back({distance2(q, refs_[i]), i});
        const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
        Vec2 acc{0, 0};
        for (std::size_t i = 0; i < kk; ++i) acc = acc + coords_[dist[i].second];
        return acc * (1.0 / static_cast<double>(kk));
    }

private:
    using Sparse = std::vector<std::pair<int, double>>;  // (ap index, z), sorted

    Sparse sparsify(const FingerprintRecord& r, const ApIndex& index) const {
        Sparse s;
        for (const auto& rd : r.readings) {
            const int i = index.index_of(rd.bssid);
            if (i == 0) continue;  // identity unknown, no stable dimension
            s.push_back({i, rd.rssi});
        }
        std::sort(s.begin(), s.end());
        return s;
    }

    /// Squared distance over the union of observed dimensions, with the fill
    /// value standing in for the missing side. Dimensions observed in neither
    /// fingerprint contribute nothing.
    double distance2(const Sparse& a, const Sparse& b) const {
        double acc = 0.0;
        std::size_t i = 0, j = 0;
        while (i < a.size() || j < b.size()) {
            if (j >= b.size() || (i < a.size() && a[i].first < b[j].first)) {
                const double d = a[i].second - fill_;
                acc += d * d;
                ++i;
            } else if (i >= a.size() || b[j].first < a[i].first) {
                const double d = b[j].second - fill_;
                acc += d * d;
                ++j;
            } else {
                const double d = a[i].second - b[j].second;
                acc += d * d;
                ++i;
                ++j;
            }
        }
        return acc;
    }

    std::vector<Sparse> refs_;
    std::vector<Vec2> coords_;
    double fill_;
};

/// One-shot form of the baseline.
inline Vec2 knn_predict(const std::vector<FingerprintRecord>& train, const FingerprintRecord& query,
                        const ApIndex& index, const NormStats& stats, int k) {
    return KnnModel(train, index, stats).predict(query, index, k);
}

}  // namespace wiloc::models

#endif  // WILOC_MODELS_KNN_HPP
