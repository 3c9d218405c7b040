#ifndef WILOC_MODELS_COMMON_HPP
#define WILOC_MODELS_COMMON_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wiloc/fingerprint.hpp"
#include "wiloc/graph.hpp"
#include "wiloc/params.hpp"

namespace wiloc::models {

/// Affine map between site coordinates (meters) and the unit-scale frame the
/// networks train in. Fitted once per experiment from the labeled training
/// coordinates and carried inside every checkpoint.
struct CoordScaler {
    Vec2 mu{0.0, 0.0};
    Vec2 half{1.0, 1.0};

    static CoordScaler fit(const std::vector<Vec2>& coords) {
        detail::require(!coords.empty(), "CoordScaler: no coordinates");
        Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
        for (const Vec2& c : coords) {
            lo.x = std::min(lo.x, c.x);
            lo.y = std::min(lo.y, c.y);
            hi.x = std::max(hi.x, c.x);
            hi.y = std::max(hi.y, c.y);
        }
        CoordScaler s;
        s.mu = (lo + hi) * 0.5;
        s.half = {std::max(0.5 * (hi.x - lo.x), 1e-9), std::max(0.5 * (hi.y - lo.y), 1e-9)};
        return s;
    }

    static CoordScaler identity() { return {}; }

    Vec2 normalize(Vec2 c) const { return {(c.x - mu.x) / half.x, (c.y - mu.y) / half.y}; }
    Vec2 denormalize(Vec2 n) const { return {n.x * half.x + mu.x, n.y * half.y + mu.y}; }

    void register_meta(ad::ParamStore& store) const {
        store.meta("meta/coord_mu", {2}, {mu.x, mu.y});
        store.meta("meta/coord_scale", {2}, {half.x, half.y});
    }

    static CoordScaler from_store(const ad::ParamStore& store) {
        CoordScaler s;
        auto m = store.get("meta/coord_mu");
        auto h = store.get("meta/coord_scale");
        s.mu = {m->value[0], m->value[1]};
        s.half = {h->value[0], h->value[1]};
        return s;
    }
};

/// Readings of a batch of records, flattened for segment ops.
struct RecordBatch {
    std::vector<std::int64_t> bssid;  // embedding index per reading
    std::vector<double> rssi;         // standardized value per reading
    std::vector<std::int64_t> seg;    // reading -> record position
    std::vector<std::int64_t> slot;   // reading -> rank within its record
    std::size_t n_records = 0;
    std::vector<std::optional<Vec2>> label;  // raw coords where known

    static RecordBatch build(std::span<const FingerprintRecord* const> records, const ApIndex& index) {
        RecordBatch b;
        b.n_records = records.size();
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& reads = records[i]->readings;
            detail::require(!reads.empty(), "RecordBatch: empty reading set in " + records[i]->waypoint_id);
            for (std::size_t j = 0; j < reads.size(); ++j) {
                b.bssid.push_back(index.index_of(reads[j].bssid));
                b.rssi.push_back(reads[j].rssi);
                b.seg.push_back(static_cast<std::int64_t>(i));
                b.slot.push_back(static_cast<std::int64_t>(j));
            }
            b.label.push_back(records[i]->coord);
        }
        return b;
    }
};

/// A batch of subgraphs merged into one disjoint union, ready for the graph
/// models: per-role features, per-relation edges with batch-global indices,
/// and the segment tables the readout needs.
struct SubgraphBatch {
    std::size_t n_graphs = 0;
    std::size_t n_ap = 0, n_wp = 0, n_wpp = 0;

    std::vector<std::int64_t> ap_bssid;  // [n_ap]
    std::vector<double> wp_feat;         // [n_wp * 2], normalized coords

    struct RelE {
        std::vector<std::int64_t> src, dst;
        std::vector<double> w;     // raw edge weight
        std::vector<double> coef;  // per-edge GCN coefficient
        std::size_t size() const { return src.size(); }
    };
    std::array<RelE, kNumRel> rel;

    std::vector<std::int64_t> ap_graph, wp_graph, wpp_graph;  // node -> graph id
    std::vector<std::int64_t> center;                         // graph -> global wpp index
    std::vector<double> local_inv;                            // 1 / (1 + n_ap of graph)
    std::vector<double> role_presence_inv;                    // 1 / #roles present in graph

    std::vector<std::optional<Vec2>> label;  // raw center coords where known
    std::vector<int> domain;                 // per graph

    static SubgraphBatch build(std::span<const Subgraph* const> graphs, const CoordScaler& scaler) {
        SubgraphBatch b;
        b.n_graphs = graphs.size();
        for (const Subgraph* sg : graphs) {
            const std::int64_t g = static_cast<std::int64_t>(b.label.size());
            const std::int64_t ap_off = static_cast<std::int64_t>(b.n_ap);
            const std::int64_t wp_off = static_cast<std::int64_t>(b.n_wp);
            const std::int64_t wpp_off = static_cast<std::int64_t>(b.n_wpp);

            for (int bi : sg->ap_bssid) {
                b.ap_bssid.push_back(bi);
                b.ap_graph.push_back(g);
            }
            for (const Vec2& c : sg->wp_coord) {
                const Vec2 n = scaler.normalize(c);
                b.wp_feat.push_back(n.x);
                b.wp_feat.push_back(n.y);
                b.wp_graph.push_back(g);
            }
            for (int i = 0; i < sg->n_wpp; ++i) b.wpp_graph.push_back(g);

            const std::array<std::int64_t, kNumRel> src_off{wp_off, ap_off, wpp_off, ap_off};
            const std::array<std::int64_t, kNumRel> dst_off{ap_off, wp_off, ap_off, wpp_off};
            for (int r = 0; r < kNumRel; ++r) {
                const auto& e = sg->rel[r];
                for (std::size_t k = 0; k < e.size(); ++k) {
                    b.rel[r].src.push_back(src_off[r] + e.src[k]);
                    b.rel[r].dst.push_back(dst_off[r] + e.dst[k]);
                    b.rel[r].w.push_back(e.w[k]);
                    b.rel[r].coef.push_back(e.coef[k]);
                }
            }

            b.center.push_back(wpp_off);  // center is local WPP 0
            b.local_inv.push_back(1.0 / (1.0 + static_cast<double>(sg->ap_bssid.size())));
            b.role_presence_inv.push_back(sg->wp_coord.empty() ? 0.5 : 1.0 / 3.0);
            b.label.push_back(sg->label);
            b.domain.push_back(sg->domain_id);

            b.n_ap += sg->ap_bssid.size();
            b.n_wp += sg->wp_coord.size();
            b.n_wpp += static_cast<std::size_t>(sg->n_wpp);
        }
        return b;
    }
};

/// Normalized regression targets for the labeled members of a batch; returns
/// (row indices, flattened targets).
template <typename Batch>
std::pair<std::vector<std::int64_t>, std::vector<double>> labeled_targets(const Batch& batch,
                                                                          const CoordScaler& scaler) {
    std::vector<std::int64_t> rows;
    std::vector<double> t;
    for (std::size_t i = 0; i < batch.label.size(); ++i) {
        if (!batch.label[i]) continue;
        rows.push_back(static_cast<std::int64_t>(i));
        const Vec2 n = scaler.normalize(*batch.label[i]);
        t.push_back(n.x);
        t.push_back(n.y);
    }
    return {std::move(rows), std::move(t)};
}

}  // namespace wiloc::models

#endif  // WILOC_MODELS_COMMON_HPP
