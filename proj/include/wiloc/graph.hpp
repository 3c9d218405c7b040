#ifndef WILOC_GRAPH_HPP
#define WILOC_GRAPH_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wiloc/fingerprint.hpp"
#include "wiloc/rng.hpp"

// Waypoint-AP heterogeneous graph. Node roles: labeled waypoints (WP),
// access points (AP), and waypoints-to-predict (WPP, all-ones feature).
// Every reading yields a mirrored edge pair whose weight is the standardized
// RSSI remapped into (0, 1].

namespace wiloc {

enum class Role : int { WP = 0, AP = 1, WPP = 2 };

enum Rel : int { kWp2Ap = 0, kAp2Wp = 1, kWpp2Ap = 2, kAp2Wpp = 3 };
constexpr int kNumRel = 4;

constexpr double kEdgeWeightEps = 1e-3;

struct NodeRef {
    Role role = Role::WP;
    int idx = 0;
    friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

/// Standardized RSSI -> edge weight in (0, 1], min-max mapped over the
/// training z-range and clamped.
inline double edge_weight_from_z(double z, const NormStats& stats) {
    const double lo = stats.z_min(), hi = stats.z_max();
    double w = hi > lo ? (z - lo) / (hi - lo) : 1.0;
    return std::clamp(w, kEdgeWeightEps, 1.0);
}

struct HeteroGraph {
    // WP nodes
    std::vector<std::string> wp_id;
    std::vector<Vec2> wp_coord;
    std::vector<int> wp_domain;
    // WPP nodes
    std::vector<std::string> wpp_id;
    std::vector<int> wpp_domain;
    // AP nodes
    std::vector<int> ap_bssid_index;

    // adjacency, canonical order (by AP node id / by NodeRef)
    std::vector<std::vector<std::pair<int, double>>> wp_adj;   // wp -> (ap node, weight)
    std::vector<std::vector<std::pair<int, double>>> wpp_adj;  // wpp -> (ap node, weight)
    std::vector<std::vector<std::pair<NodeRef, double>>> ap_adj;

    std::unordered_map<std::string, NodeRef> node_of_waypoint;
    std::map<std::string, int> domain_of_floor;

    std::size_t n_wp() const { return wp_id.size(); }
    std::size_t n_ap() const { return ap_bssid_index.size(); }
    std::size_t n_wpp() const { return wpp_id.size(); }

    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& a : wp_adj) n += a.size();
        for (const auto& a : wpp_adj) n += a.size();
        for (const auto& a : ap_adj) n += a.size();
        return n;
    }

    const std::string& waypoint_id_of(NodeRef n) const {
        return n.role == Role::WP ? wp_id[static_cast<std::size_t>(n.idx)] : wpp_id[static_cast<std::size_t>(n.idx)];
    }
    int domain_of(NodeRef n) const {
        return n.role == Role::WP ? wp_domain[static_cast<std::size_t>(n.idx)]
                                  : wpp_domain[static_cast<std::size_t>(n.idx)];
    }
};

/// Builds the site graph from preprocessed records. Node ids are canonical
/// (records sorted by waypoint id, APs by bssid index), so the result is
/// independent of input ordering. floor_to_domain may be empty, in which case
/// floors are enumerated in sorted order.
inline HeteroGraph build_site_graph(const std::vector<FingerprintRecord>& records, const ApIndex& index,
                                    const NormStats& stats,
                                    std::map<std::string, int> floor_to_domain = {}) {
    detail::require(!records.empty(), "build_site_graph: empty record set");

    std::vector<const FingerprintRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->waypoint_id < b->waypoint_id; });

    if (floor_to_domain.empty()) {
        for (const auto* r : sorted) floor_to_domain.emplace(r->floor_id, 0);
        int d = 0;
        for (auto& [floor, id] : floor_to_domain) id = d++;
    }

    HeteroGraph g;
    g.domain_of_floor = floor_to_domain;

    // AP nodes for every observed embedding index
    std::vector<int> observed;
    for (const auto* r : sorted)
        for (const auto& rd : r->readings) observed.push_back(index.index_of(rd.bssid));
    std::sort(observed.begin(), observed.end());
    observed.erase(std::unique(observed.begin(), observed.end()), observed.end());
    std::unordered_map<int, int> ap_node_of;
    for (int bi : observed) {
        ap_node_of[bi] = static_cast<int>(g.ap_bssid_index.size());
        g.ap_bssid_index.push_back(bi);
    }
    g.ap_adj.resize(g.ap_bssid_index.size());

    for (const auto* r : sorted) {
        auto dit = floor_to_domain.find(r->floor_id);
        detail::require(dit != floor_to_domain.end(), "build_site_graph: unmapped floor " + r->floor_id);
        NodeRef node;
        if (r->coord) {
            node = {Role::WP, static_cast<int>(g.wp_id.size())};
            g.wp_id.push_back(r->waypoint_id);
            g.wp_coord.push_back(*r->coord);
            g.wp_domain.push_back(dit->second);
            g.wp_adj.emplace_back();
        } else {
            node = {Role::WPP, static_cast<int>(g.wpp_id.size())};
            g.wpp_id.push_back(r->waypoint_id);
            g.wpp_domain.push_back(dit->second);
            g.wpp_adj.emplace_back();
        }
        detail::require(!g.node_of_waypoint.count(r->waypoint_id),
                        "build_site_graph: duplicate waypoint id " + r->waypoint_id);
        g.node_of_waypoint[r->waypoint_id] = node;

        auto& adj = node.role == Role::WP ? g.wp_adj.back() : g.wpp_adj.back();
        for (const auto& rd : r->readings) {
            const int ap = ap_node_of.at(index.index_of(rd.bssid));
            const double w = edge_weight_from_z(rd.rssi, stats);
            adj.push_back({ap, w});
            g.ap_adj[static_cast<std::size_t>(ap)].push_back({node, w});
        }
        std::sort(adj.begin(), adj.end());
    }
    for (auto& a : g.ap_adj) std::sort(a.begin(), a.end());
    return g;
}

/// Sampled neighborhood around one center waypoint. The center is always the
/// first WPP node; labels never enter node features.
struct Subgraph {
    std::string center_id;
    std::optional<Vec2> label;
    int domain_id = 0;
    int sample_index = 0;

    std::vector<int> ap_bssid;   // local AP node -> embedding index
    std::vector<Vec2> wp_coord;  // local labeled-WP features
    int n_wpp = 1;               // center is local WPP 0

    struct RelEdges {
        std::vector<std::int32_t> src, dst;
        std::vector<double> w;     // edge weight
        std::vector<double> coef;  // w / (sqrt(outdeg_src) * sqrt(indeg_dst))
        std::size_t size() const { return src.size(); }
    };
    std::array<RelEdges, kNumRel> rel;

    // site-node provenance, used by tests and the cache
    std::vector<int> site_ap;
    std::vector<int> site_wp;
    std::vector<int> site_wpp;  // excludes the center

    std::size_t node_count() const { return 1 + ap_bssid.size() + wp_coord.size() + (n_wpp - 1); }
    std::size_t edge_count() const {
        std::size_t n = 0;
        for (const auto& e : rel) n += e.size();
        return n;
    }
};

namespace graph_detail {

inline void finish_coefs(Subgraph& sg) {
    const std::size_t n_ap = sg.ap_bssid.size();
    const std::size_t n_wp = sg.wp_coord.size();
    const std::size_t n_wpp = static_cast<std::size_t>(sg.n_wpp);
    const std::array<std::size_t, kNumRel> n_src{n_wp, n_ap, n_wpp, n_ap};
    const std::array<std::size_t, kNumRel> n_dst{n_ap, n_wp, n_ap, n_wpp};
    for (int r = 0; r < kNumRel; ++r) {
        auto& e = sg.rel[r];
        std::vector<int> outdeg(n_src[r], 0), indeg(n_dst[r], 0);
        for (std::size_t k = 0; k < e.size(); ++k) {
            outdeg[static_cast<std::size_t>(e.src[k])]++;
            indeg[static_cast<std::size_t>(e.dst[k])]++;
        }
        e.coef.resize(e.size());
        for (std::size_t k = 0; k < e.size(); ++k) {
            const double c = std::sqrt(static_cast<double>(outdeg[static_cast<std::size_t>(e.src[k])])) *
                             std::sqrt(static_cast<double>(indeg[static_cast<std::size_t>(e.dst[k])]));
            e.coef[k] = e.w[k] / c;
        }
    }
}

}  // namespace graph_detail

/// Samples the center's neighborhood: all (up to fanout1, strongest-first) AP
/// neighbors, then up to fanout2 distinct further waypoints per AP, drawn
/// without replacement and without reusing a waypoint already selected. Every
/// edge between selected nodes is kept. Deterministic in
/// (seed, center id, sample_index).
inline Subgraph sample_subgraph(const HeteroGraph& g, const std::string& center_id, std::uint64_t seed,
                                int fanout1 = 50, int fanout2 = 5, int sample_index = 0) {
    auto it = g.node_of_waypoint.find(center_id);
    detail::require(it != g.node_of_waypoint.end(), "sample_subgraph: unknown center " + center_id);
    const NodeRef center = it->second;

    const auto& center_adj = center.role == Role::WP ? g.wp_adj[static_cast<std::size_t>(center.idx)]
                                                     : g.wpp_adj[static_cast<std::size_t>(center.idx)];
    detail::require(!center_adj.empty(), "sample_subgraph: center has no AP neighbors: " + center_id);

    std::vector<std::pair<int, double>> aps(center_adj.begin(), center_adj.end());
    if (static_cast<int>(aps.size()) > fanout1) {
        std::sort(aps.begin(), aps.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        aps.resize(static_cast<std::size_t>(fanout1));
        std::sort(aps.begin(), aps.end());
    }

    Rng rng(mix_seed(seed, fnv1a64(center_id), static_cast<std::uint64_t>(sample_index)));

    std::vector<bool> wp_chosen(g.n_wp(), false), wpp_chosen(g.n_wpp(), false);
    auto mark = [&](NodeRef n) {
        if (n.role == Role::WP)
            wp_chosen[static_cast<std::size_t>(n.idx)] = true;
        else
            wpp_chosen[static_cast<std::size_t>(n.idx)] = true;
    };
    auto marked = [&](NodeRef n) {
        return n.role == Role::WP ? wp_chosen[static_cast<std::size_t>(n.idx)]
                                  : wpp_chosen[static_cast<std::size_t>(n.idx)];
    };
    mark(center);

    std::vector<NodeRef> second_order;
    for (const auto& [ap, w] : aps) {
        std::vector<NodeRef> pool;
        for (const auto& [nbr, nw] : g.ap_adj[static_cast<std::size_t>(ap)])
            if (!marked(nbr)) pool.push_back(nbr);
        // consecutive duplicates possible only if a record repeated a bssid,
        // which the ingest invariants forbid
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(fanout2), pool.size());
        for (std::size_t pick : rng.sample_indices(pool.size(), take)) {
            mark(pool[pick]);
            second_order.push_back(pool[pick]);
        }
    }

    Subgraph sg;
    sg.center_id = center_id;
    sg.sample_index = sample_index;
    sg.domain_id = g.domain_of(center);
    if (center.role == Role::WP) sg.label = g.wp_coord[static_cast<std::size_t>(center.idx)];

    // local numbering: APs ascending; WP / WPP second-order ascending; center = WPP 0
    std::unordered_map<int, int> ap_local;
    for (const auto& [ap, w] : aps) {
        ap_local[ap] = static_cast<int>(sg.ap_bssid.size());
        sg.ap_bssid.push_back(g.ap_bssid_index[static_cast<std::size_t>(ap)]);
        sg.site_ap.push_back(ap);
    }
    std::sort(second_order.begin(), second_order.end());
    std::unordered_map<int, int> wp_local, wpp_local;
    for (const NodeRef& n : second_order) {
        if (n.role == Role::WP) {
            wp_local[n.idx] = static_cast<int>(sg.wp_coord.size());
            sg.wp_coord.push_back(g.wp_coord[static_cast<std::size_t>(n.idx)]);
            sg.site_wp.push_back(n.idx);
        } else {
            wpp_local[n.idx] = sg.n_wpp++;
            sg.site_wpp.push_back(n.idx);
        }
    }

    auto add_pair = [&](Rel fwd, Rel bwd, int wp_side_local, int ap_node, double w) {
        const int a = ap_local.at(ap_node);
        sg.rel[fwd].src.push_back(wp_side_local);
        sg.rel[fwd].dst.push_back(a);
        sg.rel[fwd].w.push_back(w);
        sg.rel[bwd].src.push_back(a);
        sg.rel[bwd].dst.push_back(wp_side_local);
        sg.rel[bwd].w.push_back(w);
    };

    // the center acts as a waypoint-to-predict whatever its site role
    for (const auto& [ap, w] : aps) add_pair(kWpp2Ap, kAp2Wpp, 0, ap, w);
    for (const NodeRef& n : second_order) {
        const auto& adj = n.role == Role::WP ? g.wp_adj[static_cast<std::size_t>(n.idx)]
                                             : g.wpp_adj[static_cast<std::size_t>(n.idx)];
        for (const auto& [ap, w] : adj) {
            if (!ap_local.count(ap)) continue;  // only connections inside the sample are kept
            if (n.role == Role::WP)
                add_pair(kWp2Ap, kAp2Wp, wp_local.at(n.idx), ap, w);
            else
                add_pair(kWpp2Ap, kAp2Wpp, wpp_local.at(n.idx), ap, w);
        }
    }
    graph_detail::finish_coefs(sg);
    return sg;
}

/// times independent samples with derived per-index streams.
inline std::vector<Subgraph> repeat_sample(const HeteroGraph& g, const std::string& center_id, int times,
                                           std::uint64_t seed, int fanout1 = 50, int fanout2 = 5) {
    detail::require(times >= 1, "repeat_sample: times must be >= 1");
    std::vector<Subgraph> out;
    out.reserve(static_cast<std::size_t>(times));
    for (int k = 0; k < times; ++k) out.push_back(sample_subgraph(g, center_id, seed, fanout1, fanout2, k));
    return out;
}

}  // namespace wiloc

#endif  // WILOC_GRAPH_HPP
