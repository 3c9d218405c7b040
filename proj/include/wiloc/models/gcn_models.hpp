#ifndef WILOC_MODELS_GCN_MODELS_HPP
#define WILOC_MODELS_GCN_MODELS_HPP

#include <array>
#include <string>

#include "wiloc/models/common.hpp"
#include "wiloc/rng.hpp"

// Relation-typed graph layers and the graph model ladder. Node features are
// encoded per role, pushed through weighted graph convolutions (and one
// multi-head attention layer for the attention variant), pooled by the
// order-free readout, and regressed; the adversarial variant adds a
// discriminator head behind a gradient reversal.

namespace wiloc::models {

constexpr int kGcnHidden = 32;
constexpr int kGatHeads = 4;

constexpr std::array<Role, kNumRel> kSrcRole{Role::WP, Role::AP, Role::WPP, Role::AP};
constexpr std::array<Role, kNumRel> kDstRole{Role::AP, Role::WP, Role::AP, Role::WPP};
inline const std::array<std::string, kNumRel> kRelName{"wp2ap", "ap2wp", "wpp2ap", "ap2wpp"};

// relations registered into each destination role (AP receives two)
constexpr std::array<double, 3> kRelInvCount{1.0, 0.5, 1.0};  // WP, AP, WPP

using RoleTensors = std::array<ad::TensorPtr, 3>;

inline std::size_t role_count(const SubgraphBatch& b, Role r) {
    switch (r) {
        case Role::WP: return b.n_wp;
        case Role::AP: return b.n_ap;
        case Role::WPP: return b.n_wpp;
    }
    return 0;
}

/// One relation of the weighted graph convolution:
/// h'_i = relu(b + sum_j coef_ji * h_j W), coef = w / sqrt(deg_out deg_in).
/// Destinations without in-edges receive relu(b).
inline ad::TensorPtr weighted_gcn_relation(ad::Tape* tape, const SubgraphBatch& batch, int rel,
                                           const ad::TensorPtr& h_src, std::size_t n_dst,
                                           const ad::TensorPtr& w, const ad::TensorPtr& b) {
    auto msg = ad::matmul(tape, h_src, w);
    auto gathered = ad::gather_rows(tape, msg, batch.rel[rel].src);
    auto scaled = ad::scale_rows(tape, gathered, batch.rel[rel].coef);
    auto agg = ad::segment_sum(tape, scaled, batch.rel[rel].dst, n_dst);
    return ad::relu(tape, ad::add_bias(tape, agg, b));
}

/// One relation of multi-head graph attention, heads averaged. Attention
/// ignores the edge weight; isolated destinations give zero rows.
inline ad::TensorPtr gat_relation(ad::Tape* tape, const SubgraphBatch& batch, int rel, const ad::TensorPtr& h_src,
                                  const ad::TensorPtr& h_dst, std::size_t n_dst, const ad::ParamStore& p,
                                  const std::string& prefix) {
    ad::TensorPtr acc;
    for (int head = 0; head < kGatHeads; ++head) {
        const std::string hp = prefix + "/h" + std::to_string(head);
        auto w = p.get(hp + "/w");
        auto hw_src = ad::matmul(tape, h_src, w);
        auto hw_dst = ad::matmul(tape, h_dst, w);
        auto er = ad::matmul(tape, hw_src, p.get(hp + "/a_src"));  // [n_src, 1]
        auto el = ad::matmul(tape, hw_dst, p.get(hp + "/a_dst"));  // [n_dst, 1]
        auto score = ad::leaky_relu(
            tape, ad::add(tape, ad::gather_rows(tape, el, batch.rel[rel].dst), ad::gather_rows(tape, er, batch.rel[rel].src)),
            0.01);
        auto alpha = ad::segment_softmax(tape, score, batch.rel[rel].dst, n_dst);
        auto msg = ad::rowwise_mul(tape, ad::gather_rows(tape, hw_src, batch.rel[rel].src), alpha);
        auto out = ad::segment_sum(tape, msg, batch.rel[rel].dst, n_dst);
        acc = acc ? ad::add(tape, acc, out) : out;
    }
    return ad::scale(tape, acc, 1.0 / kGatHeads);
}

/// Relation-typed convolution over the whole batch: every registered relation
/// contributes (isolated destinations included), and each destination role
/// averages its relations' outputs.
inline RoleTensors hetero_gcn_layer(ad::Tape* tape, const SubgraphBatch& batch, const RoleTensors& h,
                                    const ad::ParamStore& p, const std::string& prefix) {
    std::array<ad::TensorPtr, 3> acc{};
    for (int r = 0; r < kNumRel; ++r) {
        const int src = static_cast<int>(kSrcRole[r]), dst = static_cast<int>(kDstRole[r]);
        auto out = weighted_gcn_relation(tape, batch, r, h[src], role_count(batch, kDstRole[r]),
                                         p.get(prefix + "/" + kRelName[r] + "/w"),
                                         p.get(prefix + "/" + kRelName[r] + "/b"));
        acc[dst] = acc[dst] ? ad::add(tape, acc[dst], out) : out;
    }
    RoleTensors out;
    for (int role = 0; role < 3; ++role) out[role] = ad::scale(tape, acc[role], kRelInvCount[role]);
    return out;
}

inline RoleTensors hetero_gat_layer(ad::Tape* tape, const SubgraphBatch& batch, const RoleTensors& h,
                                    const ad::ParamStore& p, const std::string& prefix) {
    std::array<ad::TensorPtr, 3> acc{};
    for (int r = 0; r < kNumRel; ++r) {
        const int src = static_cast<int>(kSrcRole[r]), dst = static_cast<int>(kDstRole[r]);
        auto out = gat_relation(tape, batch, r, h[src], h[dst], role_count(batch, kDstRole[r]), p,
                                prefix + "/" + kRelName[r]);
        acc[dst] = acc[dst] ? ad::add(tape, acc[dst], out) : out;
    }
    RoleTensors out;
    for (int role = 0; role < 3; ++role) out[role] = ad::scale(tape, acc[role], kRelInvCount[role]);
    return out;
}

/// Order-free pooling: [graph level (mean of role means) | local (center plus
/// its first-order APs) | center], each projected, concatenated per graph.
inline ad::TensorPtr readout(ad::Tape* tape, const SubgraphBatch& batch, const RoleTensors& h,
                             const ad::ParamStore& p) {
    const std::size_t B = batch.n_graphs;
    auto mean_wp = ad::segment_mean(tape, h[0], batch.wp_graph, B);
    auto mean_ap = ad::segment_mean(tape, h[1], batch.ap_graph, B);
    auto mean_wpp = ad::segment_mean(tape, h[2], batch.wpp_graph, B);
    auto graph_lvl =
        ad::scale_rows(tape, ad::add(tape, ad::add(tape, mean_wp, mean_ap), mean_wpp), batch.role_presence_inv);

    auto center_h = ad::gather_rows(tape, h[2], batch.center);
    auto ap_sum = ad::segment_sum(tape, h[1], batch.ap_graph, B);
    auto local = ad::scale_rows(tape, ad::add(tape, center_h, ap_sum), batch.local_inv);

    auto pg = ad::linear(tape, graph_lvl, p.get("g/read/graph/w"), p.get("g/read/graph/b"));
    auto pl = ad::linear(tape, local, p.get("g/read/local/w"), p.get("g/read/local/b"));
    auto pc = ad::linear(tape, center_h, p.get("g/read/center/w"), p.get("g/read/center/b"));
    return ad::concat_cols(tape, {pg, pl, pc});
}

struct GraphForward {
    ad::TensorPtr pred;    // [B, 2], normalized coordinates
    ad::TensorPtr logits;  // [B, n_domains] or null
};

namespace gcn_detail {

inline RoleTensors encode_roles(ad::Tape* tape, const SubgraphBatch& batch, const ad::ParamStore& p) {
    RoleTensors h;
    auto wp_feat = ad::make_const({batch.n_wp, 2}, batch.wp_feat);
    h[0] = ad::linear(tape, wp_feat, p.get("g/enc_wp/w"), p.get("g/enc_wp/b"));
    h[1] = ad::gather_rows(tape, p.get("g/ap_emb"), batch.ap_bssid);
    auto ones = ad::make_const({batch.n_wpp, 2}, std::vector<double>(batch.n_wpp * 2, 1.0));
    h[2] = ad::linear(tape, ones, p.get("g/enc_wpp/w"), p.get("g/enc_wpp/b"));
    return h;
}

inline void init_gcn_block(ad::ParamStore& p, const std::string& prefix, std::size_t d_in, std::size_t d_out,
                           Rng& rng) {
    for (int r = 0; r < kNumRel; ++r) {
        p.glorot(prefix + "/" + kRelName[r] + "/w", d_in, d_out, rng);
        p.zeros(prefix + "/" + kRelName[r] + "/b", d_out);
    }
}

inline void init_gat_block(ad::ParamStore& p, const std::string& prefix, std::size_t d, Rng& rng) {
    for (int r = 0; r < kNumRel; ++r)
        for (int head = 0; head < kGatHeads; ++head) {
            const std::string hp = prefix + "/" + kRelName[r] + "/h" + std::to_string(head);
            p.glorot(hp + "/w", d, d, rng);
            p.glorot(hp + "/a_src", d, 1, rng);
            p.glorot(hp + "/a_dst", d, 1, rng);
        }
}

inline void init_encoders(ad::ParamStore& p, int n_bssid, Rng& rng) {
    p.uniform("g/ap_emb", {static_cast<std::size_t>(n_bssid) + 1, kEmbedDim}, -0.1, 0.1, rng);
    p.glorot("g/enc_wp/w", 2, kEmbedDim, rng);
    p.zeros("g/enc_wp/b", kEmbedDim);
    p.glorot("g/enc_wpp/w", 2, kEmbedDim, rng);
    p.zeros("g/enc_wpp/b", kEmbedDim);
}

}  // namespace gcn_detail

/// Attention graph model; with n_domains > 0 it carries the discriminator
/// head and becomes the adversarial variant.
class WiagcnModel {
public:
    static constexpr const char* kKindPlain = "wiagcn";
    static constexpr const char* kKindAdversarial = "widagcn";

    WiagcnModel(int n_bssid, int n_domains, const CoordScaler& scaler, std::uint64_t seed)
        : scaler_(scaler), n_domains_(n_domains) {
        Rng rng(mix_seed(seed, fnv1a64("wiagcn")));
        gcn_detail::init_encoders(params_, n_bssid, rng);
        gcn_detail::init_gcn_block(params_, "g/conv1", kEmbedDim, kGcnHidden, rng);
        gcn_detail::init_gcn_block(params_, "g/conv2", kGcnHidden, kGcnHidden, rng);
        gcn_detail::init_gat_block(params_, "g/gat", kGcnHidden, rng);
        for (const char* lvl : {"graph", "local", "center"}) {
            params_.glorot(std::string("g/read/") + lvl + "/w", kGcnHidden, kGcnHidden, rng);
            params_.zeros(std::string("g/read/") + lvl + "/b", kGcnHidden);
        }
        params_.glorot("r/l1/w", 3 * kGcnHidden, kGcnHidden, rng);
        params_.zeros("r/l1/b", kGcnHidden);
        params_.glorot("r/l2/w", kGcnHidden, 2, rng);
        params_.zeros("r/l2/b", 2);
        if (n_domains_ > 0) {
            Rng drng(mix_seed(seed, fnv1a64("discriminator")));
            params_.glorot("d/l1/w", 3 * kGcnHidden, kGcnHidden, drng);
            params_.zeros("d/l1/b", kGcnHidden);
            params_.glorot("d/l2/w", kGcnHidden, 16, drng);
            params_.zeros("d/l2/b", 16);
            params_.glorot("d/l3/w", 16, static_cast<std::size_t>(n_domains_), drng);
            params_.zeros("d/l3/b", static_cast<std::size_t>(n_domains_));
        }
        scaler.register_meta(params_);
    }

    /// Shared extractor G, regression head R, and (when requested and present)
    /// the domain head D behind the gradient reversal.
    GraphForward forward(ad::Tape* tape, const SubgraphBatch& batch, double alpha = 0.0,
                         bool want_domain = false) const {
        auto h = gcn_detail::encode_roles(tape, batch, params_);
        h = hetero_gcn_layer(tape, batch, h, params_, "g/conv1");
        h = hetero_gcn_layer(tape, batch, h, params_, "g/conv2");
        h = hetero_gat_layer(tape, batch, h, params_, "g/gat");
        for (auto& t : h) t = ad::relu(tape, t);
        auto feat = readout(tape, batch, h, params_);

        GraphForward out;
        auto r1 = ad::relu(tape, ad::linear(tape, feat, params_.get("r/l1/w"), params_.get("r/l1/b")));
        out.pred = ad::linear(tape, r1, params_.get("r/l2/w"), params_.get("r/l2/b"));
        if (want_domain) {
            detail::require(n_domains_ > 0, "WiagcnModel: no discriminator head");
            auto rev = ad::grl(tape, feat, alpha);
            auto d1 = ad::relu(tape, ad::linear(tape, rev, params_.get("d/l1/w"), params_.get("d/l1/b")));
            auto d2 = ad::relu(tape, ad::linear(tape, d1, params_.get("d/l2/w"), params_.get("d/l2/b")));
            out.logits = ad::linear(tape, d2, params_.get("d/l3/w"), params_.get("d/l3/b"));
        }
        return out;
    }

    ad::ParamStore& params() { return params_; }
    const ad::ParamStore& params() const { return params_; }
    const CoordScaler& scaler() const { return scaler_; }
    int n_domains() const { return n_domains_; }
    const char* kind() const { return n_domains_ > 0 ? kKindAdversarial : kKindPlain; }

private:
    ad::ParamStore params_;
    CoordScaler scaler_;
    int n_domains_;
};

/// Plain graph-convolution baseline: no attention layer, no multilevel
/// readout; the center embedding alone feeds a hidden layer (part of the
/// extractor) and one final linear regression head.
class GcnModel {
public:
    static constexpr const char* kKind = "gcn";

    GcnModel(int n_bssid, const CoordScaler& scaler, std::uint64_t seed) : scaler_(scaler) {
        Rng rng(mix_seed(seed, fnv1a64(kKind)));
        gcn_detail::init_encoders(params_, n_bssid, rng);
        gcn_detail::init_gcn_block(params_, "g/conv1", kEmbedDim, kGcnHidden, rng);
        gcn_detail::init_gcn_block(params_, "g/conv2", kGcnHidden, kGcnHidden, rng);
        params_.glorot("g/head/w", kGcnHidden, kGcnHidden, rng);
        params_.zeros("g/head/b", kGcnHidden);
        params_.glorot("r/out/w", kGcnHidden, 2, rng);
        params_.zeros("r/out/b", 2);
        scaler.register_meta(params_);
    }

    ad::TensorPtr forward(ad::Tape* tape, const SubgraphBatch& batch) const {
        auto h = gcn_detail::encode_roles(tape, batch, params_);
        h = hetero_gcn_layer(tape, batch, h, params_, "g/conv1");
        h = hetero_gcn_layer(tape, batch, h, params_, "g/conv2");
        auto center_h = ad::gather_rows(tape, h[2], batch.center);
        auto g = ad::relu(tape, ad::linear(tape, center_h, params_.get("g/head/w"), params_.get("g/head/b")));
        return ad::linear(tape, g, params_.get("r/out/w"), params_.get("r/out/b"));
    }

    ad::ParamStore& params() { return params_; }
    const ad::ParamStore& params() const { return params_; }
    const CoordScaler& scaler() const { return scaler_; }

private:
    ad::ParamStore params_;
    CoordScaler scaler_;
};

}  // namespace wiloc::models

#endif  // WILOC_MODELS_GCN_MODELS_HPP
