#ifndef WILOC_MODELS_SET_MODELS_HPP
#define WILOC_MODELS_SET_MODELS_HPP

#include <string>

#include "wiloc/models/common.hpp"
#include "wiloc/rng.hpp"

// The set-function pair: a permutation-invariant model that pools per-reading
// features by summation before regression, and its order-sensitive control
// with the same encoders but fixed concatenation slots.

namespace wiloc::models {

constexpr int kEmbedDim = 10;
constexpr int kSetSlots = 50;

namespace set_detail {

/// Shared encoders: bssid embedding + linear RSSI encoder, concatenated to a
/// 20-dim per-reading feature matrix.
inline ad::TensorPtr encode_readings(ad::Tape* tape, const RecordBatch& batch, const ad::ParamStore& p) {
    auto emb = ad::gather_rows(tape, p.get("g/ap_emb"), batch.bssid);
    auto rssi = ad::make_const({batch.rssi.size(), 1}, batch.rssi);
    auto rss_feat = ad::linear(tape, rssi, p.get("g/rssi/w"), p.get("g/rssi/b"));
    return ad::concat_cols(tape, emb, rss_feat);
}

}  // namespace set_detail

class DeepSetsModel {
public:
    static constexpr const char* kKind = "deep_sets";

    DeepSetsModel(int n_bssid, const CoordScaler& scaler, std::uint64_t seed) : scaler_(scaler) {
        Rng rng(mix_seed(seed, fnv1a64(kKind)));
        params_.uniform("g/ap_emb", {static_cast<std::size_t>(n_bssid) + 1, kEmbedDim}, -0.1, 0.1, rng);
        params_.glorot("g/rssi/w", 1, kEmbedDim, rng);
        params_.zeros("g/rssi/b", kEmbedDim);
        params_.glorot("g/phi1/w", 2 * kEmbedDim, 64, rng);
        params_.zeros("g/phi1/b", 64);
        params_.glorot("g/phi2/w", 64, 64, rng);
        params_.zeros("g/phi2/b", 64);
        params_.glorot("r/rho1/w", 64, 64, rng);
        params_.zeros("r/rho1/b", 64);
        params_.glorot("r/rho2/w", 64, 2, rng);
        params_.zeros("r/rho2/b", 2);
        scaler.register_meta(params_);
    }

    /// rho(sum_x phi(x)) per record; output is normalized coordinates [B,2].
    ad::TensorPtr forward(ad::Tape* tape, const RecordBatch& batch) const {
        auto x = set_detail::encode_readings(tape, batch, params_);
        auto h = ad::relu(tape, ad::linear(tape, x, params_.get("g/phi1/w"), params_.get("g/phi1/b")));
        h = ad::relu(tape, ad::linear(tape, h, params_.get("g/phi2/w"), params_.get("g/phi2/b")));
        auto pooled = ad::segment_sum(tape, h, batch.seg, batch.n_records);
        auto r = ad::relu(tape, ad::linear(tape, pooled, params_.get("r/rho1/w"), params_.get("r/rho1/b")));
        return ad::linear(tape, r, params_.get("r/rho2/w"), params_.get("r/rho2/b"));
    }

    ad::ParamStore& params() { return params_; }
    const ad::ParamStore& params() const { return params_; }
    const CoordScaler& scaler() const { return scaler_; }

private:
    ad::ParamStore params_;
    CoordScaler scaler_;
};

/// Control model: identical encoder stack, but the per-reading features are
/// laid out in input order across 50 zero-padded slots and never summed, so
/// the output depends on reading order.
class DeepNnModel {
public:
    static constexpr const char* kKind = "deep_nn";

    DeepNnModel(int n_bssid, const CoordScaler& scaler, std::uint64_t seed) : scaler_(scaler) {
        Rng rng(mix_seed(seed, fnv1a64(kKind)));
        params_.uniform("g/ap_emb", {static_cast<std::size_t>(n_bssid) + 1, kEmbedDim}, -0.1, 0.1, rng);
        params_.glorot("g/rssi/w", 1, kEmbedDim, rng);
        params_.zeros("g/rssi/b", kEmbedDim);
        params_.glorot("g/phi1/w", kSetSlots * 2 * kEmbedDim, 64, rng);
        params_.zeros("g/phi1/b", 64);
        params_.glorot("g/phi2/w", 64, 64, rng);
        params_.zeros("g/phi2/b", 64);
        params_.glorot("r/rho1/w", 64, 64, rng);
        params_.zeros("r/rho1/b", 64);
        params_.glorot("r/rho2/w", 64, 2, rng);
        params_.zeros("r/rho2/b", 2);
        scaler.register_meta(params_);
    }

    ad::TensorPtr forward(ad::Tape* tape, const RecordBatch& batch) const {
        for (std::int64_t s : batch.slot)
            detail::require(s < kSetSlots, "DeepNnModel: record exceeds the fixed slot count");
        auto x = set_detail::encode_readings(tape, batch, params_);
        auto flat = ad::scatter_slots(tape, x, batch.seg, batch.slot, batch.n_records, kSetSlots);
        auto h = ad::relu(tape, ad::linear(tape, flat, params_.get("g/phi1/w"), params_.get("g/phi1/b")));
        h = ad::relu(tape, ad::linear(tape, h, params_.get("g/phi2/w"), params_.get("g/phi2/b")));
        auto r = ad::relu(tape, ad::linear(tape, h, params_.get("r/rho1/w"), params_.get("r/rho1/b")));
        return ad::linear(tape, r, params_.get("r/rho2/w"), params_.get("r/rho2/b"));
    }

    ad::ParamStore& params() { return params_; }
    const ad::ParamStore& params() const { return params_; }
    const CoordScaler& scaler() const { return scaler_; }

private:
    ad::ParamStore params_;
    CoordScaler scaler_;
};

}  // namespace wiloc::models

#endif  // WILOC_MODELS_SET_MODELS_HPP
