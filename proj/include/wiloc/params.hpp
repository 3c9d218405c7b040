#ifndef WILOC_PARAMS_HPP
#define WILOC_PARAMS_HPP

#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "wiloc/rng.hpp"
#include "wiloc/tensor.hpp"

namespace wiloc::ad {

/// Ordered registry of named parameter tensors. Prefixes partition the
/// model into optimizer groups ("g/", "r/", "d/", non-trainable "meta/").
class ParamStore {
public:
    TensorPtr add(const std::string& path, TensorPtr t) {
        detail::require(!index_.count(path), "ParamStore: duplicate path " + path);
        index_[path] = items_.size();
        items_.push_back({path, std::move(t)});
        return items_.back().second;
    }

    TensorPtr glorot(const std::string& path, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::vector<double> v(fan_in * fan_out);
        for (double& x : v) x = rng.uniform(-a, a);
        return add(path, make_param({fan_in, fan_out}, std::move(v)));
    }

    TensorPtr zeros(const std::string& path, std::size_t n) {
        return add(path, make_param({n}, std::vector<double>(n, 0.0)));
    }

    TensorPtr uniform(const std::string& path, std::vector<std::size_t> shape, double lo, double hi, Rng& rng) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        std::vector<double> v(n);
        for (double& x : v) x = rng.uniform(lo, hi);
        return add(path, make_param(std::move(shape), std::move(v)));
    }

    TensorPtr meta(const std::string& path, std::vector<std::size_t> shape, std::vector<double> v) {
        return add(path, make_const(std::move(shape), std::move(v)));
    }

    TensorPtr get(const std::string& path) const {
        auto it = index_.find(path);
        detail::require(it != index_.end(), "ParamStore: unknown path " + path);
        return items_[it->second].second;
    }

    bool has(const std::string& path) const { return index_.count(path) != 0; }

    /// Trainable tensors whose path starts with the prefix, in registration order.
    std::vector<TensorPtr> group(const std::string& prefix) const {
        std::vector<TensorPtr> out;
        for (const auto& [path, t] : items_)
            if (t->requires_grad && path.rfind(prefix, 0) == 0) out.push_back(t);
        return out;
    }

    std::vector<TensorPtr> trainable() const {
        std::vector<TensorPtr> out;
        for (const auto& [path, t] : items_)
            if (t->requires_grad) out.push_back(t);
        return out;
    }

    const std::vector<std::pair<std::string, TensorPtr>>& items() const { return items_; }

private:
    std::vector<std::pair<std::string, TensorPtr>> items_;
    std::map<std::string, std::size_t> index_;
};

/// In-memory snapshot of a parameter tree plus the model kind tag.
struct Checkpoint {
    std::string model_kind;
    std::vector<std::string> paths;
    std::vector<std::vector<std::size_t>> shapes;
    std::vector<std::vector<double>> values;

    static Checkpoint capture(const std::string& kind, const ParamStore& store) {
        Checkpoint ck;
        ck.model_kind = kind;
        for (const auto& [path, t] : store.items()) {
            ck.paths.push_back(path);
            ck.shapes.push_back(t->shape);
            ck.values.push_back(t->value);
        }
        return ck;
    }

    /// Restores values into an existing store; paths present in the store but
    /// absent from the checkpoint are left untouched (lets a discriminator
    /// head start fresh on top of a pretrained extractor).
    void restore(ParamStore& store, bool require_all = false) const {
        for (std::size_t i = 0; i < paths.size(); ++i) {
            if (!store.has(paths[i])) {
                if (require_all) throw Error("Checkpoint: store lacks " + paths[i]);
                continue;
            }
            TensorPtr t = store.get(paths[i]);
            detail::require(t->shape == shapes[i], "Checkpoint: shape mismatch at " + paths[i]);
            t->value = values[i];
        }
    }
};

// Binary checkpoint file: magic, version, model kind, then a flat list of
// (path, shape, raw little-endian doubles).
namespace ckpt_io {

constexpr char kMagic[8] = {'W', 'L', 'C', 'K', 'P', 'T', '0', '1'};

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    detail::require(static_cast<bool>(is), "checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void put_str(std::ostream& os, const std::string& s) {
    put_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_str(std::istream& is) {
    std::uint64_t n = get_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    detail::require(static_cast<bool>(is), "checkpoint: truncated string");
    return s;
}

}  // namespace ckpt_io

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    detail::require(static_cast<bool>(os), "cannot open checkpoint for writing: " + path);
    os.write(ckpt_io::kMagic, 8);
    ckpt_io::put_str(os, ck.model_kind);
    ckpt_io::put_u64(os, ck.paths.size());
    for (std::size_t i = 0; i < ck.paths.size(); ++i) {
        ckpt_io::put_str(os, ck.paths[i]);
        ckpt_io::put_u64(os, ck.shapes[i].size());
        for (std::size_t d : ck.shapes[i]) ckpt_io::put_u64(os, d);
        ckpt_io::put_u64(os, ck.values[i].size());
        for (double v : ck.values[i]) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            ckpt_io::put_u64(os, bits);
        }
    }
    detail::require(static_cast<bool>(os), "checkpoint write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    detail::require(static_cast<bool>(is), "cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, 8);
    detail::require(static_cast<bool>(is) && std::memcmp(magic, ckpt_io::kMagic, 8) == 0,
                    "not a checkpoint file: " + path);
    Checkpoint ck;
    ck.model_kind = ckpt_io::get_str(is);
    std::uint64_t n = ckpt_io::get_u64(is);
    for (std::uint64_t i = 0; i < n; ++i) {
        ck.paths.push_back(ckpt_io::get_str(is));
        std::uint64_t nd = ckpt_io::get_u64(is);
        std::vector<std::size_t> shape(nd);
        for (auto& d : shape) d = ckpt_io::get_u64(is);
        ck.shapes.push_back(std::move(shape));
        std::uint64_t nv = ckpt_io::get_u64(is);
        std::vector<double> vals(nv);
        for (auto& v : vals) {
            std::uint64_t bits = ckpt_io::get_u64(is);
            std::memcpy(&v, &bits, 8);
        }
        ck.values.push_back(std::move(vals));
    }
    return ck;
}

}  // namespace wiloc::ad

#endif  // WILOC_PARAMS_HPP
