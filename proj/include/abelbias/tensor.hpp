#pragma once

// Dense generator tensors over Z/N (row-major, last axis fastest). These are
// the compiled form every hot loop runs on: a torus-valued tensor with entries
// a_j / b_j becomes integer residues over the common denominator N.

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "arith.hpp"

namespace abelbias::tensor {

using Dims = std::vector<std::size_t>;

inline std::size_t volume(const Dims& dims) {
    std::size_t v = 1;
    for (auto d : dims) v *= d;
    return v;
}

inline std::vector<std::size_t> unflatten(std::size_t index, const Dims& dims) {
    std::vector<std::size_t> m(dims.size());
    for (std::size_t a = dims.size(); a-- > 0;) {
        m[a] = index % dims[a];
        index /= dims[a];
    }
    return m;
}

inline std::size_t flatten(const std::vector<std::size_t>& multi, const Dims& dims) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < dims.size(); ++a) idx = idx * dims[a] + multi[a];
    return idx;
}

/// Calls fn(multi_index) for every index in lexicographic order.
template <class Fn>
void for_each_index(const Dims& dims, Fn&& fn) {
    if (volume(dims) == 0) return;
    std::vector<std::size_t> m(dims.size(), 0);
    for (;;) {
        fn(static_cast<const std::vector<std::size_t>&>(m));
        std::size_t a = dims.size();
        while (a > 0) {
            --a;
            if (++m[a] < dims[a]) break;
            m[a] = 0;
            if (a == 0) return;
        }
        if (dims.empty()) return;
    }
}

struct Residues {
    std::int64_t modulus = 1;
    Dims dims;
    std::vector<std::int64_t> data;

    bool is_zero() const {
        for (auto v : data)
            if (v) return false;
        return true;
    }
};

/// out[r] = sum_j coords[j] * data[j * rest + r] mod n, for the leading axis of length d0.
/// coords must already be reduced mod n.
inline void contract_front(const std::int64_t* data, std::size_t d0, std::size_t rest,
                           const std::int64_t* coords, std::int64_t n, std::int64_t* out) {
    for (std::size_t r = 0; r < rest; ++r) out[r] = 0;
    if (n <= (std::int64_t{1} << 31)) {
        for (std::size_t j = 0; j < d0; ++j) {
            const std::int64_t c = coords[j];
            if (c == 0) continue;
            const std::int64_t* row = data + j * rest;
            for (std::size_t r = 0; r < rest; ++r) out[r] = (out[r] + c * row[r]) % n;
        }
    } else {
        for (std::size_t j = 0; j < d0; ++j) {
            const std::int64_t c = coords[j];
            if (c == 0) continue;
            const std::int64_t* row = data + j * rest;
            for (std::size_t r = 0; r < rest; ++r) out[r] = addmod(out[r], mulmod(c, row[r], n), n);
        }
    }
}

/// Moves axes so that new axis a is old axis order[a].
inline Residues permute(const Residues& t, const std::vector<std::size_t>& order) {
    Residues out;
    out.modulus = t.modulus;
    for (auto a : order) out.dims.push_back(t.dims[a]);
    out.data.resize(t.data.size());
    for_each_index(out.dims, [&](const std::vector<std::size_t>& m) {
        std::vector<std::size_t> old(t.dims.size());
        for (std::size_t a = 0; a < order.size(); ++a) old[order[a]] = m[a];
        out.data[flatten(m, out.dims)] = t.data[flatten(old, t.dims)];
    });
    return out;
}

/// Linear change along one axis: out[.., i, ..] = sum_j rows[i][j] * t[.., j, ..].
inline Residues transform(const Residues& t, std::size_t axis,
                          const std::vector<std::vector<std::int64_t>>& rows) {
    Residues out;
    out.modulus = t.modulus;
    out.dims = t.dims;
    out.dims[axis] = rows.size();
    out.data.assign(volume(out.dims), 0);
    const std::int64_t n = t.modulus;
    for_each_index(out.dims, [&](const std::vector<std::size_t>& m) {
        std::vector<std::size_t> src = m;
        std::int64_t acc = 0;
        for (std::size_t j = 0; j < t.dims[axis]; ++j) {
            const std::int64_t c = mod(rows[m[axis]][j], n);
            if (!c) continue;
            src[axis] = j;
            acc = addmod(acc, mulmod(c, t.data[flatten(src, t.dims)], n), n);
        }
        out.data[flatten(m, out.dims)] = acc;
    });
    return out;
}

/// Contracts (removes) one axis against a coordinate vector.
inline Residues contract(const Residues& t, std::size_t axis, std::span<const std::int64_t> coords) {
    std::vector<std::size_t> order{axis};
    for (std::size_t a = 0; a < t.dims.size(); ++a)
        if (a != axis) order.push_back(a);
    Residues p = axis == 0 ? t : permute(t, order);
    Residues out;
    out.modulus = t.modulus;
    out.dims.assign(p.dims.begin() + 1, p.dims.end());
    out.data.assign(volume(out.dims), 0);
    std::vector<std::int64_t> c(coords.size());
    for (std::size_t j = 0; j < coords.size(); ++j) c[j] = mod(coords[j], t.modulus);
    contract_front(p.data.data(), p.dims.empty() ? 0 : p.dims[0], out.data.size(), c.data(), t.modulus,
                   out.data.data());
    return out;
}

}  // namespace abelbias::tensor
