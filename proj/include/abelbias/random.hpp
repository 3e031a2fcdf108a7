#pragma once

// Seeded random instances for property batteries. Sampling uses mt19937_64 with explicit
// rejection, so streams are identical across standard libraries.

#include <cstdint>
#include <random>
#include <vector>

#include "group.hpp"
#include "maps.hpp"

namespace abelbias {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0, n), n >= 1.
    std::int64_t below(std::int64_t n) {
        if (n <= 1) return 0;
        const auto un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        for (;;) {
            const std::uint64_t r = eng_();
            if (r < limit) return static_cast<std::int64_t>(r % un);
        }
    }

    bool coin() { return below(2) == 1; }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        return v.at(static_cast<std::size_t>(below(static_cast<std::int64_t>(v.size()))));
    }

private:
    std::mt19937_64 eng_;
};

/// A group drawn uniformly from the canonical groups of order 2..max_order.
inline FinAbGroup random_group(Rng& rng, std::int64_t max_order) {
    auto all = all_groups_up_to(max_order);
    std::erase_if(all, [](const FinAbGroup& g) { return g.order() == 1; });
    if (all.empty()) return cyclic_group(1);
    return rng.pick(all);
}

/// A p-group of order between p and max_order, uniform over the canonical list.
inline FinAbGroup random_p_group(Rng& rng, std::int64_t p, std::int64_t max_order) {
    auto all = all_groups_up_to(max_order);
    std::erase_if(all, [&](const FinAbGroup& g) { return g.order() == 1 || !g.is_p_group(p); });
    if (all.empty()) throw InputError("random_p_group: no " + std::to_string(p) + "-group of order <= " +
                                      std::to_string(max_order));
    return rng.pick(all);
}

/// Entries uniform over the admissible values a/g, g the gcd of the generator orders.
inline MultiMapT random_map(Rng& rng, const std::vector<FinAbGroup>& domains) {
    const auto dims = detail::dims_of(domains);
    std::vector<TorusValue> t(tensor::volume(dims));
    tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
        const std::int64_t g = detail::entry_annihilator(domains, m);
        t[tensor::flatten(m, dims)] = TorusValue(rng.below(g), g);
    });
    return MultiMapT(domains, std::move(t));
}

/// Coordinate c of each entry is a uniform multiple of f_c / gcd(f_c, g).
inline MultiMapG random_map(Rng& rng, const std::vector<FinAbGroup>& domains, const FinAbGroup& codomain) {
    const auto dims = detail::dims_of(domains);
    std::vector<GroupElement> t(tensor::volume(dims));
    tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
        const std::int64_t g = detail::entry_annihilator(domains, m);
        GroupElement y = zero_element(codomain);
        for (std::size_t c = 0; c < codomain.rank(); ++c) {
            const std::int64_t f = codomain.factor(c);
            const std::int64_t h = std::gcd(f, g);
            y.coords[c] = rng.below(h) * (f / h);
        }
        t[tensor::flatten(m, dims)] = std::move(y);
    });
    return MultiMapG(domains, codomain, std::move(t));
}

/// Random multiaffine map of degree <= d: each nonempty axis set of size <= d gets a
/// random term with probability 1/2.
inline MultiAffine random_multiaffine(Rng& rng, const std::vector<FinAbGroup>& domains, std::size_t d) {
    const std::size_t k = domains.size();
    std::vector<MultiAffine::Term> terms;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
        Axes axes;
        for (std::size_t i = 0; i < k; ++i)
            if (mask >> i & 1) axes.push_back(i);
        if (axes.size() > d || !rng.coin()) continue;
        std::vector<FinAbGroup> sub;
        for (auto a : axes) sub.push_back(domains[a]);
        terms.push_back({axes, random_map(rng, sub)});
    }
    return MultiAffine(domains, std::move(terms));
}

/// A random map into `codomain` that vanishes whenever x_i is p-torsion for i in `axes`:
/// sampled on A_i / A_i[p] and pulled back along the projection.
inline MultiMapG random_torsion_free_map(Rng& rng, const std::vector<FinAbGroup>& domains,
                                         const FinAbGroup& codomain, std::int64_t p, const Axes& axes) {
    std::vector<FinAbGroup> small = domains;
    std::vector<GroupHom> homs;
    for (std::size_t i = 0; i < domains.size(); ++i) homs.push_back(identity_hom(domains[i]));
    for (auto i : axes) {
        const Quotient qt = quotient(domains[i], p_torsion(domains[i], p).inclusion.images);
        small[i] = qt.group;
        homs[i] = qt.projection;
    }
    for (const auto& g : small)
        if (g.rank() == 0) return MultiMapG::zero(domains, codomain);
    return pullback(random_map(rng, small, codomain), homs);
}

}  // namespace abelbias
