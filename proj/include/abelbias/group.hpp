#pragma once

// Finite abelian groups in prime-power canonical form, their elements and
// homomorphisms, and the structural constructions the reductions rely on:
// primary components, pA, A[p], cyclic subgroups, quotients and duals.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "smith.hpp"
#include "torus.hpp"

namespace abelbias {

namespace detail {

/// Canonical sort key of a prime-power cyclic order: (prime, exponent).
inline std::pair<std::int64_t, std::int64_t> factor_key(std::int64_t q) {
    return {smallest_prime_divisor(q), q};
}

inline bool factor_less(std::int64_t a, std::int64_t b) { return factor_key(a) < factor_key(b); }

}  // namespace detail

/// A finite abelian group (+)_j Z/factors[j], every factor a prime power >= 2, sorted by
/// prime and then by ascending exponent. The trivial group has no factors.
class FinAbGroup {
public:
    FinAbGroup() = default;

    /// Takes an already-canonical factor list; throws InputError otherwise.
    static FinAbGroup from_canonical(std::vector<std::int64_t> factors) {
        for (std::size_t j = 0; j < factors.size(); ++j) {
            if (factors[j] > kMaxFactorOrder)
                throw InputError("cyclic factor order too large: " + std::to_string(factors[j]));
            if (!as_prime_power(factors[j]))
                throw InputError("cyclic factor is not a prime power: " +
                                 std::to_string(factors[j]));
            if (j > 0 && detail::factor_less(factors[j], factors[j - 1]))
                throw InputError("factor list is not in canonical order");
        }
        FinAbGroup g;
        g.factors_ = std::move(factors);
        for (auto f : g.factors_) {
            g.order_ = checked_mul(g.order_, f);
            g.exponent_ = checked_lcm(g.exponent_, f);
        }
        return g;
    }

    const std::vector<std::int64_t>& factors() const noexcept { return factors_; }
    std::int64_t factor(std::size_t j) const { return factors_.at(j); }
    /// Number of cyclic factors (generators).
    std::size_t rank() const noexcept { return factors_.size(); }
    std::int64_t order() const noexcept { return order_; }
    std::int64_t exponent() const noexcept { return exponent_; }
    bool is_trivial() const noexcept { return factors_.empty(); }

    /// Primes dividing the order, ascending.
    std::vector<std::int64_t> primes() const {
        std::vector<std::int64_t> ps;
        for (auto f : factors_) {
            auto p = smallest_prime_divisor(f);
            if (ps.empty() || ps.back() != p) ps.push_back(p);
        }
        return ps;
    }

    bool is_p_group(std::int64_t p) const {
        return std::all_of(factors_.begin(), factors_.end(),
                           [p](std::int64_t f) { return f % p == 0 && prime_part(f, p) == f; });
    }

    std::string str() const {
        if (factors_.empty()) return "0";
        std::string s;
        for (std::size_t j = 0; j < factors_.size(); ++j) {
            if (j) s += " + ";
            s += "Z/" + std::to_string(factors_[j]);
        }
        return s;
    }

    friend bool operator==(const FinAbGroup& a, const FinAbGroup& b) {
        return a.factors_ == b.factors_;
    }

private:
    std::vector<std::int64_t> factors_;
    std::int64_t order_ = 1;
    std::int64_t exponent_ = 1;
};

/// Normalizes arbitrary cyclic orders into canonical form: each order is split into its
/// prime-power parts, order-1 parts are dropped, and the result is sorted.
inline FinAbGroup make_group(std::span<const std::int64_t> orders) {
    std::vector<std::int64_t> f;
    for (auto n : orders) {
        if (n < 1) throw InputError("cyclic order must be positive, got " + std::to_string(n));
        for (const auto& pp : factorize(n)) f.push_back(pp.value);
    }
    std::stable_sort(f.begin(), f.end(), detail::factor_less);
    return FinAbGroup::from_canonical(std::move(f));
}

inline FinAbGroup make_group(std::initializer_list<std::int64_t> orders) {
    return make_group(std::span<const std::int64_t>(orders.begin(), orders.size()));
}

inline FinAbGroup cyclic_group(std::int64_t n) { return make_group({n}); }

struct GroupElement {
    std::vector<std::int64_t> coords;

    friend bool operator==(const GroupElement&, const GroupElement&) = default;
    friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

inline std::string to_string(const GroupElement& x) {
    std::string s = "(";
    for (std::size_t j = 0; j < x.coords.size(); ++j) {
        if (j) s += ",";
        s += std::to_string(x.coords[j]);
    }
    return s + ")";
}

inline GroupElement zero_element(const FinAbGroup& a) { return {std::vector<std::int64_t>(a.rank(), 0)}; }

inline GroupElement generator(const FinAbGroup& a, std::size_t j) {
    GroupElement e = zero_element(a);
    e.coords.at(j) = 1;
    return e;
}

/// Reduces arbitrary integer coordinates modulo the factors.
inline GroupElement reduce(const FinAbGroup& a, std::vector<std::int64_t> coords) {
    if (coords.size() != a.rank()) throw InputError("element has wrong number of coordinates");
    for (std::size_t j = 0; j < coords.size(); ++j) coords[j] = mod(coords[j], a.factor(j));
    return {std::move(coords)};
}

inline void check_element(const FinAbGroup& a, const GroupElement& x) {
    if (x.coords.size() != a.rank())
        throw InputError("element " + to_string(x) + " does not belong to " + a.str());
    for (std::size_t j = 0; j < x.coords.size(); ++j)
        if (x.coords[j] < 0 || x.coords[j] >= a.factor(j))
            throw InputError("element " + to_string(x) + " is not reduced in " + a.str());
}

inline bool is_zero(const GroupElement& x) {
    return std::all_of(x.coords.begin(), x.coords.end(), [](std::int64_t c) { return c == 0; });
}

inline GroupElement add(const FinAbGroup& a, const GroupElement& x, const GroupElement& y) {
    GroupElement r = x;
    for (std::size_t j = 0; j < r.coords.size(); ++j)
        r.coords[j] = addmod(r.coords[j], y.coords[j], a.factor(j));
    return r;
}

inline GroupElement negate(const FinAbGroup& a, const GroupElement& x) {
    GroupElement r = x;
    for (std::size_t j = 0; j < r.coords.size(); ++j)
        r.coords[j] = r.coords[j] == 0 ? 0 : a.factor(j) - r.coords[j];
    return r;
}

inline GroupElement scale(const FinAbGroup& a, const GroupElement& x, std::int64_t n) {
    GroupElement r = x;
    for (std::size_t j = 0; j < r.coords.size(); ++j)
        r.coords[j] = mulmod(r.coords[j], mod(n, a.factor(j)), a.factor(j));
    return r;
}

inline std::int64_t element_order(const FinAbGroup& a, const GroupElement& x) {
    std::int64_t ord = 1;
    for (std::size_t j = 0; j < x.coords.size(); ++j) {
        const auto f = a.factor(j);
        ord = checked_lcm(ord, f / std::gcd(f, x.coords[j]));
    }
    return ord;
}

/// Element with the given position in lexicographic order (last coordinate fastest).
inline GroupElement element_at(const FinAbGroup& a, std::int64_t index) {
    GroupElement x = zero_element(a);
    for (std::size_t j = a.rank(); j-- > 0;) {
        x.coords[j] = index % a.factor(j);
        index /= a.factor(j);
    }
    return x;
}

inline std::int64_t index_of(const FinAbGroup& a, const GroupElement& x) {
    std::int64_t idx = 0;
    for (std::size_t j = 0; j < a.rank(); ++j) idx = idx * a.factor(j) + x.coords[j];
    return idx;
}

/// Advances `x` to the next element in lexicographic order; false after the last one.
inline bool next_element(const FinAbGroup& a, GroupElement& x) {
    for (std::size_t j = a.rank(); j-- > 0;) {
        if (++x.coords[j] < a.factor(j)) return true;
        x.coords[j] = 0;
    }
    return false;
}

/// Visits every element exactly once, lexicographically, starting from 0.
template <class Fn>
void for_each_element(const FinAbGroup& a, Fn&& fn) {
    GroupElement x = zero_element(a);
    do {
        fn(static_cast<const GroupElement&>(x));
    } while (next_element(a, x));
}

inline std::vector<GroupElement> enumerate_elements(const FinAbGroup& a) {
    std::vector<GroupElement> out;
    out.reserve(static_cast<std::size_t>(a.order()));
    for_each_element(a, [&](const GroupElement& x) { out.push_back(x); });
    return out;
}

// ---------------------------------------------------------------------------
// Homomorphisms

/// A homomorphism given by the images of the domain generators.
struct GroupHom {
    FinAbGroup domain;
    FinAbGroup codomain;
    std::vector<GroupElement> images;
};

inline GroupHom make_hom(FinAbGroup domain, FinAbGroup codomain, std::vector<GroupElement> images) {
    if (images.size() != domain.rank())
        throw InputError("homomorphism needs one image per domain generator");
    for (std::size_t j = 0; j < images.size(); ++j) {
        check_element(codomain, images[j]);
        if (!is_zero(scale(codomain, images[j], domain.factor(j))))
            throw InputError("image " + to_string(images[j]) + " of generator " +
                             std::to_string(j + 1) + " is not killed by its order " +
                             std::to_string(domain.factor(j)));
    }
    return {std::move(domain), std::move(codomain), std::move(images)};
}

inline GroupElement apply(const GroupHom& h, const GroupElement& x) {
    GroupElement r = zero_element(h.codomain);
    for (std::size_t j = 0; j < x.coords.size(); ++j) {
        if (x.coords[j] == 0) continue;
        for (std::size_t c = 0; c < r.coords.size(); ++c)
            r.coords[c] = addmod(r.coords[c],
                                 mulmod(x.coords[j], h.images[j].coords[c], h.codomain.factor(c)),
                                 h.codomain.factor(c));
    }
    return r;
}

inline GroupHom identity_hom(const FinAbGroup& a) {
    std::vector<GroupElement> imgs;
    for (std::size_t j = 0; j < a.rank(); ++j) imgs.push_back(generator(a, j));
    return {a, a, std::move(imgs)};
}

/// outer ∘ inner.
inline GroupHom compose(const GroupHom& outer, const GroupHom& inner) {
    if (!(inner.codomain == outer.domain)) throw InputError("compose: codomain/domain mismatch");
    std::vector<GroupElement> imgs;
    for (const auto& y : inner.images) imgs.push_back(apply(outer, y));
    return {inner.domain, outer.codomain, std::move(imgs)};
}

// ---------------------------------------------------------------------------
// Subgroups, components, quotients

/// A subgroup handed over as a fresh group plus its inclusion.
struct Subgroup {
    FinAbGroup group;
    GroupHom inclusion;
};

struct PrimaryComponent {
    FinAbGroup group;
    GroupHom embedding;
    GroupHom projection;
};

/// A quotient with its projection and, for each quotient generator, a preimage in A.
struct Quotient {
    FinAbGroup group;
    GroupHom projection;
    std::vector<GroupElement> lifts;
};

namespace detail {

/// Builds the subgroup generated by independent elements of prime-power orders (the
/// caller guarantees the sum is direct), sorting into canonical order.
inline Subgroup direct_sum_subgroup(const FinAbGroup& a,
                                    std::vector<std::pair<std::int64_t, GroupElement>> gens) {
    gens.erase(std::remove_if(gens.begin(), gens.end(), [](const auto& g) { return g.first == 1; }),
               gens.end());
    std::stable_sort(gens.begin(), gens.end(),
                     [](const auto& x, const auto& y) { return factor_less(x.first, y.first); });
    std::vector<std::int64_t> orders;
    std::vector<GroupElement> imgs;
    for (auto& [ord, el] : gens) {
        orders.push_back(ord);
        imgs.push_back(std::move(el));
    }
    FinAbGroup h = FinAbGroup::from_canonical(std::move(orders));
    GroupHom inc = make_hom(h, a, std::move(imgs));
    return {std::move(h), std::move(inc)};
}

}  // namespace detail

/// A^(p) together with the inclusion A^(p) -> A and the projection A -> A^(p).
inline PrimaryComponent primary_component(const FinAbGroup& a, std::int64_t p) {
    if (!is_prime(p)) throw InputError("primary_component: " + std::to_string(p) + " is not prime");
    std::vector<std::int64_t> orders;
    std::vector<std::size_t> where(a.rank(), a.rank());
    for (std::size_t j = 0; j < a.rank(); ++j)
        if (a.factor(j) % p == 0) {
            where[j] = orders.size();
            orders.push_back(a.factor(j));
        }
    FinAbGroup c = FinAbGroup::from_canonical(orders);
    std::vector<GroupElement> emb, proj;
    for (std::size_t j = 0; j < a.rank(); ++j) {
        if (where[j] != a.rank()) emb.push_back(generator(a, j));
        proj.push_back(where[j] == a.rank() ? zero_element(c) : generator(c, where[j]));
    }
    GroupHom e{c, a, std::move(emb)};
    GroupHom pr{a, c, std::move(proj)};
    return {std::move(c), std::move(e), std::move(pr)};
}

/// pA = {p x : x in A}. Factors of order divisible by p contribute p e_j of order f/p;
/// factors prime to p are kept whole.
inline Subgroup times_p_subgroup(const FinAbGroup& a, std::int64_t p) {
    if (!is_prime(p)) throw InputError("times_p_subgroup: " + std::to_string(p) + " is not prime");
    std::vector<std::pair<std::int64_t, GroupElement>> gens;
    for (std::size_t j = 0; j < a.rank(); ++j) {
        const auto f = a.factor(j);
        gens.emplace_back(f % p == 0 ? f / p : f, scale(a, generator(a, j), p));
    }
    return detail::direct_sum_subgroup(a, std::move(gens));
}

/// A[p] = {x in A : p x = 0}, elementary abelian of rank #{j : p | f_j}.
inline Subgroup p_torsion(const FinAbGroup& a, std::int64_t p) {
    if (!is_prime(p)) throw InputError("p_torsion: " + std::to_string(p) + " is not prime");
    std::vector<std::pair<std::int64_t, GroupElement>> gens;
    for (std::size_t j = 0; j < a.rank(); ++j)
        if (a.factor(j) % p == 0) gens.emplace_back(p, scale(a, generator(a, j), a.factor(j) / p));
    return detail::direct_sum_subgroup(a, std::move(gens));
}

/// <x> as a fresh group with its inclusion.
inline Subgroup cyclic_subgroup(const FinAbGroup& a, const GroupElement& x) {
    check_element(a, x);
    const auto n = element_order(a, x);
    std::vector<std::pair<std::int64_t, GroupElement>> gens;
    for (const auto& pp : factorize(n)) gens.emplace_back(pp.value, scale(a, x, n / pp.value));
    return detail::direct_sum_subgroup(a, std::move(gens));
}

/// A / <K> via diagonalization of the relation matrix (factor relations stacked with the
/// generators of K), split into prime-power parts and sorted canonically.
inline Quotient quotient(const FinAbGroup& a, const std::vector<GroupElement>& kernel) {
    const std::size_t n = a.rank();
    IntMatrix rel;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<Integer> row(n, 0);
        row[j] = to_integer(a.factor(j));
        rel.push_back(std::move(row));
    }
    for (const auto& k : kernel) {
        check_element(a, k);
        std::vector<Integer> row;
        for (auto c : k.coords) row.push_back(to_integer(c));
        rel.push_back(std::move(row));
    }
    const Diagonalization dz = diagonalize(std::move(rel), n);

    struct Part {
        std::int64_t order;
        std::size_t column;
        std::int64_t crt;  // lift multiplier: 1 mod order, 0 mod d/order
    };
    std::vector<Part> parts;
    for (std::size_t t = 0; t < n; ++t) {
        const std::int64_t d = to_int64(dz.diagonal[t]);
        if (d <= 1) continue;
        for (const auto& pp : factorize(d)) {
            const std::int64_t rest = d / pp.value;
            // rest * inv(rest mod q) is 1 mod q and 0 mod rest.
            Integer inv;
            const Integer r = to_integer(rest), q = to_integer(pp.value);
            mpz_invert(inv.get_mpz_t(), r.get_mpz_t(), q.get_mpz_t());
            const std::int64_t crt = pp.value == d ? 1 : mulmod(rest, to_int64(inv), d);
            parts.push_back({pp.value, t, crt});
        }
    }
    std::stable_sort(parts.begin(), parts.end(),
                     [](const Part& x, const Part& y) { return detail::factor_less(x.order, y.order); });

    std::vector<std::int64_t> orders;
    for (const auto& p : parts) orders.push_back(p.order);
    FinAbGroup qg = FinAbGroup::from_canonical(std::move(orders));

    std::vector<GroupElement> imgs;
    for (std::size_t j = 0; j < n; ++j) {
        GroupElement y = zero_element(qg);
        for (std::size_t c = 0; c < parts.size(); ++c) {
            Integer v = dz.right[j][parts[c].column];
            mpz_fdiv_r_ui(v.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(parts[c].order));
            y.coords[c] = v.get_si();
        }
        imgs.push_back(std::move(y));
    }
    std::vector<GroupElement> lifts;
    for (const auto& p : parts) {
        std::vector<std::int64_t> coords(n);
        for (std::size_t j = 0; j < n; ++j) {
            Integer v = dz.right_inverse[p.column][j];
            mpz_fdiv_r_ui(v.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(a.factor(j)));
            coords[j] = mulmod(v.get_si(), p.crt, a.factor(j));
        }
        lifts.push_back({std::move(coords)});
    }
    GroupHom proj = make_hom(a, qg, std::move(imgs));
    return {std::move(qg), std::move(proj), std::move(lifts)};
}

/// The subgroup generated by `gens`, listed as a set (exhaustive closure, desk scale).
inline std::vector<GroupElement> span_elements(const FinAbGroup& a, const std::vector<GroupElement>& gens) {
    std::vector<GroupElement> elems{zero_element(a)};
    std::vector<char> seen(static_cast<std::size_t>(a.order()), 0);
    seen[0] = 1;
    for (std::size_t i = 0; i < elems.size(); ++i)
        for (const auto& g : gens) {
            GroupElement s = add(a, elems[i], g);
            auto idx = static_cast<std::size_t>(index_of(a, s));
            if (!seen[idx]) {
                seen[idx] = 1;
                elems.push_back(std::move(s));
            }
        }
    std::sort(elems.begin(), elems.end(),
              [&](const GroupElement& x, const GroupElement& y) { return index_of(a, x) < index_of(a, y); });
    return elems;
}

/// Dual group: characters chi are indexed over the same factor list as B.
inline FinAbGroup dual_group(const FinAbGroup& b) { return b; }

/// <chi, b> = sum_j chi_j b_j / f_j mod 1.
inline TorusValue pair(const FinAbGroup& b, const GroupElement& chi, const GroupElement& x) {
    if (chi.coords.size() != b.rank() || x.coords.size() != b.rank())
        throw InputError("pair: character and element must be indexed over the same factor list");
    TorusValue s;
    for (std::size_t j = 0; j < b.rank(); ++j)
        s += TorusValue(to_integer(chi.coords[j]) * to_integer(x.coords[j]), to_integer(b.factor(j)));
    return s;
}

/// Every abelian group of order <= max_order up to isomorphism, ordered by order and then
/// by factor list. Includes the trivial group.
inline std::vector<FinAbGroup> all_groups_up_to(std::int64_t max_order) {
    std::vector<FinAbGroup> out;
    // partitions of e in nondecreasing parts
    std::function<void(int, int, std::vector<int>&, std::vector<std::vector<int>>&)> parts =
        [&](int rest, int min_part, std::vector<int>& cur, std::vector<std::vector<int>>& acc) {
            if (rest == 0) {
                acc.push_back(cur);
                return;
            }
            for (int k = min_part; k <= rest; ++k) {
                cur.push_back(k);
                parts(rest - k, k, cur, acc);
                cur.pop_back();
            }
        };
    for (std::int64_t n = 1; n <= max_order; ++n) {
        std::vector<std::vector<std::int64_t>> lists{{}};
        for (const auto& pp : factorize(n)) {
            std::vector<std::vector<int>> ps;
            std::vector<int> cur;
            parts(pp.exponent, 1, cur, ps);
            std::vector<std::vector<std::int64_t>> next;
            for (const auto& l : lists)
                for (const auto& part : ps) {
                    auto m = l;
                    for (int e : part) m.push_back(ipow(pp.prime, e));
                    next.push_back(std::move(m));
                }
            lists = std::move(next);
        }
        std::sort(lists.begin(), lists.end());
        for (auto& l : lists) out.push_back(FinAbGroup::from_canonical(std::move(l)));
    }
    return out;
}

}  // namespace abelbias
