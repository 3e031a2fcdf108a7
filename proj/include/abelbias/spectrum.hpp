#pragma once

// Finite slices of the bias sets B_k and B_{k,d}: every map on every tuple of groups of
// bounded order, deduplicated by exact value.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bias.hpp"
#include "cyclotomic.hpp"
#include "maps.hpp"
#include "parallel.hpp"

namespace abelbias {

struct SpectrumEntry {
    BiasValue value;
    MultiAffine witness;  ///< the first map in enumeration order with this bias
};

struct SpectrumReport {
    std::size_t k = 0;
    std::optional<std::size_t> degree;  ///< absent for multilinear slices
    std::int64_t max_order = 0;
    std::vector<SpectrumEntry> entries;  ///< sorted, pairwise distinct
    std::int64_t instances = 0;          ///< maps enumerated

    std::vector<BiasValue> values() const {
        std::vector<BiasValue> v;
        for (const auto& e : entries) v.push_back(e.value);
        return v;
    }
};

/// Report order: rationals ascending, then irrational values by modulus, then by canonical form.
inline bool bias_less(const BiasValue& a, const BiasValue& b) {
    if (a.is_rational() != b.is_rational()) return a.is_rational();
    if (a.is_rational()) return a.rational() < b.rational();
    const CycloValue x = a.cyclo(), y = b.cyclo();
    if (const int c = compare_modulus(x, y); c != 0) return c < 0;
    return x < y;
}

namespace detail {

/// Odometer over a list of per-entry denominators: value e runs over a/g_e, a < g_e.
struct TorusOdometer {
    std::vector<std::int64_t> den;

    Integer count() const {
        Integer c = 1;
        for (auto g : den) c *= to_integer(g);
        return c;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        std::vector<std::int64_t> a(den.size(), 0);
        for (;;) {
            fn(static_cast<const std::vector<std::int64_t>&>(a));
            std::size_t e = a.size();
            for (;;) {
                if (e == 0) return;
                --e;
                if (++a[e] < den[e]) break;
                a[e] = 0;
            }
        }
    }
};

inline std::vector<std::int64_t> entry_denominators(const std::vector<FinAbGroup>& doms) {
    std::vector<std::int64_t> den;
    tensor::for_each_index(dims_of(doms), [&](const std::vector<std::size_t>& m) {
        den.push_back(entry_annihilator(doms, m));
    });
    return den;
}

inline std::vector<std::vector<FinAbGroup>> group_tuples(std::size_t k, std::int64_t max_order) {
    const auto groups = all_groups_up_to(max_order);
    std::vector<std::vector<FinAbGroup>> out{{}};
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<std::vector<FinAbGroup>> next;
        for (const auto& t : out)
            for (const auto& g : groups) {
                auto u = t;
                u.push_back(g);
                next.push_back(std::move(u));
            }
        out = std::move(next);
    }
    return out;
}

/// Axis sets of size 1..d in the MultiAffine term order.
inline std::vector<Axes> affine_shapes(std::size_t k, std::size_t d) {
    std::vector<Axes> out;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
        Axes a;
        for (std::size_t i = 0; i < k; ++i)
            if (mask >> i & 1) a.push_back(i);
        if (a.size() <= d) out.push_back(std::move(a));
    }
    std::sort(out.begin(), out.end(), [](const Axes& x, const Axes& y) {
        return x.size() != y.size() ? x.size() < y.size() : x < y;
    });
    return out;
}

struct ValueKeyLess {
    bool operator()(const BiasValue& a, const BiasValue& b) const {
        if (a.is_rational() != b.is_rational()) return a.is_rational();
        if (a.is_rational()) return a.rational() < b.rational();
        return a.cyclo() < b.cyclo();
    }
};

using ValueMap = std::map<BiasValue, MultiAffine, ValueKeyLess>;

/// Runs `scan(tuple, found)` on every tuple, in parallel over contiguous tuple ranges; the
/// merge keeps the witness of the earliest tuple, so output does not depend on `jobs`.
template <class Scan>
SpectrumReport run_enumeration(const std::vector<std::vector<FinAbGroup>>& tuples, unsigned jobs, Scan&& scan) {
    std::vector<ValueMap> found(std::max(1u, jobs));
    parallel_ranges(static_cast<std::int64_t>(tuples.size()), jobs,
                    [&](unsigned job, std::int64_t lo, std::int64_t hi) {
                        for (std::int64_t t = lo; t < hi; ++t) scan(tuples[static_cast<std::size_t>(t)], found[job]);
                    });
    ValueMap all;
    for (auto& f : found)
        for (auto& [v, w] : f) all.try_emplace(v, std::move(w));
    SpectrumReport r;
    for (auto& [v, w] : all) r.entries.push_back({v, std::move(w)});
    std::stable_sort(r.entries.begin(), r.entries.end(),
                     [](const SpectrumEntry& a, const SpectrumEntry& b) { return bias_less(a.value, b.value); });
    return r;
}

}  // namespace detail

/// Biases of all multilinear maps A_1 x ... x A_k -> T with |A_i| <= max_order.
/// opt.budget caps the number of maps.
inline SpectrumReport enumerate_bias_set(std::size_t k, std::int64_t max_order, const EngineOptions& opt = {}) {
    if (k == 0) throw InputError("enumerate_bias_set: k must be >= 1");
    if (max_order < 1) throw InputError("enumerate_bias_set: max_order must be >= 1");
    const auto tuples = detail::group_tuples(k, max_order);
    Integer total = 0;
    for (const auto& t : tuples) total += detail::TorusOdometer{detail::entry_denominators(t)}.count();
    if (total > to_integer(static_cast<std::int64_t>(opt.budget)))
        throw BudgetExceeded("enumerate_bias_set", total.fits_slong_p() ? total.get_si() : SIZE_MAX, opt.budget);

    EngineOptions inner = opt;
    inner.jobs = 1;
    auto r = detail::run_enumeration(tuples, opt.jobs, [&](const std::vector<FinAbGroup>& doms, detail::ValueMap& out) {
        const detail::TorusOdometer od{detail::entry_denominators(doms)};
        od.for_each([&](const std::vector<std::int64_t>& a) {
            std::vector<TorusValue> t;
            for (std::size_t e = 0; e < a.size(); ++e) t.emplace_back(a[e], od.den[e]);
            MultiMapT phi(doms, std::move(t));
            BiasValue v(bias(phi, inner));
            if (!out.contains(v)) out.emplace(std::move(v), MultiAffine::from_multilinear(phi));
        });
    });
    r.k = k;
    r.max_order = max_order;
    r.instances = total.get_si();
    return r;
}

/// Biases of all multiaffine maps of degree <= d with zero constant term.
inline SpectrumReport enumerate_bias_set_affine(std::size_t k, std::size_t d, std::int64_t max_order,
                                                const EngineOptions& opt = {}) {
    if (k == 0 || d == 0) throw InputError("enumerate_bias_set_affine: k and d must be >= 1");
    if (max_order < 1) throw InputError("enumerate_bias_set_affine: max_order must be >= 1");
    const auto tuples = detail::group_tuples(k, max_order);
    const auto shapes = detail::affine_shapes(k, std::min(d, k));

    struct Layout {
        detail::TorusOdometer od;
        std::vector<std::size_t> offset;  // start of each shape's entries
    };
    auto layout = [&](const std::vector<FinAbGroup>& doms) {
        Layout l;
        for (const auto& s : shapes) {
            l.offset.push_back(l.od.den.size());
            const auto den = detail::entry_denominators(detail::select(doms, s));
            l.od.den.insert(l.od.den.end(), den.begin(), den.end());
        }
        l.offset.push_back(l.od.den.size());
        return l;
    };

    Integer total = 0;
    for (const auto& t : tuples) total += layout(t).od.count();
    if (total > to_integer(static_cast<std::int64_t>(opt.budget)))
        throw BudgetExceeded("enumerate_bias_set_affine", total.fits_slong_p() ? total.get_si() : SIZE_MAX,
                             opt.budget);

    EngineOptions inner = opt;
    inner.jobs = 1;
    auto r = detail::run_enumeration(tuples, opt.jobs, [&](const std::vector<FinAbGroup>& doms, detail::ValueMap& out) {
        const Layout l = layout(doms);
        l.od.for_each([&](const std::vector<std::int64_t>& a) {
            std::vector<MultiAffine::Term> terms;
            for (std::size_t s = 0; s < shapes.size(); ++s) {
                std::vector<TorusValue> t;
                bool nonzero = false;
                for (std::size_t e = l.offset[s]; e < l.offset[s + 1]; ++e) {
                    t.emplace_back(a[e], l.od.den[e]);
                    nonzero |= a[e] != 0;
                }
                if (nonzero) terms.push_back({shapes[s], MultiMapT(detail::select(doms, shapes[s]), std::move(t))});
            }
            MultiAffine phi(doms, std::move(terms));
            BiasValue v(bias_oracle(phi, inner));
            if (!out.contains(v)) out.emplace(std::move(v), std::move(phi));
        });
    });
    r.k = k;
    r.degree = d;
    r.max_order = max_order;
    r.instances = total.get_si();
    return r;
}

/// G(p) = sum_{x mod p} e(x^2 / p).
inline CycloValue gauss_sum(std::int64_t p) {
    if (p == 2 || !is_prime(p)) throw InputError("gauss_sum: p must be an odd prime");
    std::vector<std::int64_t> hist(static_cast<std::size_t>(p), 0);
    for (std::int64_t x = 0; x < p; ++x) ++hist[static_cast<std::size_t>(mulmod(x, x, p))];
    return cyclo_from_histogram(p, hist, Integer(1));
}

/// For a rational value x of the report, the distance to the largest strictly smaller
/// rational value found; none when x is absent or smallest.
inline std::optional<Fraction> is_reverse_gap(const SpectrumReport& report, const Fraction& x) {
    std::optional<Fraction> below;
    bool present = false;
    for (const auto& e : report.entries) {
        if (!e.value.is_rational()) continue;
        const Fraction& v = e.value.rational();
        if (v == x) present = true;
        if (v < x && (!below || v > *below)) below = v;
    }
    if (!present || !below) return std::nullopt;
    return Fraction(x - *below);
}

/// One line per value: exact form, a tab, a certified decimal.
inline void write_report(std::ostream& os, const SpectrumReport& r, int digits = 12) {
    for (const auto& e : r.entries) os << e.value.str() << '\t' << e.value.decimal(digits) << '\n';
}

}  // namespace abelbias
