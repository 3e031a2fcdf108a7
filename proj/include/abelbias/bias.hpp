#pragma once

// Exact bias by two independent algorithms, and the inequalities of the basic
// bias lemmas as checkable operations.
//
// The kernel method marginalizes one axis: for multilinear phi,
//   bias(phi) = P_{x_I}(phi_{x_I} == 0),  I = [k] \ {i},
// and phi_{x_I} vanishes iff it vanishes on the generators of A_i. The oracle
// sums e(phi(x)) literally, as a histogram of residues mod N turned into a
// cyclotomic value.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cyclotomic.hpp"
#include "maps.hpp"
#include "parallel.hpp"

namespace abelbias {

struct EngineOptions {
    std::size_t budget = 1'000'000;  ///< maximum number of enumerated points
    unsigned jobs = 1;
};

/// Rational for multilinear inputs, cyclotomic for multiaffine ones.
class BiasValue {
public:
    BiasValue() : v_(Fraction(1)) {}
    explicit BiasValue(Fraction f) : v_(std::move(f)) {}
    explicit BiasValue(CycloValue c) {
        if (c.is_rational())
            v_ = c.to_fraction();
        else
            v_ = std::move(c);
    }

    bool is_rational() const noexcept { return std::holds_alternative<Fraction>(v_); }
    const Fraction& rational() const {
        if (!is_rational()) throw InputError("bias value is not rational");
        return std::get<Fraction>(v_);
    }
    CycloValue cyclo() const { return is_rational() ? CycloValue(std::get<Fraction>(v_)) : std::get<CycloValue>(v_); }

    /// `a/b` for rationals, `cyclo(N;c0,...;den)` otherwise.
    std::string str() const { return is_rational() ? to_string(rational()) : std::get<CycloValue>(v_).str(); }

    /// Certified decimal: exact truncation for rationals, an enclosure center and radius
    /// otherwise.
    std::string decimal(int digits = 12) const;

    friend bool operator==(const BiasValue& a, const BiasValue& b) { return a.v_ == b.v_; }

private:
    std::variant<Fraction, CycloValue> v_;
};

namespace detail {

inline std::string format_double(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
    return s;
}

inline std::string format_radius(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1e", r);
    return buf;
}

}  // namespace detail

inline std::string BiasValue::decimal(int digits) const {
    if (is_rational()) return to_decimal(rational(), digits);
    const auto e = cyclo_approx(std::get<CycloValue>(v_), 128);
    const double im = e.center_im();
    const std::string mag = detail::format_double(std::abs(im), digits);
    const bool negative = im < 0 && mag.find_first_not_of("0.") != std::string::npos;
    std::string s = detail::format_double(e.center_re(), digits);
    s += negative ? " - " : " + ";
    s += mag + "i";
    return s + " +/- " + detail::format_radius(e.radius());
}

namespace detail {

inline void check_budget(const char* what, std::int64_t points, std::size_t budget) {
    if (points < 0 || static_cast<std::uint64_t>(points) > budget)
        throw BudgetExceeded(what, static_cast<std::size_t>(points), budget);
}

inline std::int64_t product_order(const std::vector<FinAbGroup>& groups) {
    std::int64_t s = 1;
    for (const auto& g : groups) s = checked_mul(s, g.order());
    return s;
}

/// Counting state for the kernel method: axes are permuted so the enumerated ones come
/// first (in increasing index order) and the kept axis is last.
struct KernelCounter {
    std::int64_t modulus = 1;
    std::vector<FinAbGroup> groups;  // enumerated groups, by level
    std::vector<std::int64_t> tail;  // tail[l] = prod_{m >= l} |groups[m]|
    std::vector<std::size_t> rest;   // rest[l] = size of the tensor left after contracting level l

    struct Scratch {
        std::vector<std::vector<std::int64_t>> bufs;
        std::vector<std::int64_t> coords;
    };

    Scratch make_scratch() const {
        Scratch s;
        std::size_t maxrank = 0;
        for (std::size_t l = 0; l < groups.size(); ++l) {
            s.bufs.emplace_back(rest[l]);
            maxrank = std::max(maxrank, groups[l].rank());
        }
        s.coords.resize(maxrank);
        return s;
    }

    /// Number of x in groups[level] (indices lo..hi) x groups[level+1..] for which the
    /// contraction of `buf` vanishes. A vanishing partial contraction accounts for every
    /// completion at once.
    std::int64_t count(std::size_t level, const std::int64_t* buf, Scratch& s, std::int64_t lo,
                       std::int64_t hi) const {
        const FinAbGroup& g = groups[level];
        std::int64_t* next = s.bufs[level].data();
        const std::size_t n = rest[level];
        const bool last = level + 1 == groups.size();
        std::int64_t total = 0;
        GroupElement x = element_at(g, lo);
        for (std::int64_t idx = lo; idx < hi; ++idx, next_element(g, x)) {
            for (std::size_t j = 0; j < g.rank(); ++j) s.coords[j] = x.coords[j] % modulus;
            tensor::contract_front(buf, g.rank(), n, s.coords.data(), modulus, next);
            if (std::all_of(next, next + n, [](std::int64_t v) { return v == 0; }))
                total += tail[level + 1];
            else if (!last)
                total += count(level + 1, next, s, 0, groups[level + 1].order());
        }
        return total;
    }
};

}  // namespace detail

/// The axis the kernel method keeps: the largest |A_i|, earliest on ties.
inline std::size_t kernel_axis(const MultiMapT& phi) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < phi.arity(); ++i)
        if (phi.domain(i).order() > phi.domain(best).order()) best = i;
    return best;
}

/// bias(phi) for multilinear phi by the kernel method. Exact; denominator divides |A_I|.
inline Fraction bias(const MultiMapT& phi, const EngineOptions& opt = {}) {
    if (phi.is_zero()) return Fraction(1);
    const std::size_t keep = kernel_axis(phi);
    std::vector<std::size_t> order;
    detail::KernelCounter kc;
    for (std::size_t i = 0; i < phi.arity(); ++i)
        if (i != keep) {
            order.push_back(i);
            kc.groups.push_back(phi.domain(i));
        }
    order.push_back(keep);
    const std::int64_t points = detail::product_order(kc.groups);
    detail::check_budget("bias", points, opt.budget);

    // k = 1: a nonzero linear map has bias 0.
    if (kc.groups.empty()) return Fraction(0);

    const auto r = tensor::permute(phi.residues(), order);
    kc.modulus = r.modulus;
    const std::size_t levels = kc.groups.size();
    kc.tail.assign(levels + 1, 1);
    for (std::size_t l = levels; l-- > 0;) kc.tail[l] = kc.tail[l + 1] * kc.groups[l].order();
    for (std::size_t l = 0; l < levels; ++l) {
        std::size_t v = 1;
        for (std::size_t m = l + 1; m < r.dims.size(); ++m) v *= r.dims[m];
        kc.rest.push_back(v);
    }

    std::vector<std::int64_t> partial(std::max(1u, opt.jobs), 0);
    detail::parallel_ranges(kc.groups[0].order(), opt.jobs, [&](unsigned job, std::int64_t lo, std::int64_t hi) {
        auto scratch = kc.make_scratch();
        partial[job] = kc.count(0, r.data.data(), scratch, lo, hi);
    });
    const std::int64_t zeros = std::accumulate(partial.begin(), partial.end(), std::int64_t{0});
    return make_fraction(zeros, points);
}

inline BiasValue bias_value(const MultiMapT& phi, const EngineOptions& opt = {}) { return BiasValue(bias(phi, opt)); }

// ---------------------------------------------------------------------------
// Oracle

namespace detail {

/// Histogram of phi(x) mod N over every point, built axis by axis: each term tensor is
/// contracted along its leading axis as soon as that axis is reached.
struct OracleCounter {
    std::int64_t modulus = 1;
    std::vector<FinAbGroup> groups;
    struct Term {
        std::vector<std::size_t> axes;
        std::vector<std::size_t> sizes;  // sizes[m] = tensor size after contracting m axes
        std::vector<std::int64_t> data;
    };
    std::vector<Term> terms;

    struct Scratch {
        std::vector<std::vector<std::vector<std::int64_t>>> bufs;  // [term][m]
        std::vector<const std::int64_t*> cur;                      // [term]
        std::vector<std::size_t> pos;                              // axes already contracted
        std::vector<std::int64_t> coords;
        std::vector<std::int64_t> hist;
    };

    Scratch make_scratch() const {
        Scratch s;
        std::size_t maxrank = 0;
        for (const auto& g : groups) maxrank = std::max(maxrank, g.rank());
        for (const auto& t : terms) {
            std::vector<std::vector<std::int64_t>> b;
            for (std::size_t m = 1; m < t.sizes.size(); ++m) b.emplace_back(t.sizes[m]);
            s.bufs.push_back(std::move(b));
            s.cur.push_back(t.data.data());
            s.pos.push_back(0);
        }
        s.coords.resize(maxrank);
        s.hist.assign(static_cast<std::size_t>(modulus), 0);
        return s;
    }

    void run(std::size_t axis, Scratch& s, std::int64_t lo, std::int64_t hi) const {
        if (axis == groups.size()) {
            std::int64_t v = 0;
            for (std::size_t t = 0; t < terms.size(); ++t) v = addmod(v, s.cur[t][0], modulus);
            ++s.hist[static_cast<std::size_t>(v)];
            return;
        }
        const FinAbGroup& g = groups[axis];
        std::vector<std::size_t> touched;
        for (std::size_t t = 0; t < terms.size(); ++t)
            if (s.pos[t] < terms[t].axes.size() && terms[t].axes[s.pos[t]] == axis) touched.push_back(t);
        std::vector<const std::int64_t*> saved(touched.size());
        for (std::size_t u = 0; u < touched.size(); ++u) saved[u] = s.cur[touched[u]];
        GroupElement x = element_at(g, lo);
        for (std::int64_t idx = lo; idx < hi; ++idx, next_element(g, x)) {
            for (std::size_t j = 0; j < g.rank(); ++j) s.coords[j] = x.coords[j] % modulus;
            for (std::size_t u = 0; u < touched.size(); ++u) {
                const std::size_t t = touched[u];
                const std::size_t m = s.pos[t];
                std::int64_t* out = s.bufs[t][m].data();
                tensor::contract_front(saved[u], g.rank(), terms[t].sizes[m + 1], s.coords.data(), modulus, out);
                s.cur[t] = out;
                s.pos[t] = m + 1;
            }
            run(axis + 1, s, 0, axis + 1 < groups.size() ? groups[axis + 1].order() : 1);
            for (std::size_t u = 0; u < touched.size(); ++u) --s.pos[touched[u]];
        }
        for (std::size_t u = 0; u < touched.size(); ++u) s.cur[touched[u]] = saved[u];
    }
};

}  // namespace detail

/// Literal average of e(phi(x)) over A_1 x ... x A_k, exact.
inline CycloValue bias_oracle(const MultiAffine& phi, const EngineOptions& opt = {}) {
    const std::int64_t points = detail::product_order(phi.domains());
    detail::check_budget("bias_oracle", points, opt.budget);
    detail::OracleCounter oc;
    oc.groups = phi.domains();
    for (const auto& t : phi.terms())
        for (const auto& v : t.map.tensor()) oc.modulus = checked_lcm(oc.modulus, to_int64(v.den()));
    for (const auto& t : phi.terms()) {
        if (t.map.is_zero()) continue;
        detail::OracleCounter::Term term;
        term.axes = t.axes;
        const auto r = t.map.residues(oc.modulus);
        term.data = r.data;
        for (std::size_t m = 0; m <= r.dims.size(); ++m) {
            std::size_t v = 1;
            for (std::size_t a = m; a < r.dims.size(); ++a) v *= r.dims[a];
            term.sizes.push_back(v);
        }
        oc.terms.push_back(std::move(term));
    }
    if (oc.terms.empty()) return CycloValue(1);

    const unsigned jobs = std::max(1u, opt.jobs);
    std::vector<std::vector<std::int64_t>> hists(jobs);
    detail::parallel_ranges(oc.groups[0].order(), jobs, [&](unsigned job, std::int64_t lo, std::int64_t hi) {
        auto s = oc.make_scratch();
        oc.run(0, s, lo, hi);
        hists[job] = std::move(s.hist);
    });
    std::vector<std::int64_t> hist(static_cast<std::size_t>(oc.modulus), 0);
    for (const auto& h : hists)
        for (std::size_t r = 0; r < h.size(); ++r) hist[r] += h[r];
    return cyclo_from_histogram(oc.modulus, hist, to_integer(points));
}

inline CycloValue bias_oracle(const MultiMapT& phi, const EngineOptions& opt = {}) {
    return bias_oracle(MultiAffine::from_multilinear(phi), opt);
}

/// P(F(x) = 0) over A_1 x ... x A_{k-1}, by enumeration.
inline Fraction prob_zero(const MultiMapG& f, const EngineOptions& opt = {}) {
    const std::int64_t points = detail::product_order(f.domains());
    detail::check_budget("prob_zero", points, opt.budget);
    const auto rs = f.residues();
    std::int64_t zeros = 0;
    for_each_point(f.domains(), [&](const std::vector<GroupElement>& x) {
        bool zero = true;
        for (const auto& r : rs)
            if (detail::evaluate_residue(r, x) != 0) {
                zero = false;
                break;
            }
        zeros += zero;
    });
    return make_fraction(zeros, points);
}

// ---------------------------------------------------------------------------
// Checks. Each returns whether the inequality or identity holds, with both exact sides
// and the instance on failure.

struct CheckResult {
    bool holds = true;
    std::string lhs;
    std::string rhs;
    std::string witness;  ///< empty when the check holds

    explicit operator bool() const noexcept { return holds; }
};

inline std::string describe(const MultiMapT& phi) {
    std::string s = "domains [";
    for (std::size_t i = 0; i < phi.arity(); ++i) {
        if (i) s += "; ";
        s += phi.domain(i).str();
    }
    s += "] tensor [";
    for (std::size_t e = 0; e < phi.tensor().size(); ++e) {
        if (e) s += " ";
        s += phi.tensor()[e].str();
    }
    return s + "]";
}

namespace detail {

inline CheckResult check_ge(const Fraction& lhs, const Fraction& rhs, const std::string& instance) {
    CheckResult c;
    c.holds = lhs >= rhs;
    c.lhs = to_string(lhs);
    c.rhs = to_string(rhs);
    if (!c.holds) c.witness = instance + ": " + c.lhs + " < " + c.rhs;
    return c;
}

inline CheckResult check_eq(const Fraction& lhs, const Fraction& rhs, const std::string& instance) {
    CheckResult c;
    c.holds = lhs == rhs;
    c.lhs = to_string(lhs);
    c.rhs = to_string(rhs);
    if (!c.holds) c.witness = instance + ": " + c.lhs + " != " + c.rhs;
    return c;
}

}  // namespace detail

/// bias(phi) = E_{x_I} bias(phi_{x_I}), for I a proper subset of the axes.
inline CheckResult bias_recursion_check(const MultiMapT& phi, const Axes& fixed, const EngineOptions& opt = {}) {
    detail::check_axes(fixed, phi.arity());
    if (fixed.size() == phi.arity()) throw InputError("bias_recursion_check: I must be a proper subset");
    const Fraction whole = bias(phi, opt);
    if (fixed.empty()) return detail::check_eq(whole, whole, "");
    std::vector<FinAbGroup> sub;
    for (auto a : fixed) sub.push_back(phi.domain(a));
    const std::int64_t points = detail::product_order(sub);
    detail::check_budget("bias_recursion_check", points, opt.budget);
    Fraction sum = 0;
    for_each_point(sub, [&](const std::vector<GroupElement>& a) { sum += bias(restrict_fix(phi, fixed, a), opt); });
    const Fraction avg = sum / Fraction(to_integer(points));
    return detail::check_eq(whole, avg, describe(phi) + " I={" + axes_str(fixed) + "}");
}

struct TrivialBounds {
    Fraction lower;
    Fraction upper;
    bool upper_applies;  ///< false for the zero map, where upper is reported as 1
};

/// 1 - prod_{j != i}(1 - 1/|A_j|) <= bias(phi) <= 1 - prod_{j != i}(1 - 1/p_j).
inline TrivialBounds trivial_bounds(const MultiMapT& phi, std::size_t axis) {
    if (axis >= phi.arity()) throw InputError("trivial_bounds: axis out of range");
    Fraction lo = 1, up = 1;
    for (std::size_t j = 0; j < phi.arity(); ++j) {
        if (j == axis) continue;
        const std::int64_t n = phi.domain(j).order();
        lo *= Fraction(1) - make_fraction(1, n);
        if (n > 1) up *= Fraction(1) - make_fraction(1, smallest_prime_divisor(n));
    }
    TrivialBounds b{Fraction(1) - lo, Fraction(1) - up, !phi.is_zero()};
    if (!b.upper_applies) b.upper = 1;
    return b;
}

inline CheckResult trivial_bounds_check(const MultiMapT& phi, const EngineOptions& opt = {}) {
    const Fraction b = bias(phi, opt);
    for (std::size_t i = 0; i < phi.arity(); ++i) {
        const auto tb = trivial_bounds(phi, i);
        if (b < tb.lower || b > tb.upper) {
            CheckResult c;
            c.holds = false;
            c.lhs = to_string(b);
            c.rhs = "[" + to_string(tb.lower) + ", " + to_string(tb.upper) + "]";
            c.witness = describe(phi) + " i=" + std::to_string(i + 1) + ": " + c.lhs + " outside " + c.rhs;
            return c;
        }
    }
    CheckResult c;
    c.lhs = to_string(b);
    return c;
}

struct ExponentBound {
    std::int64_t q;  ///< largest prime-power element order in the image
    int n;           ///< q = p^n
    Fraction bound;  ///< (n+1)^(k-2) / q
};

/// The image of phi is generated by the tensor entries, so its largest prime-power element
/// order is the largest prime-power part of an entry denominator.
inline ExponentBound exponent_bound(const MultiMapT& phi) {
    if (phi.arity() < 2) throw InputError("exponent_bound: needs k >= 2");
    if (phi.is_zero()) throw InputError("exponent_bound: the zero map has no element of prime-power order");
    ExponentBound e{1, 0, 1};
    for (const auto& v : phi.tensor())
        for (const auto& pp : factorize(to_int64(v.den())))
            if (pp.value > e.q) {
                e.q = pp.value;
                e.n = pp.exponent;
            }
    Integer num = 1;
    for (std::size_t i = 2; i < phi.arity(); ++i) num *= e.n + 1;
    e.bound = Fraction(num, to_integer(e.q));
    e.bound.canonicalize();
    return e;
}

inline CheckResult exponent_bound_check(const MultiMapT& phi, const EngineOptions& opt = {}) {
    const Fraction b = bias(phi, opt);
    const auto e = exponent_bound(phi);
    return detail::check_ge(e.bound, b, describe(phi) + " q=" + std::to_string(e.q));
}

/// bias(phi + psi) >= bias(phi) bias(psi).
inline CheckResult subadditivity_check(const MultiMapT& phi, const MultiMapT& psi, const EngineOptions& opt = {}) {
    const Fraction sum = bias(add(phi, psi), opt);
    const Fraction prod = bias(phi, opt) * bias(psi, opt);
    return detail::check_ge(sum, prod, describe(phi) + " + " + describe(psi));
}

/// bias(psi(f_1, ..., f_l)) >= bias(psi).
inline CheckResult factor_check(const MultiMapT& psi, const Partition& partition, const std::vector<MultiMapG>& factors,
                                const std::vector<FinAbGroup>& domains, const EngineOptions& opt = {}) {
    const MultiMapT phi = compose_through(psi, partition, factors, domains);
    return detail::check_ge(bias(phi, opt), bias(psi, opt), describe(phi) + " through " + describe(psi));
}

/// bias(phi restricted along homs) >= bias(phi).
inline CheckResult restriction_check(const MultiMapT& phi, const std::vector<GroupHom>& homs,
                                     const EngineOptions& opt = {}) {
    const MultiMapT sub = restrict_subgroups(phi, homs);
    return detail::check_ge(bias(sub, opt), bias(phi, opt), describe(phi) + " restricted to " + describe(sub));
}

/// bias(phi) = prod_p bias(phi_p).
inline CheckResult multiplicativity_check(const MultiMapT& phi, const EngineOptions& opt = {}) {
    Fraction prod = 1;
    for (const auto& part : primary_split(phi)) prod *= bias(part.map, opt);
    return detail::check_eq(bias(phi, opt), prod, describe(phi));
}

/// P(F = 0) = bias(phi) for phi(x, chi) = <chi, F(x)>.
inline CheckResult group_map_check(const MultiMapG& f, const EngineOptions& opt = {}) {
    const MultiMapT phi = from_group_map(f);
    return detail::check_eq(prob_zero(f, opt), bias(phi, opt), describe(phi));
}

/// |bias(phi)| <= bias(phi_J), under the hypothesis phi_I = 0 for every I strictly
/// containing J (violations throw PreconditionViolation naming I).
inline CheckResult main_term_check(const MultiAffine& phi, const Axes& j, const EngineOptions& opt = {}) {
    detail::check_axes(j, phi.arity());
    for (const auto& t : phi.terms()) {
        if (t.axes.size() <= j.size() || t.map.is_zero()) continue;
        if (std::includes(t.axes.begin(), t.axes.end(), j.begin(), j.end()))
            throw PreconditionViolation("main_term_check: a term strictly above J is nonzero",
                                        "I={" + axes_str(t.axes) + "}");
    }
    const CycloValue whole = bias_oracle(phi, opt);
    const Fraction main = j.empty() ? Fraction(1) : bias(phi.term(j), opt);
    CheckResult c;
    c.holds = compare_modulus(whole, main) <= 0;
    c.lhs = "|" + whole.str() + "|";
    c.rhs = to_string(main);
    if (!c.holds) c.witness = "J={" + axes_str(j) + "}: " + c.lhs + " > " + c.rhs;
    return c;
}

}  // namespace abelbias
