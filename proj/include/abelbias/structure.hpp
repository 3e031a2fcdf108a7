#pragma once

// Rank certificates (sums of maps factoring through m_q), their verification and
// bounded search, the three extension algorithms for p-groups, one exact step of
// the induction on exponents, and the rewriting of a certificate for
// <chi, F(x)> into crush form for F.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bias.hpp"
#include "maps.hpp"
#include "parallel.hpp"

namespace abelbias {

/// One summand m_q(left(x_I), right(x_{I^c})).
struct RankTerm {
    std::int64_t q = 1;
    Axes axes;        ///< I: nonempty, proper, strictly increasing
    MultiMapG left;   ///< A_I -> Z/q
    MultiMapG right;  ///< A_{I^c} -> Z/q
};

struct RankCertificate {
    std::vector<RankTerm> terms;
    std::size_t rank() const noexcept { return terms.size(); }
};

namespace detail {

inline std::string point_str(const std::vector<GroupElement>& x) {
    std::string s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += " ";
        s += to_string(x[i]);
    }
    return s;
}

inline void check_p_groups(const std::vector<FinAbGroup>& groups, std::int64_t p, const char* what) {
    for (const auto& g : groups)
        if (!g.is_p_group(p))
            throw InputError(std::string(what) + ": " + g.str() + " is not a " + std::to_string(p) + "-group");
}

inline void check_power_of(std::int64_t q, std::int64_t p, const char* what) {
    if (!is_prime(p)) throw InputError(std::string(what) + ": p = " + std::to_string(p) + " is not prime");
    const auto pp = as_prime_power(q);
    if (!pp || pp->prime != p)
        throw InputError(std::string(what) + ": q = " + std::to_string(q) + " is not a power of " + std::to_string(p));
}

}  // namespace detail

/// Throws InputError unless the term has the right shape for the given domains.
inline void check_term(const RankTerm& t, const std::vector<FinAbGroup>& domains) {
    const std::size_t k = domains.size();
    if (!as_prime_power(t.q)) throw InputError("certificate term: q = " + std::to_string(t.q) + " is not a prime power");
    if (t.axes.empty() || t.axes.size() >= k)
        throw InputError("certificate term: I must be a nonempty proper subset of the axes");
    detail::check_axes(t.axes, k);
    const Axes rest = detail::complement(t.axes, k);
    const FinAbGroup zq = cyclic_group(t.q);
    if (!(t.left.domains() == detail::select(domains, t.axes)) || !(t.left.codomain() == zq))
        throw InputError("certificate term I={" + axes_str(t.axes) + "}: left factor must map A_I to Z/" +
                         std::to_string(t.q));
    if (!(t.right.domains() == detail::select(domains, rest)) || !(t.right.codomain() == zq))
        throw InputError("certificate term I={" + axes_str(t.axes) + "}: right factor must map A_I^c to Z/" +
                         std::to_string(t.q));
}

/// m_q(left(x_I), right(x_{I^c})) as a map on the full domain.
inline MultiMapT term_map(const RankTerm& t, const std::vector<FinAbGroup>& domains) {
    check_term(t, domains);
    Partition part{{t.axes, detail::complement(t.axes, domains.size())}};
    return compose_through(m_q(t.q), part, {t.left, t.right}, domains);
}

inline MultiMapT certificate_sum(const RankCertificate& cert, const std::vector<FinAbGroup>& domains) {
    MultiMapT s = MultiMapT::zero(domains);
    for (const auto& t : cert.terms) s = add(s, term_map(t, domains));
    return s;
}

/// prod_i 1/q_i; bias(phi) is at least this for any verifying certificate.
inline Fraction certificate_bias_bound(const RankCertificate& cert) {
    Fraction b = 1;
    for (const auto& t : cert.terms) b /= Fraction(to_integer(t.q));
    return b;
}

struct VerifyResult {
    bool ok = true;
    std::vector<GroupElement> witness;  ///< first point (lexicographic) where the two sides differ
    std::string expected;
    std::string actual;
    bool exhaustive = true;  ///< false when the witness is a generator tuple found without enumeration

    explicit operator bool() const noexcept { return ok; }
    std::string message() const {
        if (ok) return "ok";
        return "mismatch at " + detail::point_str(witness) + ": expected " + expected + ", got " + actual;
    }
};

namespace detail {

/// Smallest point where `diff` is nonzero: lexicographic enumeration within the budget,
/// otherwise the first nonzero generator tuple.
inline std::vector<GroupElement> first_nonzero_point(const MultiMapT& diff, std::size_t budget, bool& exhaustive) {
    exhaustive = static_cast<std::uint64_t>(diff.domain_size()) <= budget;
    if (exhaustive) {
        PointEvaluator ev(diff.residues());
        std::vector<GroupElement> x;
        for (const auto& g : diff.domains()) x.push_back(zero_element(g));
        for (;;) {
            if (ev(x) != 0) return x;
            std::size_t i = x.size();
            for (;;) {
                if (i == 0) return {};
                --i;
                if (next_element(diff.domain(i), x[i])) break;
            }
        }
    }
    const auto dims = diff.dims();
    for (std::size_t e = 0; e < diff.tensor().size(); ++e)
        if (!diff.tensor()[e].is_zero()) {
            const auto m = tensor::unflatten(e, dims);
            std::vector<GroupElement> x;
            for (std::size_t a = 0; a < m.size(); ++a) x.push_back(generator(diff.domain(a), m[a]));
            return x;
        }
    return {};
}

inline VerifyResult compare_maps(const MultiMapT& expected, const MultiMapT& actual, std::size_t budget) {
    VerifyResult r;
    const MultiMapT diff = subtract(expected, actual);
    if (diff.is_zero()) return r;
    r.ok = false;
    r.witness = first_nonzero_point(diff, budget, r.exhaustive);
    r.expected = evaluate(expected, r.witness).str();
    r.actual = evaluate(actual, r.witness).str();
    return r;
}

}  // namespace detail

/// Checks sum_terms m_q(left(x_I), right(x_{I^c})) == phi. Equality of generator tensors
/// decides it; on failure the lexicographically first differing point is reported.
inline VerifyResult verify_certificate(const MultiMapT& phi, const RankCertificate& cert, const EngineOptions& opt = {}) {
    return detail::compare_maps(phi, certificate_sum(cert, phi.domains()), opt.budget);
}

/// Precomposes every factor with homomorphisms h_i : A'_i -> A_i.
inline RankCertificate pullback_certificate(const RankCertificate& cert, const std::vector<GroupHom>& homs) {
    RankCertificate out;
    for (const auto& t : cert.terms) {
        std::vector<GroupHom> hl, hr;
        for (auto a : t.axes) hl.push_back(homs[a]);
        for (auto a : detail::complement(t.axes, homs.size())) hr.push_back(homs[a]);
        out.terms.push_back({t.q, t.axes, pullback(t.left, hl), pullback(t.right, hr)});
    }
    return out;
}

/// Translates a certificate for phi' (axis b of phi' is axis order[b] of phi) into one for phi.
inline RankCertificate unpermute_certificate(const RankCertificate& cert, const std::vector<std::size_t>& order) {
    RankCertificate out;
    const std::size_t k = order.size();
    auto remap = [&](const Axes& axes, const MultiMapG& f, Axes& new_axes) {
        std::vector<std::pair<std::size_t, std::size_t>> pos;  // (original axis, position in f)
        for (std::size_t v = 0; v < axes.size(); ++v) pos.emplace_back(order[axes[v]], v);
        std::sort(pos.begin(), pos.end());
        std::vector<std::size_t> perm;
        new_axes.clear();
        for (auto& [orig, v] : pos) {
            new_axes.push_back(orig);
            perm.push_back(v);
        }
        return permute_axes(f, perm);
    };
    for (const auto& t : cert.terms) {
        Axes li, ri;
        MultiMapG left = remap(t.axes, t.left, li);
        MultiMapG right = remap(detail::complement(t.axes, k), t.right, ri);
        out.terms.push_back({t.q, std::move(li), std::move(left), std::move(right)});
    }
    return out;
}

/// The same summand with I and I^c exchanged (m_q is symmetric).
inline RankTerm swap_sides(const RankTerm& t, std::size_t k) {
    return {t.q, detail::complement(t.axes, k), t.right, t.left};
}

// ---------------------------------------------------------------------------
// Bounded search

namespace detail {

/// Admissible generator tensors of multilinear maps A_I -> Z/q, in lexicographic order.
struct AdmissibleTensors {
    std::vector<std::int64_t> step;  // entry e ranges over multiples of step[e] below q
    std::int64_t q = 1;

    AdmissibleTensors(const std::vector<FinAbGroup>& doms, std::int64_t q_) : q(q_) {
        tensor::for_each_index(dims_of(doms), [&](const std::vector<std::size_t>& m) {
            step.push_back(q / std::gcd(q, entry_annihilator(doms, m)));
        });
    }

    Integer count() const {
        Integer c = 1;
        for (auto s : step) c *= to_integer(q / s);
        return c;
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        std::vector<std::int64_t> t(step.size(), 0);
        for (;;) {
            fn(static_cast<const std::vector<std::int64_t>&>(t));
            std::size_t e = t.size();
            for (;;) {
                if (e == 0) return;
                --e;
                t[e] += step[e];
                if (t[e] < q) break;
                t[e] = 0;
            }
        }
    }
};

struct VectorHash {
    std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
        return h;
    }
};

inline std::vector<std::int64_t> prime_powers_up_to(std::int64_t n) {
    std::vector<std::int64_t> out;
    for (std::int64_t q = 2; q <= n; ++q)
        if (as_prime_power(q)) out.push_back(q);
    return out;
}

/// Nonempty proper subsets of [k] containing axis 0, lexicographic as sorted lists.
inline std::vector<Axes> term_shapes(std::size_t k) {
    std::vector<Axes> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (k - 1)); ++mask) {
        Axes a{0};
        for (std::size_t i = 1; i < k; ++i)
            if (mask >> (i - 1) & 1) a.push_back(i);
        if (a.size() < k) out.push_back(std::move(a));
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct SearchTerm {
    std::int64_t q;
    Axes axes;
    std::vector<std::int64_t> left, right;  // single-coordinate tensors over Z/q
};

}  // namespace detail

/// Number of (q, I, left, right) term shapes the search would enumerate.
inline Integer search_space_size(const std::vector<FinAbGroup>& domains, std::int64_t max_q) {
    Integer total = 0;
    const std::size_t k = domains.size();
    if (k < 2) return total;
    for (auto q : detail::prime_powers_up_to(max_q))
        for (const auto& axes : detail::term_shapes(k)) {
            detail::AdmissibleTensors l(detail::select(domains, axes), q);
            detail::AdmissibleTensors r(detail::select(domains, detail::complement(axes, k)), q);
            total += l.count() * r.count();
        }
    return total;
}

/// The first verifying certificate in canonical order: least rank, then least prod q_i,
/// then lexicographic in (q, I, left tensor, right tensor) per term. Terms are normalized
/// so that axis 1 lies in I. Returns nullopt when no certificate of rank <= max_rank with
/// every q <= max_q exists.
inline std::optional<RankCertificate> search_decomposition(const MultiMapT& phi, std::int64_t max_q,
                                                           std::size_t max_rank, const EngineOptions& opt = {}) {
    if (max_q < 2) throw InputError("search_decomposition: max_q must be at least 2");
    if (phi.is_zero()) return RankCertificate{};
    const std::size_t k = phi.arity();
    if (k < 2 || max_rank == 0) return std::nullopt;

    const Integer space = search_space_size(phi.domains(), max_q) * to_integer(static_cast<std::int64_t>(max_rank));
    if (space > to_integer(static_cast<std::int64_t>(opt.budget)))
        throw BudgetExceeded("search_decomposition",
                             space.fits_slong_p() ? static_cast<std::size_t>(space.get_si()) : SIZE_MAX, opt.budget);

    // Every sum of terms has denominators dividing L.
    std::int64_t big_l = 1;
    for (auto q : detail::prime_powers_up_to(max_q)) big_l = checked_lcm(big_l, q);
    for (const auto& v : phi.tensor())
        if (to_integer(big_l) % v.den() != 0) return std::nullopt;

    // Distinct nonzero term maps, each represented by its canonical-first presentation.
    std::vector<detail::SearchTerm> terms;
    std::vector<std::vector<std::int64_t>> maps;
    std::unordered_map<std::vector<std::int64_t>, std::size_t, detail::VectorHash> index;
    const auto dims = phi.dims();
    for (auto q : detail::prime_powers_up_to(max_q))
        for (const auto& axes : detail::term_shapes(k)) {
            const Axes rest = detail::complement(axes, k);
            const auto ld = detail::select(phi.domains(), axes);
            const auto rd = detail::select(phi.domains(), rest);
            detail::AdmissibleTensors lt(ld, q), rt(rd, q);
            std::vector<std::vector<std::int64_t>> rights;
            rt.for_each([&](const std::vector<std::int64_t>& r) {
                if (std::any_of(r.begin(), r.end(), [](std::int64_t v) { return v != 0; })) rights.push_back(r);
            });
            const auto ldims = detail::dims_of(ld), rdims = detail::dims_of(rd);
            const std::int64_t scale = big_l / q;
            lt.for_each([&](const std::vector<std::int64_t>& l) {
                if (std::all_of(l.begin(), l.end(), [](std::int64_t v) { return v == 0; })) return;
                for (const auto& r : rights) {
                    std::vector<std::int64_t> m(tensor::volume(dims));
                    bool nonzero = false;
                    tensor::for_each_index(dims, [&](const std::vector<std::size_t>& j) {
                        std::vector<std::size_t> jl, jr;
                        for (auto a : axes) jl.push_back(j[a]);
                        for (auto a : rest) jr.push_back(j[a]);
                        const std::int64_t v = mulmod(l[tensor::flatten(jl, ldims)], r[tensor::flatten(jr, rdims)], q);
                        m[tensor::flatten(j, dims)] = v * scale;
                        nonzero |= v != 0;
                    });
                    if (!nonzero || index.count(m)) continue;
                    index.emplace(m, terms.size());
                    terms.push_back({q, axes, l, r});
                    maps.push_back(std::move(m));
                }
            });
        }

    const auto target = phi.residues(big_l).data;
    const Fraction phi_bias = bias(phi, opt);
    std::vector<Fraction> min_bias_for_rank{Fraction(1)};  // max_q^-r
    for (std::size_t r = 1; r <= max_rank; ++r) min_bias_for_rank.push_back(min_bias_for_rank.back() / max_q);

    struct Best {
        bool found = false;
        Integer prod;
        std::vector<std::size_t> idx;
    };
    for (std::size_t rank = 1; rank <= max_rank; ++rank) {
        if (phi_bias < min_bias_for_rank[rank]) continue;  // no rank-`rank` certificate can exist
        const unsigned jobs = rank == 1 ? 1u : std::max(1u, opt.jobs);
        std::vector<Best> bests(jobs);
        std::vector<std::size_t> counts(jobs, 0);
        auto dfs_range = [&](unsigned job, std::int64_t lo, std::int64_t hi) {
            Best& best = bests[job];
            std::vector<std::size_t> chosen;
            std::vector<std::int64_t> residual = target;
            std::function<void(std::size_t, const Integer&)> dfs = [&](std::size_t start, const Integer& prod) {
                const std::size_t remaining = rank - chosen.size();
                if (best.found && prod * (Integer(1) << static_cast<unsigned>(remaining)) >= best.prod) return;
                if (remaining == 1) {
                    auto it = index.find(residual);
                    if (it == index.end() || it->second < start) return;
                    const Integer total = prod * terms[it->second].q;
                    if (!best.found || total < best.prod) {
                        best.found = true;
                        best.prod = total;
                        best.idx = chosen;
                        best.idx.push_back(it->second);
                    }
                    return;
                }
                if (remaining >= 2 && !chosen.empty()) {
                    const MultiMapT res = MultiMapT::from_residues(phi.domains(), {big_l, dims, residual});
                    if (bias(res, opt) < min_bias_for_rank[remaining]) return;
                }
                const std::size_t end = chosen.empty() ? static_cast<std::size_t>(hi) : terms.size();
                for (std::size_t i = chosen.empty() ? static_cast<std::size_t>(lo) : start; i < end; ++i) {
                    if (++counts[job] > opt.budget) throw BudgetExceeded("search_decomposition", counts[job], opt.budget);
                    for (std::size_t e = 0; e < residual.size(); ++e) residual[e] = mod(residual[e] - maps[i][e], big_l);
                    chosen.push_back(i);
                    dfs(i, prod * terms[i].q);
                    chosen.pop_back();
                    for (std::size_t e = 0; e < residual.size(); ++e) residual[e] = addmod(residual[e], maps[i][e], big_l);
                }
            };
            dfs(0, Integer(1));
        };
        if (rank == 1)
            dfs_range(0, 0, static_cast<std::int64_t>(terms.size()));
        else
            detail::parallel_ranges(static_cast<std::int64_t>(terms.size()), jobs, dfs_range);
        const Best* best = nullptr;
        for (const auto& b : bests)
            if (b.found && (!best || b.prod < best->prod || (b.prod == best->prod && b.idx < best->idx))) best = &b;
        if (!best) continue;
        RankCertificate cert;
        for (auto i : best->idx) {
            const auto& t = terms[i];
            const Axes rest = detail::complement(t.axes, k);
            const FinAbGroup zq = cyclic_group(t.q);
            auto to_map = [&](const Axes& axes, const std::vector<std::int64_t>& v) {
                std::vector<GroupElement> entries;
                for (auto c : v) entries.push_back(GroupElement{{c}});
                return MultiMapG(detail::select(phi.domains(), axes), zq, std::move(entries));
            };
            cert.terms.push_back({t.q, t.axes, to_map(t.axes, t.left), to_map(rest, t.right)});
        }
        return cert;
    }
    return std::nullopt;
}

/// Largest n with (1 - 2^(1-k))^n >= eps: the number of primes p with phi_p nonzero is at
/// most this when bias(phi) >= eps. Exact rational comparisons only.
inline std::int64_t prime_support_bound(const Fraction& eps, std::size_t k) {
    if (eps <= 0 || eps > 1) throw InputError("prime_support_bound: eps must lie in (0, 1]");
    if (k == 0) throw InputError("prime_support_bound: k must be positive");
    if (k == 1) return 0;  // a nonzero linear phi_p has bias 0
    const Fraction r = Fraction(1) - Fraction(Integer(1), Integer(1) << static_cast<unsigned>(k - 1));
    std::int64_t n = 0;
    Fraction pw = r;
    while (pw >= eps) {
        ++n;
        pw *= r;
    }
    return n;
}

// ---------------------------------------------------------------------------
// Extension algorithms for p-groups

namespace detail {

/// Throws unless f vanishes whenever x_i lies in A_i[p], for every listed axis i.
inline void check_torsion_vanishing(const MultiMapG& f, std::int64_t p, const Axes& axes, const char* what) {
    for (auto i : axes) {
        const Subgroup t = p_torsion(f.domain(i), p);
        const MultiMapG g = substitute_axis(f, i, t.group, t.inclusion.images);
        const auto dims = g.dims();
        for (std::size_t e = 0; e < g.tensor().size(); ++e) {
            if (abelbias::is_zero(g.tensor()[e])) continue;
            const auto m = tensor::unflatten(e, dims);
            std::vector<GroupElement> x;
            for (std::size_t a = 0; a < m.size(); ++a)
                x.push_back(a == i ? t.inclusion.images[m[a]] : generator(f.domain(a), m[a]));
            throw PreconditionViolation(std::string(what) + ": map does not vanish on the " + std::to_string(p) +
                                            "-torsion of axis " + std::to_string(i + 1),
                                        point_str(x));
        }
    }
}

/// For each generator of pA, the generator e_j of A it is p times.
inline std::vector<std::size_t> times_p_parents(const Subgroup& s) {
    std::vector<std::size_t> parent;
    for (const auto& img : s.inclusion.images) {
        std::size_t j = img.coords.size();
        for (std::size_t c = 0; c < img.coords.size(); ++c)
            if (img.coords[c]) j = c;
        parent.push_back(j);
    }
    return parent;
}

}  // namespace detail

/// Domain enlargement: phi on pA_1 x A_2 x ... x A_k -> Z/q vanishing on the p-torsion of
/// axes 2..k extends to psi on A_1 x ... x A_k -> Z/(pq) with psi = p phi on
/// pA_1 x A_2 x ... x A_k. Each entry solves p psi_j = phi_j; the minimal solution is
/// the residue of phi_j itself.
inline MultiMapG extend_domain(const MultiMapG& phi, const FinAbGroup& a1, std::int64_t p, std::int64_t q) {
    detail::check_power_of(q, p, "extend_domain");
    detail::check_p_groups(phi.domains(), p, "extend_domain");
    detail::check_p_groups({a1}, p, "extend_domain");
    const Subgroup pa = times_p_subgroup(a1, p);
    if (!(phi.domain(0) == pa.group))
        throw InputError("extend_domain: first domain must be pA_1 = " + pa.group.str());
    if (!(phi.codomain() == cyclic_group(q))) throw InputError("extend_domain: codomain must be Z/" + std::to_string(q));
    Axes others;
    for (std::size_t i = 1; i < phi.arity(); ++i) others.push_back(i);
    detail::check_torsion_vanishing(phi, p, others, "extend_domain");

    const auto parent = detail::times_p_parents(pa);
    std::vector<FinAbGroup> doms = phi.domains();
    doms[0] = a1;
    const auto dims = detail::dims_of(doms);
    const auto pdims = phi.dims();
    std::vector<GroupElement> t(tensor::volume(dims), GroupElement{{0}});
    tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
        const auto it = std::find(parent.begin(), parent.end(), m[0]);
        if (it == parent.end()) return;  // e_{1j} has order p, so p e_{1j} = 0
        std::vector<std::size_t> src = m;
        src[0] = static_cast<std::size_t>(it - parent.begin());
        t[tensor::flatten(m, dims)] = phi.tensor()[tensor::flatten(src, pdims)];
    });
    return MultiMapG(std::move(doms), cyclic_group(p * q), std::move(t));
}

/// Range enlargement: phi : A_1 x ... x A_k -> Z/q vanishing on every p-torsion lifts to
/// psi into Z/(pq) with psi mod q = phi, taking minimal nonnegative lifts.
inline MultiMapG extend_range(const MultiMapG& phi, std::int64_t p, std::int64_t q) {
    detail::check_power_of(q, p, "extend_range");
    detail::check_p_groups(phi.domains(), p, "extend_range");
    if (!(phi.codomain() == cyclic_group(q))) throw InputError("extend_range: codomain must be Z/" + std::to_string(q));
    Axes all(phi.arity());
    std::iota(all.begin(), all.end(), std::size_t{0});
    detail::check_torsion_vanishing(phi, p, all, "extend_range");
    return MultiMapG(phi.domains(), cyclic_group(p * q), phi.tensor());
}

struct RankOneExtension {
    MultiMapT map;  ///< psi on A_1 x ... x A_k
    RankTerm term;  ///< psi = m_{pq}(psi_1(x_I), psi_2(x_{I^c}))
};

/// Extension of a rank-one map: phi = m_q(phi_1(x_I), phi_2(x_{I^c})) on pA_1 x A_2 x ... x A_k
/// with axis 1 in I becomes psi = m_{pq}(psi_1, psi_2) on A_1 x ... x A_k, where psi_1
/// extends phi_1 by domain enlargement and psi_2 lifts phi_2 by range enlargement.
inline RankOneExtension extend_rank_one(const MultiMapT& phi, const RankTerm& witness, const FinAbGroup& a1,
                                        std::int64_t p) {
    const std::int64_t q = witness.q;
    detail::check_power_of(q, p, "extend_rank_one");
    if (witness.axes.empty() || witness.axes[0] != 0)
        throw InputError("extend_rank_one: the witness must put axis 1 in I");
    if (!(term_map(witness, phi.domains()) == phi))
        throw InputError("extend_rank_one: witness does not reproduce the map");
    const MultiMapG psi1 = extend_domain(witness.left, a1, p, q);
    const MultiMapG psi2 = extend_range(witness.right, p, q);
    std::vector<FinAbGroup> doms = phi.domains();
    doms[0] = a1;
    RankTerm term{p * q, witness.axes, psi1, psi2};
    MultiMapT psi = term_map(term, doms);
    return {std::move(psi), std::move(term)};
}

/// Checks the domain-enlargement square pointwise on pA_1 x A_2 x ... x A_k:
/// psi(incl(x_1), x_rest) = p * phi(x) in Z/(pq).
inline VerifyResult verify_domain_extension(const MultiMapG& phi, const MultiMapG& psi, const FinAbGroup& a1,
                                            std::int64_t p, const EngineOptions& opt = {}) {
    const Subgroup pa = times_p_subgroup(a1, p);
    detail::check_budget("verify_domain_extension", phi.domain_size(), opt.budget);
    PointEvaluator ev_phi(phi.residues().at(0)), ev_psi(psi.residues().at(0));
    const std::int64_t pq = psi.codomain().factor(0);
    VerifyResult r;
    std::vector<GroupElement> y;
    for_each_point(phi.domains(), [&](const std::vector<GroupElement>& x) {
        if (!r.ok) return;
        y = x;
        y[0] = apply(pa.inclusion, x[0]);
        const std::int64_t lhs = ev_psi(y), rhs = mulmod(p, ev_phi(x), pq);
        if (lhs != rhs) {
            r.ok = false;
            r.witness = x;
            r.expected = std::to_string(rhs);
            r.actual = std::to_string(lhs);
        }
    });
    return r;
}

/// Checks psi mod q = phi pointwise on A_1 x ... x A_k.
inline VerifyResult verify_range_extension(const MultiMapG& phi, const MultiMapG& psi, const EngineOptions& opt = {}) {
    detail::check_budget("verify_range_extension", phi.domain_size(), opt.budget);
    PointEvaluator ev_phi(phi.residues().at(0)), ev_psi(psi.residues().at(0));
    const std::int64_t q = phi.codomain().factor(0);
    VerifyResult r;
    for_each_point(phi.domains(), [&](const std::vector<GroupElement>& x) {
        if (!r.ok) return;
        const std::int64_t lhs = ev_psi(x) % q, rhs = ev_phi(x);
        if (lhs != rhs) {
            r.ok = false;
            r.witness = x;
            r.expected = std::to_string(rhs);
            r.actual = std::to_string(lhs);
        }
    });
    return r;
}

/// Checks psi(incl(x_1), x_rest) = phi(x) pointwise on pA_1 x A_2 x ... x A_k.
inline VerifyResult verify_rank_one_extension(const MultiMapT& phi, const MultiMapT& psi, const FinAbGroup& a1,
                                              std::int64_t p, const EngineOptions& opt = {}) {
    const Subgroup pa = times_p_subgroup(a1, p);
    detail::check_budget("verify_rank_one_extension", phi.domain_size(), opt.budget);
    std::int64_t n = 1;
    for (const auto& v : phi.tensor()) n = checked_lcm(n, to_int64(v.den()));
    for (const auto& v : psi.tensor()) n = checked_lcm(n, to_int64(v.den()));
    PointEvaluator ev_phi(phi.residues(n)), ev_psi(psi.residues(n));
    VerifyResult r;
    std::vector<GroupElement> y;
    for_each_point(phi.domains(), [&](const std::vector<GroupElement>& x) {
        if (!r.ok) return;
        y = x;
        y[0] = apply(pa.inclusion, x[0]);
        const std::int64_t lhs = ev_psi(y), rhs = ev_phi(x);
        if (lhs != rhs) {
            r.ok = false;
            r.witness = x;
            r.expected = TorusValue(rhs, n).str();
            r.actual = TorusValue(lhs, n).str();
        }
    });
    return r;
}

// ---------------------------------------------------------------------------
// One induction step on the exponent

struct InductionResult {
    std::optional<RankCertificate> certificate;  ///< verified against the input when present
    std::vector<std::string> log;
};

namespace detail {

inline std::optional<RankCertificate> induction_step(const MultiMapT& phi, std::int64_t p, std::int64_t max_q,
                                                     std::size_t max_rank, const EngineOptions& opt,
                                                     std::vector<std::string>& log) {
    const std::size_t k = phi.arity();
    std::size_t axis = k;
    for (std::size_t i = 0; i < k; ++i)
        if (phi.domain(i).exponent() > p) {
            axis = i;
            break;
        }
    if (axis == k) {
        log.push_back("p=" + std::to_string(p) + ": elementary abelian, direct search");
        return search_decomposition(phi, max_q, max_rank, opt);
    }
    std::vector<std::size_t> order{axis};
    for (std::size_t i = 0; i < k; ++i)
        if (i != axis) order.push_back(i);
    const MultiMapT f = permute_axes(phi, order);
    const FinAbGroup a1 = f.domain(0);
    log.push_back("p=" + std::to_string(p) + ": inducting on axis " + std::to_string(axis + 1) + " (" + a1.str() + ")");

    // Restrict to pA_1 x A_2 x ... x A_k, then pass to pA_1 x A_2/A_2[p] x ... .
    const Subgroup pa = times_p_subgroup(a1, p);
    std::vector<GroupHom> restrict_homs{pa.inclusion};
    for (std::size_t i = 1; i < k; ++i) restrict_homs.push_back(identity_hom(f.domain(i)));
    MultiMapT f1 = restrict_subgroups(f, restrict_homs);
    std::vector<GroupHom> proj{identity_hom(pa.group)};
    for (std::size_t i = 1; i < k; ++i) {
        const Quotient qt = quotient(f.domain(i), p_torsion(f.domain(i), p).inclusion.images);
        f1 = substitute_axis(f1, i, qt.group, qt.lifts);
        proj.push_back(qt.projection);
    }
    log.push_back("  restricted map on " + pa.group.str() + " x quotients by p-torsion");
    const auto c1 = search_decomposition(f1, max_q, max_rank, opt);
    if (!c1) {
        log.push_back("  no certificate for the restricted map within the bounds");
        return std::nullopt;
    }
    log.push_back("  restricted map has a rank-" + std::to_string(c1->rank()) + " certificate");

    // Pull back to pA_1 x A_2 x ... x A_k, extend each term to A_1 x ... x A_k, subtract.
    std::vector<FinAbGroup> sub_domains = f.domains();
    sub_domains[0] = pa.group;
    RankCertificate out;
    MultiMapT rest = f;
    for (const auto& t0 : pullback_certificate(*c1, proj).terms) {
        const RankTerm t = t0.axes[0] == 0 ? t0 : swap_sides(t0, k);
        const auto ext = extend_rank_one(term_map(t, sub_domains), t, a1, p);
        log.push_back("  extended a term through m_" + std::to_string(t.q) + " to m_" + std::to_string(ext.term.q));
        rest = subtract(rest, ext.map);
        out.terms.push_back(ext.term);
    }

    // The remainder vanishes on pA_1, so it lives on A_1/pA_1 x A_2 x ... x A_k.
    if (!restrict_subgroups(rest, restrict_homs).is_zero())
        throw Error("induction step: remainder does not vanish on pA_1");
    const Quotient q1 = quotient(a1, pa.inclusion.images);
    const MultiMapT f2 = substitute_axis(rest, 0, q1.group, q1.lifts);
    log.push_back("  remainder passes to " + q1.group.str() + " on axis " + std::to_string(axis + 1));
    const auto c2 = search_decomposition(f2, max_q, max_rank, opt);
    if (!c2) {
        log.push_back("  no certificate for the remainder within the bounds");
        return std::nullopt;
    }
    log.push_back("  remainder has a rank-" + std::to_string(c2->rank()) + " certificate");
    std::vector<GroupHom> back{q1.projection};
    for (std::size_t i = 1; i < k; ++i) back.push_back(identity_hom(f.domain(i)));
    for (auto& t : pullback_certificate(*c2, back).terms) out.terms.push_back(std::move(t));
    return unpermute_certificate(out, order);
}

}  // namespace detail

/// Runs one step of the induction on exponents for each primary part: restrict to pA_1,
/// search, extend the terms, and search again on A_1/pA_1 for the remainder. Elementary
/// abelian parts go straight to search. The combined certificate is verified before it is
/// returned.
inline InductionResult induction_decompose(const MultiMapT& phi, std::int64_t max_q, std::size_t max_rank,
                                           const EngineOptions& opt = {}) {
    InductionResult res;
    RankCertificate cert;
    for (const auto& part : primary_split(phi)) {
        if (part.zero) {
            res.log.push_back("p=" + std::to_string(part.prime) + ": zero part");
            continue;
        }
        const auto c = detail::induction_step(part.map, part.prime, max_q, max_rank, opt, res.log);
        if (!c) return res;
        std::vector<GroupHom> proj;
        for (const auto& comp : part.components) proj.push_back(comp.projection);
        for (auto& t : pullback_certificate(*c, proj).terms) cert.terms.push_back(std::move(t));
    }
    const auto v = verify_certificate(phi, cert, opt);
    if (!v) throw Error("induction_decompose: assembled certificate fails to verify: " + v.message());
    res.log.push_back("assembled certificate of rank " + std::to_string(cert.rank()) + " verifies");
    res.certificate = std::move(cert);
    return res;
}

// ---------------------------------------------------------------------------
// Crush form

/// One summand G_I(g_I(x_I), x_{[k-1] \ I}).
struct CrushTerm {
    Axes axes;    ///< I, a nonempty subset of the k-1 axes of F
    MultiMapG g;  ///< A_I -> C_I
    MultiMapG G;  ///< C_I x A_{[k-1] \ I} -> B
};

struct CrushDecomposition {
    std::vector<CrushTerm> terms;  ///< sorted by I, one per I
};

/// Sum over terms of G_I(g_I(x_I), x_rest) as a map A_1 x ... x A_{k-1} -> B.
inline MultiMapG crush_sum(const CrushDecomposition& d, const std::vector<FinAbGroup>& domains, const FinAbGroup& b) {
    const std::size_t k1 = domains.size();
    const auto dims = detail::dims_of(domains);
    std::vector<GroupElement> t(tensor::volume(dims), zero_element(b));
    for (const auto& term : d.terms) {
        detail::check_axes(term.axes, k1);
        if (term.axes.empty()) throw InputError("crush term with empty I");
        const Axes rest = detail::complement(term.axes, k1);
        if (!(term.g.domains() == detail::select(domains, term.axes)))
            throw InputError("crush term I={" + axes_str(term.axes) + "}: g has the wrong domains");
        const FinAbGroup& c = term.g.codomain();
        std::vector<FinAbGroup> gdom{c};
        for (auto a : rest) gdom.push_back(domains[a]);
        if (!(term.G.domains() == gdom) || !(term.G.codomain() == b))
            throw InputError("crush term I={" + axes_str(term.axes) + "}: G must map C_I x A_rest to B");
        tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
            std::vector<std::size_t> mi, mg{0};
            for (auto a : term.axes) mi.push_back(m[a]);
            for (auto a : rest) mg.push_back(m[a]);
            const GroupElement& u = term.g.entry(mi);
            GroupElement& out = t[tensor::flatten(m, dims)];
            for (std::size_t cc = 0; cc < c.rank(); ++cc) {
                if (!u.coords[cc]) continue;
                mg[0] = cc;
                out = add(b, out, scale(b, term.G.entry(mg), u.coords[cc]));
            }
        });
    }
    return MultiMapG(domains, b, std::move(t));
}

struct CrushVerifyResult {
    bool ok = true;
    std::vector<GroupElement> witness;
    std::string expected, actual;
    explicit operator bool() const noexcept { return ok; }
    std::string message() const {
        if (ok) return "ok";
        return "mismatch at " + detail::point_str(witness) + ": expected " + expected + ", got " + actual;
    }
};

/// Checks sum_I G_I(g_I(x_I), x_rest) = F; on failure reports the first differing point.
inline CrushVerifyResult verify_crush(const MultiMapG& f, const CrushDecomposition& d, const EngineOptions& opt = {}) {
    const MultiMapG s = crush_sum(d, f.domains(), f.codomain());
    CrushVerifyResult r;
    if (s == f) return r;
    r.ok = false;
    // The pairing with the dual turns the difference into a torus-valued map whose zero
    // set is the agreement set.
    bool exhaustive = false;
    r.witness = detail::first_nonzero_point(from_group_map(add(f, negate(s))), opt.budget, exhaustive);
    r.witness.pop_back();  // drop the character
    r.expected = to_string(evaluate(f, r.witness));
    r.actual = to_string(evaluate(s, r.witness));
    return r;
}

/// Rewrites a certificate for phi(x, chi) = <chi, F(x)> (dual axis last) as
/// F(x) = sum_I G_I(g_I(x_I), x_rest). Each term is first arranged so the dual axis lies in
/// I^c; then g = left and G(u, y) = u b(y), where <chi, b(y)> = right(y, chi)/q. Terms
/// sharing I are merged through the product of their codomains.
inline CrushDecomposition crush_decomposition(const MultiMapG& f, const RankCertificate& cert,
                                              const EngineOptions& opt = {}) {
    const MultiMapT phi = from_group_map(f);
    const auto v = verify_certificate(phi, cert, opt);
    if (!v) throw PreconditionViolation("crush_decomposition: certificate does not verify", detail::point_str(v.witness));
    const std::size_t k = phi.arity();
    const std::size_t dual = k - 1;
    const FinAbGroup& b = f.codomain();

    struct Piece {
        std::int64_t q;
        MultiMapG g;  // A_I -> Z/q
        MultiMapG G;  // Z/q x A_rest -> B
    };
    std::map<Axes, std::vector<Piece>> by_axes;
    for (const auto& t0 : cert.terms) {
        const RankTerm t = std::binary_search(t0.axes.begin(), t0.axes.end(), dual) ? swap_sides(t0, k) : t0;
        const Axes rest = detail::complement(t.axes, dual);  // [k-1] \ I
        // right is defined on A_rest x B^; its entries over Z/q give b(y) in B.
        const FinAbGroup zq = cyclic_group(t.q);
        std::vector<FinAbGroup> gdom{zq};
        for (auto a : rest) gdom.push_back(f.domain(a));
        const auto rdims = t.right.dims();
        const auto gdims = detail::dims_of(gdom);
        std::vector<GroupElement> gt(tensor::volume(gdims), zero_element(b));
        tensor::for_each_index(gdims, [&](const std::vector<std::size_t>& m) {
            if (m[0] != 0 || gdom[0].rank() == 0) return;
            GroupElement& y = gt[tensor::flatten(m, gdims)];
            std::vector<std::size_t> src(m.begin() + 1, m.end());
            src.push_back(0);
            for (std::size_t c = 0; c < b.rank(); ++c) {
                src.back() = c;
                const std::int64_t val = t.right.tensor()[tensor::flatten(src, rdims)].coords[0];
                // <e_c, b> = val / q  =>  b_c = val * f_c / q
                y.coords[c] = to_int64(to_integer(val) * to_integer(b.factor(c)) / to_integer(t.q));
            }
        });
        by_axes[t.axes].push_back({t.q, t.left, MultiMapG(std::move(gdom), b, std::move(gt))});
    }

    CrushDecomposition out;
    for (auto& [axes, pieces] : by_axes) {
        const Axes rest = detail::complement(axes, dual);
        std::vector<std::size_t> perm(pieces.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t x, std::size_t y) { return detail::factor_less(pieces[x].q, pieces[y].q); });
        std::vector<std::int64_t> orders;
        for (auto j : perm) orders.push_back(pieces[j].q);
        const FinAbGroup c = FinAbGroup::from_canonical(orders);

        // g = (g_1, ..., g_n) into C = prod Z/q_j; G = sum_j G_j o (pi_j x id).
        const auto gd = pieces[0].g.dims();
        std::vector<GroupElement> gt(tensor::volume(gd), zero_element(c));
        for (std::size_t cc = 0; cc < perm.size(); ++cc)
            for (std::size_t e = 0; e < gt.size(); ++e) gt[e].coords[cc] = pieces[perm[cc]].g.tensor()[e].coords[0];
        std::vector<FinAbGroup> gdom{c};
        for (auto a : rest) gdom.push_back(f.domain(a));
        const auto Gd = detail::dims_of(gdom);
        std::vector<GroupElement> Gt(tensor::volume(Gd), zero_element(b));
        tensor::for_each_index(Gd, [&](const std::vector<std::size_t>& m) {
            std::vector<std::size_t> src = m;
            src[0] = 0;
            const auto& piece = pieces[perm[m[0]]];
            Gt[tensor::flatten(m, Gd)] = piece.G.tensor()[tensor::flatten(src, piece.G.dims())];
        });
        out.terms.push_back({axes, MultiMapG(pieces[0].g.domains(), c, std::move(gt)),
                             MultiMapG(std::move(gdom), b, std::move(Gt))});
    }
    return out;
}

}  // namespace abelbias
