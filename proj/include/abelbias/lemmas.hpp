#pragma once

// Seeded property batteries over random instances: the bias lemmas on multilinear maps,
// the main-term inequality on multiaffine maps, and the extension algorithms.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "bias.hpp"
#include "random.hpp"
#include "structure.hpp"

namespace abelbias {

struct LemmaTally {
    std::string name;
    std::int64_t trials = 0;
    std::int64_t passed = 0;
    std::vector<std::string> failures;  ///< one witness per failed trial

    void record(bool ok, const std::string& witness) {
        ++trials;
        if (ok)
            ++passed;
        else
            failures.push_back(witness);
    }
};

struct BatteryOptions {
    std::int64_t trials = 100;
    std::uint64_t seed = 1;
    std::int64_t max_order = 16;  ///< bound on each |A_i|
    std::size_t max_k = 3;
    EngineOptions engine{};
};

struct LemmaReport {
    std::vector<LemmaTally> tallies;

    void add(std::string name) {
        tallies.emplace_back();
        tallies.back().name = std::move(name);
    }
    bool all_passed() const {
        for (const auto& t : tallies)
            if (t.passed != t.trials) return false;
        return true;
    }
    const LemmaTally& at(const std::string& name) const {
        for (const auto& t : tallies)
            if (t.name == name) return t;
        throw InputError("no lemma named " + name);
    }
};

namespace detail {

/// Half the time all domains are p-groups for one small p, so that maps are rarely forced
/// to vanish by coprime orders.
inline std::vector<FinAbGroup> random_domains(Rng& rng, std::size_t k, std::int64_t max_order) {
    std::vector<FinAbGroup> d;
    const bool primary = max_order >= 2 && rng.coin();
    const std::int64_t p = max_order >= 3 && rng.coin() ? 3 : 2;
    for (std::size_t i = 0; i < k; ++i)
        d.push_back(primary ? random_p_group(rng, p, max_order) : random_group(rng, max_order));
    return d;
}

inline Axes random_subset(Rng& rng, std::size_t k) {
    Axes a;
    for (std::size_t i = 0; i < k; ++i)
        if (rng.coin()) a.push_back(i);
    return a;
}

inline Partition random_partition(Rng& rng, std::size_t k) {
    std::vector<std::size_t> label(k);
    std::size_t blocks = 0;
    for (std::size_t i = 0; i < k; ++i) {
        label[i] = static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(blocks + 1)));
        if (label[i] == blocks) ++blocks;
    }
    Partition p;
    p.blocks.resize(blocks);
    for (std::size_t i = 0; i < k; ++i) p.blocks[label[i]].push_back(i);
    return p;
}

inline std::int64_t random_prime_power(Rng& rng, std::int64_t max_q) {
    return rng.pick(prime_powers_up_to(std::max<std::int64_t>(2, max_q)));
}

template <class Check>
void guarded(LemmaTally& t, const std::string& context, Check&& check) {
    try {
        const CheckResult r = check();
        t.record(r.holds, r.witness);
    } catch (const Error& e) {
        t.record(false, context + ": " + e.what());
    }
}

}  // namespace detail

/// The multilinear lemma battery. Each trial draws k <= max_k, domains with |A_i| <= max_order
/// and a random map, then runs every check on it.
inline LemmaReport run_lemma_battery(const BatteryOptions& o) {
    Rng rng(o.seed);
    const EngineOptions& e = o.engine;
    LemmaReport rep;
    for (const char* n : {"recursion", "trivial-bounds", "subadditivity", "factoring", "certificate-bound",
                          "restriction", "exponent-bound", "multiplicativity", "group-map-zero"})
        rep.add(n);
    auto tally = [&](std::size_t i) -> LemmaTally& { return rep.tallies[i]; };

    for (std::int64_t trial = 0; trial < o.trials; ++trial) {
        const std::string ctx = "trial " + std::to_string(trial);
        const std::size_t k = 1 + static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(o.max_k)));
        const auto doms = detail::random_domains(rng, k, o.max_order);
        const MultiMapT phi = random_map(rng, doms);

        Axes fixed = detail::random_subset(rng, k);
        if (fixed.size() == k) fixed.pop_back();
        detail::guarded(tally(0), ctx, [&] { return bias_recursion_check(phi, fixed, e); });

        detail::guarded(tally(1), ctx, [&] { return trivial_bounds_check(phi, e); });

        const MultiMapT psi = random_map(rng, doms);
        detail::guarded(tally(2), ctx, [&] { return subadditivity_check(phi, psi, e); });

        {
            const Partition part = detail::random_partition(rng, k);
            std::vector<FinAbGroup> inner;
            std::vector<MultiMapG> factors;
            for (const auto& blk : part.blocks) {
                inner.push_back(random_group(rng, o.max_order));
                factors.push_back(random_map(rng, detail::select(doms, blk), inner.back()));
            }
            const MultiMapT outer = random_map(rng, inner);
            detail::guarded(tally(3), ctx, [&] { return factor_check(outer, part, factors, doms, e); });
        }

        if (k >= 2) {
            RankCertificate cert;
            const auto r = 1 + rng.below(2);
            for (std::int64_t t = 0; t < r; ++t) {
                const std::int64_t q = detail::random_prime_power(rng, o.max_order);
                Axes axes;
                while (axes.empty() || axes.size() == k) axes = detail::random_subset(rng, k);
                const Axes rest = detail::complement(axes, k);
                const FinAbGroup zq = cyclic_group(q);
                cert.terms.push_back({q, axes, random_map(rng, detail::select(doms, axes), zq),
                                      random_map(rng, detail::select(doms, rest), zq)});
            }
            detail::guarded(tally(4), ctx, [&] {
                const MultiMapT sum = certificate_sum(cert, doms);
                return detail::check_ge(bias(sum, e), certificate_bias_bound(cert), describe(sum));
            });
        }

        {
            std::vector<GroupHom> homs;
            for (const auto& a : doms) {
                const Subgroup s = cyclic_subgroup(a, element_at(a, rng.below(a.order())));
                homs.push_back(s.inclusion);
            }
            detail::guarded(tally(5), ctx, [&] { return restriction_check(phi, homs, e); });
        }

        if (k >= 2 && !phi.is_zero()) detail::guarded(tally(6), ctx, [&] { return exponent_bound_check(phi, e); });

        detail::guarded(tally(7), ctx, [&] { return multiplicativity_check(phi, e); });

        {
            const std::size_t kf = std::max<std::size_t>(1, k - 1);
            const auto fdoms = detail::random_domains(rng, kf, o.max_order);
            const MultiMapG f = random_map(rng, fdoms, random_group(rng, o.max_order));
            detail::guarded(tally(8), ctx, [&] { return group_map_check(f, e); });
        }
    }
    return rep;
}

/// |bias(phi)| <= bias(phi_J) over random multiaffine maps with every term strictly above J
/// removed.
inline LemmaReport run_main_term_battery(const BatteryOptions& o) {
    Rng rng(o.seed);
    LemmaReport rep;
    rep.add("main-term");
    for (std::int64_t trial = 0; trial < o.trials; ++trial) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(o.max_k)));
        const auto doms = detail::random_domains(rng, k, o.max_order);
        Axes j;
        while (j.empty()) j = detail::random_subset(rng, k);
        const MultiAffine raw = random_multiaffine(rng, doms, k);
        std::vector<MultiAffine::Term> terms;
        for (const auto& t : raw.terms())
            if (!(t.axes.size() > j.size() && std::includes(t.axes.begin(), t.axes.end(), j.begin(), j.end())))
                terms.push_back(t);
        // make phi_J nonzero more often than chance
        if (std::none_of(terms.begin(), terms.end(), [&](const MultiAffine::Term& t) { return t.axes == j; }))
            terms.push_back({j, random_map(rng, detail::select(doms, j))});
        const MultiAffine phi(doms, std::move(terms));
        detail::guarded(rep.tallies[0], "trial " + std::to_string(trial),
                        [&] { return main_term_check(phi, j, o.engine); });
    }
    return rep;
}

/// The three extension algorithms on random admissible p-group inputs. Each output is
/// recomputed and compared for bit-identity.
inline LemmaReport run_extension_battery(const BatteryOptions& o) {
    Rng rng(o.seed);
    LemmaReport rep;
    for (const char* n : {"extend-domain", "extend-range", "extend-rank-one", "lift-determinism"})
        rep.add(n);

    auto pick_p = [&] {
        const bool three_ok = o.max_order >= 9;
        return three_ok && rng.coin() ? std::int64_t{3} : std::int64_t{2};
    };
    auto to_vr = [](const VerifyResult& v) {
        CheckResult c;
        c.holds = v.ok;
        if (!v.ok) c.witness = v.message();
        return c;
    };

    for (std::int64_t trial = 0; trial < o.trials; ++trial) {
        const std::string ctx = "trial " + std::to_string(trial);
        const std::int64_t p = pick_p();
        const std::int64_t q = rng.coin() ? p : p * p;
        const std::size_t k = 1 + static_cast<std::size_t>(rng.below(static_cast<std::int64_t>(o.max_k)));
        FinAbGroup a1 = random_p_group(rng, p, o.max_order);
        while (a1.exponent() == p) a1 = random_p_group(rng, p, o.max_order);
        std::vector<FinAbGroup> doms{a1};
        for (std::size_t i = 1; i < k; ++i) doms.push_back(random_p_group(rng, p, o.max_order));
        const FinAbGroup zq = cyclic_group(q);
        const Subgroup pa = times_p_subgroup(a1, p);
        std::vector<FinAbGroup> sub = doms;
        sub[0] = pa.group;
        Axes rest;
        for (std::size_t i = 1; i < k; ++i) rest.push_back(i);
        Axes all(k);
        std::iota(all.begin(), all.end(), std::size_t{0});

        bool same = true;
        detail::guarded(rep.tallies[0], ctx, [&] {
            const MultiMapG phi = random_torsion_free_map(rng, sub, zq, p, rest);
            const MultiMapG psi = extend_domain(phi, a1, p, q);
            same = same && extend_domain(phi, a1, p, q) == psi;
            return to_vr(verify_domain_extension(phi, psi, a1, p, o.engine));
        });
        detail::guarded(rep.tallies[1], ctx, [&] {
            const MultiMapG phi = random_torsion_free_map(rng, doms, zq, p, all);
            const MultiMapG psi = extend_range(phi, p, q);
            same = same && extend_range(phi, p, q) == psi;
            return to_vr(verify_range_extension(phi, psi, o.engine));
        });
        if (k >= 2) {
            detail::guarded(rep.tallies[2], ctx, [&] {
                Axes i{0};
                for (std::size_t a = 1; a + 1 < k; ++a)
                    if (rng.coin()) i.push_back(a);
                const Axes ic = detail::complement(i, k);
                Axes left_rest;
                for (std::size_t a = 1; a < i.size(); ++a) left_rest.push_back(a);
                Axes right_all(ic.size());
                std::iota(right_all.begin(), right_all.end(), std::size_t{0});
                RankTerm w{q, i, random_torsion_free_map(rng, detail::select(sub, i), zq, p, left_rest),
                           random_torsion_free_map(rng, detail::select(sub, ic), zq, p, right_all)};
                const MultiMapT phi = term_map(w, sub);
                const RankOneExtension ext = extend_rank_one(phi, w, a1, p);
                same = same && extend_rank_one(phi, w, a1, p).map == ext.map;
                return to_vr(verify_rank_one_extension(phi, ext.map, a1, p, o.engine));
            });
        }
        rep.tallies[3].record(same, ctx + ": repeated extension differs");
    }
    return rep;
}

/// `name passed/trials` per tally, then one line per failure.
inline void write_lemma_report(std::ostream& os, const LemmaReport& r) {
    for (const auto& t : r.tallies) os << t.name << ' ' << t.passed << '/' << t.trials << '\n';
    for (const auto& t : r.tallies)
        for (const auto& f : t.failures) os << "FAIL " << t.name << ": " << f << '\n';
}

}  // namespace abelbias
