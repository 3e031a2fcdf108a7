#include <gtest/gtest.h>

#include <set>

#include "oracle.hpp"

using namespace abelbias;

namespace {

const FinAbGroup Z2 = cyclic_group(2);
const FinAbGroup Z3 = cyclic_group(3);
const FinAbGroup Z4 = cyclic_group(4);

GroupElement el(std::initializer_list<std::int64_t> c) { return GroupElement{std::vector<std::int64_t>(c)}; }

TorusValue ev(const MultiMapT& phi, std::vector<GroupElement> x) { return evaluate(phi, x); }

void expect_pointwise_equal(const MultiMapT& a, const MultiMapT& b) {
    ASSERT_EQ(a.domains(), b.domains());
    for (const auto& x : oracle::points(a.domains()))
        EXPECT_EQ(oracle::value(a, x), oracle::value(b, x)) << detail::point_str(x);
}

}  // namespace

TEST(Maps, EvaluateMq) {
    const MultiMapT m4 = m_q(4);
    EXPECT_EQ(ev(m4, {el({1}), el({1})}), TorusValue(1, 4));
    EXPECT_EQ(ev(m4, {el({2}), el({3})}), TorusValue(1, 2));
    EXPECT_EQ(ev(m4, {el({0}), el({3})}), TorusValue());
    EXPECT_EQ(m_q(2).tensor(), std::vector<TorusValue>{TorusValue(1, 2)});
    EXPECT_EQ(m_q(9).tensor(), std::vector<TorusValue>{TorusValue(1, 9)});
    EXPECT_THROW(m_q(6), InputError);
}

TEST(Maps, EvaluateAgreesWithOracleOnRandomMaps) {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        std::vector<FinAbGroup> doms;
        for (std::int64_t i = 0; i < 1 + rng.below(3); ++i) doms.push_back(random_group(rng, 12));
        const MultiMapT phi = random_map(rng, doms);
        const auto pts = oracle::points(doms);
        for (int s = 0; s < 20; ++s) {
            const auto& x = rng.pick(pts);
            EXPECT_EQ(evaluate(phi, x).to_fraction(), oracle::value(phi, x));
        }
    }
}

TEST(Maps, ZeroCoordinateGivesZero) {
    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
        const std::vector<FinAbGroup> doms{random_group(rng, 16), random_group(rng, 16), random_group(rng, 8)};
        const MultiMapT phi = random_map(rng, doms);
        for (auto x : oracle::points(doms)) {
            const std::size_t i = static_cast<std::size_t>(rng.below(3));
            x[i] = zero_element(doms[i]);
            EXPECT_TRUE(evaluate(phi, x).is_zero());
            break;
        }
    }
}

TEST(Maps, RestrictFix) {
    EXPECT_TRUE(restrict_fix(m_q(4), {0}, {el({0})}).is_zero());
    const MultiMapT half = restrict_fix(m_q(4), {0}, {el({2})});
    for (std::int64_t y = 0; y < 4; ++y) EXPECT_EQ(ev(half, {el({y})}), TorusValue(y, 2));
    const MultiMapT xyz({Z2, Z2, Z2}, {TorusValue(1, 2)});
    expect_pointwise_equal(restrict_fix(xyz, {2}, {el({1})}), m_q(2));
}

TEST(Maps, RestrictFixMatchesMergedEvaluation) {
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        const std::vector<FinAbGroup> doms{random_group(rng, 12), random_group(rng, 12), random_group(rng, 12)};
        const MultiMapT phi = random_map(rng, doms);
        const Axes fixed{static_cast<std::size_t>(rng.below(3))};
        const GroupElement a = element_at(doms[fixed[0]], rng.below(doms[fixed[0]].order()));
        const MultiMapT r = restrict_fix(phi, fixed, {a});
        for (auto x : oracle::points(r.domains())) {
            auto full = x;
            full.insert(full.begin() + static_cast<std::ptrdiff_t>(fixed[0]), a);
            EXPECT_EQ(oracle::value(r, x), oracle::value(phi, full));
        }
    }
}

TEST(Maps, RestrictSubgroups) {
    const Subgroup twice = times_p_subgroup(Z4, 2);
    const MultiMapT r = restrict_subgroups(m_q(4), {twice.inclusion, identity_hom(Z4)});
    EXPECT_EQ(r.domains(), (std::vector<FinAbGroup>{Z2, Z4}));
    EXPECT_EQ(r.tensor(), std::vector<TorusValue>{TorusValue(1, 2)});
    for (const auto& x : oracle::points(r.domains()))
        EXPECT_EQ(oracle::value(r, x), oracle::value(m_q(4), {apply(twice.inclusion, x[0]), x[1]}));
    const Subgroup triv = cyclic_subgroup(Z4, el({0}));
    EXPECT_TRUE(restrict_subgroups(m_q(4), {triv.inclusion, identity_hom(Z4)}).is_zero());
    expect_pointwise_equal(restrict_subgroups(m_q(4), {identity_hom(Z4), identity_hom(Z4)}), m_q(4));
}

TEST(Maps, KernelSubgroup) {
    EXPECT_EQ(kernel_subgroup(m_q(4), 0).size(), 1u);
    const MultiMapT two_xy({Z4, Z4}, {TorusValue(2, 4)});
    const auto k = kernel_subgroup(two_xy, 0);
    ASSERT_EQ(k.size(), 2u);
    EXPECT_EQ(k[1].coords, (std::vector<std::int64_t>{2}));
    EXPECT_EQ(kernel_subgroup(MultiMapT::zero({Z4, Z3}), 1).size(), 3u);
}

TEST(Maps, KernelSubgroupMatchesDefinition) {
    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
        const std::vector<FinAbGroup> doms{random_group(rng, 16), random_group(rng, 16)};
        const MultiMapT phi = random_map(rng, doms);
        std::set<std::vector<std::int64_t>> lit;
        for (const auto& a : oracle::elements(doms[0])) {
            bool z = true;
            for (const auto& y : oracle::elements(doms[1])) z = z && oracle::value(phi, {a, y}) == 0;
            if (z) lit.insert(a.coords);
        }
        std::set<std::vector<std::int64_t>> got;
        for (const auto& a : kernel_subgroup(phi, 0)) got.insert(a.coords);
        EXPECT_EQ(got, lit);
    }
}

TEST(Maps, NondegenerateReduction) {
    const MultiMapT two_xy({Z4, Z4}, {TorusValue(2, 4)});
    const auto red = nondegenerate_reduction(two_xy);
    expect_pointwise_equal(red.map, m_q(2));
    for (const auto& x : oracle::points(two_xy.domains()))
        EXPECT_EQ(oracle::value(two_xy, x),
                  oracle::value(red.map, {apply(red.projections[0], x[0]), apply(red.projections[1], x[1])}));
    const auto z = nondegenerate_reduction(MultiMapT::zero({Z4, Z3}));
    for (const auto& g : z.map.domains()) EXPECT_TRUE(g.is_trivial());
    EXPECT_EQ(nondegenerate_reduction(m_q(4)).map, m_q(4));
}

TEST(Maps, PrimarySplitSumsBack) {
    // xy/6 on (Z/6)^2 in the canonical basis (3, 2) of Z/2 + Z/3
    const FinAbGroup z6 = cyclic_group(6);
    const MultiMapT phi({z6, z6}, {TorusValue(1, 2), TorusValue(), TorusValue(), TorusValue(2, 3)});
    const auto parts = primary_split(phi);
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0].prime, 2);
    EXPECT_EQ(parts[0].map.tensor(), std::vector<TorusValue>{TorusValue(1, 2)});
    EXPECT_EQ(parts[1].prime, 3);
    EXPECT_FALSE(parts[1].zero);
    for (const auto& x : oracle::points(phi.domains())) {
        Fraction s = 0;
        for (const auto& part : parts)
            s += oracle::value(part.map, {apply(part.components[0].projection, x[0]),
                                          apply(part.components[1].projection, x[1])});
        EXPECT_EQ(TorusValue(s), TorusValue(oracle::value(phi, x)));
    }
    const auto zp = primary_split(MultiMapT::zero({z6, z6}));
    for (const auto& part : zp) EXPECT_TRUE(part.zero);
    EXPECT_EQ(primary_split(m_q(8)).size(), 1u);
}

TEST(Maps, ComposeThrough) {
    const MultiMapG id2({Z2}, Z2, {el({1})});
    expect_pointwise_equal(compose_through(m_q(2), Partition{{{0}, {1}}}, {id2, id2}, {Z2, Z2}), m_q(2));
    const MultiMapG mult({Z2, Z2}, Z2, {el({1})});
    const MultiMapT xyz({Z2, Z2, Z2}, {TorusValue(1, 2)});
    expect_pointwise_equal(compose_through(m_q(2), Partition{{{0, 1}, {2}}}, {mult, id2}, {Z2, Z2, Z2}), xyz);
    EXPECT_TRUE(compose_through(m_q(2), Partition{{{0}, {1}}}, {MultiMapG::zero({Z2}, Z2), id2}, {Z2, Z2}).is_zero());
}

TEST(Maps, GroupMapDuality) {
    const MultiMapG id4({Z4}, Z4, {el({1})});
    EXPECT_EQ(from_group_map(id4), m_q(4));
    EXPECT_TRUE(from_group_map(MultiMapG::zero({Z4}, Z2)).is_zero());
    const MultiMapG f({Z4, Z4}, Z4, {el({2})});
    const MultiMapT phi = from_group_map(f);
    for (const auto& x : oracle::points(phi.domains()))
        EXPECT_EQ(oracle::value(phi, x), make_fraction(2 * x[0].coords[0] * x[1].coords[0] * x[2].coords[0] % 4, 4));
    const MultiMapG back = to_group_map(phi);
    for (const auto& x : oracle::points(f.domains())) EXPECT_EQ(evaluate(back, x), evaluate(f, x));
}

TEST(Maps, GroupMapDualityRoundtripsRandomly) {
    Rng rng(12);
    for (int t = 0; t < 200; ++t) {
        const std::vector<FinAbGroup> doms{random_group(rng, 12), random_group(rng, 12)};
        const MultiMapG f = random_map(rng, doms, random_group(rng, 12));
        EXPECT_EQ(to_group_map(from_group_map(f)), f);
    }
}

TEST(Maps, AdditionIsPointwise) {
    Rng rng(13);
    for (int t = 0; t < 100; ++t) {
        const std::vector<FinAbGroup> doms{random_group(rng, 9), random_group(rng, 9)};
        const MultiMapT a = random_map(rng, doms), b = random_map(rng, doms);
        const MultiMapT s = add(a, b);
        for (const auto& x : oracle::points(doms))
            EXPECT_EQ(TorusValue(oracle::value(s, x)), TorusValue(oracle::value(a, x) + oracle::value(b, x)));
        EXPECT_TRUE(add(a, negate(a)).is_zero());
    }
}

TEST(Maps, RejectsInadmissibleEntries) {
    EXPECT_THROW(MultiMapT({Z2, Z2}, {TorusValue(1, 3)}), InputError);
    EXPECT_THROW(MultiMapT({Z2, Z4}, {TorusValue(1, 4)}), InputError);
    EXPECT_NO_THROW(MultiMapT({Z4, Z4}, {TorusValue(1, 4)}));
}

TEST(Maps, MultiAffineEvaluation) {
    Rng rng(14);
    for (int t = 0; t < 100; ++t) {
        const std::vector<FinAbGroup> doms{random_group(rng, 9), random_group(rng, 9), random_group(rng, 9)};
        const MultiAffine phi = random_multiaffine(rng, doms, 2);
        EXPECT_LE(phi.degree(), 2u);
        for (const auto& x : oracle::points(doms)) EXPECT_EQ(evaluate(phi, x).to_fraction(), oracle::value(phi, x));
    }
}

TEST(Random, MapsAreAdmissibleAndDeterministic) {
    Rng a(99), b(99);
    for (int t = 0; t < 50; ++t) {
        const auto ga = random_group(a, 32);
        EXPECT_EQ(ga, random_group(b, 32));
        EXPECT_EQ(random_map(a, {ga, ga}), random_map(b, {ga, ga}));
    }
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng r(seed);
        seen.insert(describe(random_map(r, {Z2, Z2})));
    }
    EXPECT_EQ(seen.size(), 2u);
    Rng r(1);
    EXPECT_TRUE(random_map(r, {cyclic_group(1), Z4}).is_zero());
}

TEST(Random, TorsionFreeMapsVanishOnTorsion) {
    Rng rng(15);
    for (int t = 0; t < 100; ++t) {
        const std::vector<FinAbGroup> doms{random_p_group(rng, 2, 32), random_p_group(rng, 2, 16)};
        const MultiMapG f = random_torsion_free_map(rng, doms, cyclic_group(4), 2, {0});
        const auto tors = p_torsion(doms[0], 2);
        for (const auto& a : oracle::elements(tors.group))
            for (const auto& y : oracle::elements(doms[1]))
                EXPECT_TRUE(is_zero(evaluate(f, {apply(tors.inclusion, a), y})));
    }
}
