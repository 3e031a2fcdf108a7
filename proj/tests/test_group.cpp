#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "oracle.hpp"

using namespace abelbias;

namespace {

using Coords = std::vector<std::int64_t>;

std::set<Coords> as_set(const std::vector<GroupElement>& xs) {
    std::set<Coords> s;
    for (const auto& x : xs) s.insert(x.coords);
    return s;
}

std::set<Coords> literal_multiples(const FinAbGroup& a, std::int64_t p) {
    std::set<Coords> s;
    for (const auto& x : oracle::elements(a)) s.insert(scale(a, x, p).coords);
    return s;
}

std::set<Coords> literal_torsion(const FinAbGroup& a, std::int64_t p) {
    std::set<Coords> s;
    for (const auto& x : oracle::elements(a))
        if (is_zero(scale(a, x, p))) s.insert(x.coords);
    return s;
}

}  // namespace

TEST(Group, CanonicalForm) {
    EXPECT_EQ(make_group({6}).factors(), (Coords{2, 3}));
    EXPECT_TRUE(make_group({1}).is_trivial());
    const FinAbGroup g = make_group({4, 6});
    EXPECT_EQ(g.factors(), (Coords{2, 4, 3}));
    EXPECT_EQ(g.order(), 24);
    EXPECT_EQ(g.exponent(), 12);
    EXPECT_EQ(oracle::elements(g).size(), 24u);
    EXPECT_EQ(make_group({12, 2}), make_group({4, 6}));
    EXPECT_THROW(make_group({0}), InputError);
}

TEST(Group, EnumerationOrderIsLexicographic) {
    const auto e = enumerate_elements(make_group({2, 2}));
    ASSERT_EQ(e.size(), 4u);
    EXPECT_EQ(e[0].coords, (Coords{0, 0}));
    EXPECT_EQ(e[1].coords, (Coords{0, 1}));
    EXPECT_EQ(e[2].coords, (Coords{1, 0}));
    EXPECT_EQ(e[3].coords, (Coords{1, 1}));
    const auto t = enumerate_elements(cyclic_group(1));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_TRUE(t[0].coords.empty());
    const FinAbGroup g = make_group({3, 4});
    for (std::int64_t i = 0; i < g.order(); ++i) EXPECT_EQ(index_of(g, element_at(g, i)), i);
}

TEST(Group, PrimaryComponents) {
    const auto c6 = primary_component(cyclic_group(6), 2);
    EXPECT_EQ(c6.group, cyclic_group(2));
    EXPECT_EQ(primary_component(make_group({4, 3}), 3).group, cyclic_group(3));
    EXPECT_TRUE(primary_component(cyclic_group(12), 5).group.is_trivial());
    for (const auto& a : all_groups_up_to(36))
        for (auto p : {2, 3, 5}) {
            const auto c = primary_component(a, p);
            for (const auto& x : oracle::elements(c.group))
                EXPECT_EQ(apply(c.projection, apply(c.embedding, x)), x);
        }
}

TEST(Group, MultiplesAndTorsionMatchEnumeration) {
    EXPECT_EQ(oracle::image_set(times_p_subgroup(cyclic_group(4), 2).inclusion), (std::set<Coords>{{0}, {2}}));
    EXPECT_TRUE(times_p_subgroup(cyclic_group(2), 2).group.is_trivial());
    EXPECT_EQ(times_p_subgroup(make_group({9, 3}), 3).group, cyclic_group(3));
    EXPECT_EQ(p_torsion(make_group({2, 4}), 2).group, make_group({2, 2}));
    EXPECT_TRUE(p_torsion(cyclic_group(3), 2).group.is_trivial());

    for (const auto& a : all_groups_up_to(64))
        for (auto p : {2, 3, 5}) {
            const Subgroup m = times_p_subgroup(a, p);
            const Subgroup t = p_torsion(a, p);
            EXPECT_EQ(oracle::image_set(m.inclusion), literal_multiples(a, p)) << a.factors().size();
            EXPECT_EQ(oracle::image_set(t.inclusion), literal_torsion(a, p));
            EXPECT_EQ(m.group.order() * t.group.order(), a.order());
            // inclusions are injective
            EXPECT_EQ(static_cast<std::int64_t>(oracle::image_set(m.inclusion).size()), m.group.order());
        }
}

TEST(Group, QuotientsCountCosets) {
    const auto q1 = quotient(cyclic_group(4), {GroupElement{{2}}});
    EXPECT_EQ(q1.group, cyclic_group(2));
    const auto q2 = quotient(cyclic_group(4), {});
    EXPECT_EQ(q2.group, cyclic_group(4));
    for (const auto& x : oracle::elements(cyclic_group(4))) EXPECT_EQ(apply(q2.projection, x), x);
    const auto q3 = quotient(make_group({2, 2}), {GroupElement{{1, 1}}});
    EXPECT_EQ(q3.group, cyclic_group(2));
}

TEST(Group, QuotientProjectionHasKernelK) {
    Rng rng(11);
    for (int t = 0; t < 300; ++t) {
        const FinAbGroup a = random_group(rng, 72);
        std::vector<GroupElement> gens;
        for (int j = 0; j < 1 + rng.below(2); ++j) gens.push_back(element_at(a, rng.below(a.order())));
        const auto span = as_set(span_elements(a, gens));
        const Quotient q = quotient(a, gens);
        EXPECT_EQ(q.group.order() * static_cast<std::int64_t>(span.size()), a.order());
        std::set<Coords> kernel, image;
        for (const auto& x : oracle::elements(a)) {
            const GroupElement y = apply(q.projection, x);
            image.insert(y.coords);
            if (is_zero(y)) kernel.insert(x.coords);
        }
        EXPECT_EQ(kernel, span);
        EXPECT_EQ(static_cast<std::int64_t>(image.size()), q.group.order());
        for (std::size_t j = 0; j < q.lifts.size(); ++j) EXPECT_EQ(apply(q.projection, q.lifts[j]), generator(q.group, j));
    }
}

TEST(Group, DualPairingIsNondegenerate) {
    EXPECT_EQ(pair(cyclic_group(4), GroupElement{{1}}, GroupElement{{3}}), TorusValue(3, 4));
    for (const auto& b : all_groups_up_to(24)) {
        EXPECT_EQ(dual_group(b), b);
        for (const auto& chi : oracle::elements(dual_group(b))) {
            bool all_zero = true;
            for (const auto& x : oracle::elements(b)) {
                if (!pair(b, chi, x).is_zero()) all_zero = false;
                // bilinear in x
                EXPECT_EQ(pair(b, chi, add(b, x, x)), pair(b, chi, x) + pair(b, chi, x));
            }
            EXPECT_EQ(all_zero, is_zero(chi));
        }
    }
}

TEST(Group, HomomorphismsComposeAndRejectBadImages) {
    const FinAbGroup z4 = cyclic_group(4), z2 = cyclic_group(2);
    const GroupHom red = make_hom(z4, z2, {GroupElement{{1}}});
    const GroupHom dbl = make_hom(z2, z4, {GroupElement{{2}}});
    const GroupHom c = compose(dbl, red);
    for (const auto& x : oracle::elements(z4)) EXPECT_EQ(apply(c, x).coords, (Coords{2 * (x.coords[0] % 2)}));
    // 1 in Z/4 has order 4 and cannot be the image of a generator of Z/2
    EXPECT_THROW(make_hom(z2, z4, {GroupElement{{1}}}), InputError);
}

TEST(Group, AllGroupsCountsIsomorphismClasses) {
    std::vector<int> counts(33, 0);
    for (const auto& g : all_groups_up_to(32)) ++counts[static_cast<std::size_t>(g.order())];
    EXPECT_EQ(counts[1], 1);
    EXPECT_EQ(counts[8], 3);
    EXPECT_EQ(counts[16], 5);
    EXPECT_EQ(counts[32], 7);
    EXPECT_EQ(counts[12], 2);
    EXPECT_EQ(counts[30], 1);
}
