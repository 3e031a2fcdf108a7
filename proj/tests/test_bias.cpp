#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"

using namespace abelbias;

namespace {

const FinAbGroup Z2 = cyclic_group(2);
const FinAbGroup Z4 = cyclic_group(4);

MultiAffine gauss_map(std::int64_t p) {
    const FinAbGroup zp = cyclic_group(p);
    std::vector<MultiAffine::Term> terms;
    for (Axes a : {Axes{0, 1}, Axes{0, 2}, Axes{1, 2}}) terms.push_back({a, m_q(p)});
    return MultiAffine({zp, zp, zp}, std::move(terms));
}

std::vector<FinAbGroup> random_domains(Rng& rng, std::size_t k, std::int64_t max_order) {
    std::vector<FinAbGroup> d;
    for (std::size_t i = 0; i < k; ++i) d.push_back(random_group(rng, max_order));
    return d;
}

}  // namespace

TEST(Bias, MqIsOneOverQ) {
    for (std::int64_t q : {2, 3, 4, 5, 7, 8, 9, 16}) {
        EXPECT_EQ(bias(m_q(q)), Fraction(1, q));
        EXPECT_EQ(oracle::bias(m_q(q)), Fraction(1, q));
        EXPECT_EQ(bias_oracle(m_q(q)), CycloValue(Fraction(1, q)));
    }
}

TEST(Bias, SmallExamples) {
    EXPECT_EQ(bias(MultiMapT::zero({Z4, Z2})), 1);
    const MultiMapT xyz2({Z2, Z2, Z2}, {TorusValue(1, 2)});
    EXPECT_EQ(bias(xyz2), Fraction(3, 4));
    // 8 of the 16 pairs in (Z/4)^2 have xy = 0 mod 4
    const MultiMapT xyz4({Z4, Z4, Z4}, {TorusValue(1, 4)});
    EXPECT_EQ(oracle::bias(xyz4), Fraction(1, 2));
    EXPECT_EQ(bias(xyz4), Fraction(1, 2));
    EXPECT_EQ(bias_oracle(MultiAffine({Z2}, {{{0}, MultiMapT({Z2}, {TorusValue(1, 2)})}})), CycloValue(0));
    EXPECT_EQ(bias_oracle(m_q(2)), CycloValue(Fraction(1, 2)));
}

TEST(Bias, GaussMapMatchesConjugateGaussSum) {
    for (std::int64_t p : {3, 5, 7}) {
        const CycloValue b = bias_oracle(gauss_map(p));
        EXPECT_EQ(b, cyclo_scale(cyclo_conj(gauss_sum(p)), Fraction(1, p * p)));
        EXPECT_TRUE(oracle::encloses(b, oracle::numeric_bias(gauss_map(p)), 1e-12)) << b.str();
        const auto m = cyclo_modulus(b);
        EXPECT_NEAR(m.mid(), std::pow(static_cast<double>(p), -1.5), 1e-12);
    }
    EXPECT_EQ(bias_value(m_q(3)).str(), "1/3");
}

TEST(Bias, KernelMethodEqualsOracles) {
    Rng rng(21);
    for (int t = 0; t < 300; ++t) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng.below(3));
        const MultiMapT phi = random_map(rng, random_domains(rng, k, 12));
        const Fraction b = bias(phi);
        EXPECT_EQ(b, oracle::bias(phi)) << describe(phi);
        EXPECT_EQ(bias_oracle(phi), CycloValue(b)) << describe(phi);
        const auto z = oracle::numeric_bias(phi);
        EXPECT_NEAR(z.real(), b.get_d(), 1e-9);
        EXPECT_NEAR(z.imag(), 0.0, 1e-9);
    }
}

TEST(Bias, JobsDoNotChangeResults) {
    Rng rng(22);
    for (int t = 0; t < 30; ++t) {
        const MultiMapT phi = random_map(rng, random_domains(rng, 3, 16));
        const MultiAffine aff = random_multiaffine(rng, random_domains(rng, 3, 8), 3);
        EXPECT_EQ(bias(phi, {1'000'000, 1}), bias(phi, {1'000'000, 4}));
        EXPECT_EQ(bias_oracle(aff, {1'000'000, 1}), bias_oracle(aff, {1'000'000, 3}));
    }
}

TEST(Bias, BudgetIsEnforced) {
    const FinAbGroup big = cyclic_group(1024);
    const MultiMapT phi({big, big, big}, {TorusValue(1, 1024)});
    EXPECT_THROW(bias(phi, {1000, 1}), BudgetExceeded);
    EXPECT_THROW(bias_oracle(phi, {1000, 1}), BudgetExceeded);
}

TEST(Bias, AffineBiasHasModulusAtMostOne) {
    Rng rng(23);
    for (int t = 0; t < 150; ++t) {
        const MultiAffine phi = random_multiaffine(rng, random_domains(rng, 1 + rng.below(3), 9), 3);
        const CycloValue b = bias_oracle(phi);
        EXPECT_LE(compare_modulus(b, Fraction(1)), 0) << b.str();
        EXPECT_TRUE(oracle::encloses(b, oracle::numeric_bias(phi), 1e-9)) << b.str();
    }
}

TEST(Lemmas, RecursionExamples) {
    EXPECT_TRUE(bias_recursion_check(m_q(4), {}).holds);
    EXPECT_TRUE(bias_recursion_check(m_q(4), {0}).holds);
    EXPECT_TRUE(bias_recursion_check(MultiMapT::zero({Z4, Z2, Z2}), {0, 2}).holds);
}

TEST(Lemmas, TrivialBounds) {
    const auto b2 = trivial_bounds(m_q(2), 0);
    EXPECT_EQ(b2.lower, Fraction(1, 2));
    EXPECT_EQ(b2.upper, Fraction(1, 2));
    for (std::int64_t q : {3, 5, 7}) {
        const auto b = trivial_bounds(m_q(q), 0);
        EXPECT_EQ(b.lower, Fraction(1, q));
        EXPECT_EQ(b.upper, Fraction(1, q));
    }
    const MultiMapT lin({Z4}, {TorusValue(1, 4)});
    const auto bl = trivial_bounds(lin, 0);
    EXPECT_EQ(bl.lower, 0);
    EXPECT_EQ(bl.upper, 0);
    EXPECT_EQ(bias(lin), 0);
}

TEST(Lemmas, ExponentBound) {
    const auto e = exponent_bound(m_q(4));
    EXPECT_EQ(e.q, 4);
    EXPECT_EQ(e.bound, Fraction(1, 4));
    const MultiMapT xyz4({Z4, Z4, Z4}, {TorusValue(1, 4)});
    const auto e3 = exponent_bound(xyz4);
    EXPECT_EQ(e3.q, 4);
    EXPECT_EQ(e3.bound, Fraction(3, 4));
    EXPECT_TRUE(exponent_bound_check(xyz4).holds);
    EXPECT_THROW(exponent_bound(MultiMapT::zero({Z4, Z4})), InputError);
}

TEST(Lemmas, CheckersReportWitnessOnFalseClaims) {
    const CheckResult r = detail::check_ge(Fraction(1, 4), Fraction(1, 2), "demo");
    EXPECT_FALSE(r.holds);
    EXPECT_NE(r.witness.find("demo"), std::string::npos);
}

TEST(Lemmas, GroupMapZeroProbability) {
    const MultiMapG f({Z4, Z4}, Z4, {GroupElement{{2}}});
    EXPECT_EQ(prob_zero(f), bias(from_group_map(f)));
    EXPECT_EQ(prob_zero(f), Fraction(3, 4));
    EXPECT_TRUE(group_map_check(f).holds);
}

TEST(Lemmas, SubadditivityAndFactoring) {
    const MultiMapT a({Z2, Z2}, {TorusValue(1, 2)});
    EXPECT_TRUE(subadditivity_check(a, a).holds);
    const MultiMapG id2({Z2}, Z2, {GroupElement{{1}}});
    const MultiMapG mult({Z2, Z2}, Z2, {GroupElement{{1}}});
    EXPECT_TRUE(factor_check(m_q(2), Partition{{{0, 1}, {2}}}, {mult, id2}, {Z2, Z2, Z2}).holds);
}

TEST(Lemmas, MainTermOnGaussMap) {
    // phi_J for J = {0,1} is m_p and no term lies strictly above J
    for (std::int64_t p : {3, 5}) EXPECT_TRUE(main_term_check(gauss_map(p), {0, 1}).holds);
}

TEST(Lemmas, BatteryIsCleanAndSeeded) {
    BatteryOptions o;
    o.trials = 200;
    o.seed = 4;
    const LemmaReport a = run_lemma_battery(o);
    EXPECT_TRUE(a.all_passed());
    for (const auto& t : a.tallies) EXPECT_GT(t.trials, 0) << t.name;
    const LemmaReport b = run_lemma_battery(o);
    std::ostringstream sa, sb;
    write_lemma_report(sa, a);
    write_lemma_report(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    o.trials = 60;
    EXPECT_TRUE(run_main_term_battery(o).all_passed());
}
