#include <gtest/gtest.h>

#include "oracle.hpp"

using namespace abelbias;

namespace {

const FinAbGroup Z2 = cyclic_group(2);
const FinAbGroup Z4 = cyclic_group(4);

GroupElement el(std::initializer_list<std::int64_t> c) { return GroupElement{std::vector<std::int64_t>(c)}; }

MultiMapG linear(const FinAbGroup& a, const FinAbGroup& b, std::vector<GroupElement> images) {
    return MultiMapG({a}, b, std::move(images));
}

const MultiMapT two_xy({Z4, Z4}, {TorusValue(2, 4)});

RankTerm mod2_term() {
    const MultiMapG red = linear(Z4, Z2, {el({1})});
    return {2, {0}, red, red};
}

void expect_certifies(const MultiMapT& phi, const RankCertificate& cert) {
    const MultiMapT sum = certificate_sum(cert, phi.domains());
    for (const auto& x : oracle::points(phi.domains())) EXPECT_EQ(oracle::value(sum, x), oracle::value(phi, x));
    EXPECT_TRUE(verify_certificate(phi, cert).ok);
}

}  // namespace

TEST(Certificate, VerifiesIdentityFactors) {
    for (std::int64_t q : {2, 3, 4, 5, 8, 9}) {
        const FinAbGroup zq = cyclic_group(q);
        const MultiMapG id = linear(zq, zq, {el({1})});
        expect_certifies(m_q(q), RankCertificate{{RankTerm{q, {0}, id, id}}});
    }
    expect_certifies(two_xy, RankCertificate{{mod2_term()}});
}

TEST(Certificate, ReportsWitnessOnFailure) {
    RankTerm t = mod2_term();
    t.left = MultiMapG::zero({Z4}, Z2);
    const VerifyResult r = verify_certificate(two_xy, RankCertificate{{t}});
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.message(), "mismatch at (1) (1): expected 1/2, got 0/1");
    EXPECT_EQ(oracle::value(two_xy, r.witness), Fraction(1, 2));
}

TEST(Certificate, BiasBound) {
    EXPECT_EQ(certificate_bias_bound({}), 1);
    const MultiMapG id4 = linear(Z4, Z4, {el({1})});
    EXPECT_EQ(certificate_bias_bound(RankCertificate{{RankTerm{4, {0}, id4, id4}}}), Fraction(1, 4));
    const FinAbGroup Z3 = cyclic_group(3);
    const MultiMapG id2 = linear(Z2, Z2, {el({1})}), id3 = linear(Z3, Z3, {el({1})});
    EXPECT_EQ(certificate_bias_bound(RankCertificate{{RankTerm{2, {0}, id2, id2}, RankTerm{3, {0}, id3, id3}}}),
              Fraction(1, 6));
}

TEST(Certificate, RejectsMalformedTerms) {
    RankTerm t = mod2_term();
    t.q = 6;
    EXPECT_THROW(check_term(t, {Z4, Z4}), InputError);
    t = mod2_term();
    t.axes = {0, 1};
    EXPECT_THROW(check_term(t, {Z4, Z4}), InputError);
}

TEST(Search, SpecExamples) {
    const auto c3 = search_decomposition(m_q(3), 3, 1);
    ASSERT_TRUE(c3.has_value());
    ASSERT_EQ(c3->rank(), 1u);
    EXPECT_EQ(c3->terms[0].q, 3);
    expect_certifies(m_q(3), *c3);

    const auto c = search_decomposition(two_xy, 2, 1);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(c->rank(), 1u);
    EXPECT_EQ(c->terms[0].q, 2);
    expect_certifies(two_xy, *c);
    EXPECT_EQ(bias(two_xy), certificate_bias_bound(*c));

    const auto z = search_decomposition(MultiMapT::zero({Z4, Z4}), 4, 2);
    ASSERT_TRUE(z.has_value());
    EXPECT_EQ(z->rank(), 0u);
}

TEST(Search, ReturnsNothingBelowTheTrueRank) {
    EXPECT_FALSE(search_decomposition(m_q(4), 2, 3).has_value());
    // the diagonal form x1 y1 + x2 y2 over F_2 has rank 2
    const FinAbGroup v = make_group({2, 2});
    const MultiMapT diag({v, v}, {TorusValue(1, 2), TorusValue(), TorusValue(), TorusValue(1, 2)});
    EXPECT_FALSE(search_decomposition(diag, 2, 1).has_value());
    const auto c = search_decomposition(diag, 2, 2);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(c->rank(), 2u);
    expect_certifies(diag, *c);
}

TEST(Search, IsDeterministicAcrossJobs) {
    const FinAbGroup v = make_group({2, 4});
    Rng rng(31);
    for (int t = 0; t < 10; ++t) {
        const MultiMapT phi = random_map(rng, {v, v});
        const auto a = search_decomposition(phi, 4, 3, {1'000'000, 1});
        const auto b = search_decomposition(phi, 4, 3, {1'000'000, 3});
        ASSERT_EQ(a.has_value(), b.has_value());
        if (a) {
            EXPECT_EQ(emit_mlcert(*a), emit_mlcert(*b));
            expect_certifies(phi, *a);
        }
    }
}

TEST(Search, CertificatesBoundTheBias) {
    Rng rng(32);
    for (int t = 0; t < 40; ++t) {
        const std::vector<FinAbGroup> doms{random_p_group(rng, 2, 8), random_p_group(rng, 2, 4)};
        const MultiMapT phi = random_map(rng, doms);
        const auto c = search_decomposition(phi, 4, 3);
        ASSERT_TRUE(c.has_value()) << describe(phi);
        expect_certifies(phi, *c);
        EXPECT_GE(bias(phi), certificate_bias_bound(*c));
    }
}

TEST(Search, PrimeSupportBound) {
    EXPECT_EQ(prime_support_bound(Fraction(1, 4), 2), 2);
    EXPECT_EQ(prime_support_bound(Fraction(1), 5), 0);
    EXPECT_EQ(prime_support_bound(Fraction(1, 2), 2), 1);
}

TEST(Extension, DomainEnlargement) {
    // phi(2a, y) = ay mod 2 on 2(Z/4) x Z/4
    const MultiMapG phi({Z2, Z4}, Z2, {el({1})});
    const MultiMapG psi = extend_domain(phi, Z4, 2, 2);
    EXPECT_EQ(psi.codomain(), Z4);
    EXPECT_EQ(psi.tensor(), std::vector<GroupElement>{el({1})});
    EXPECT_TRUE(verify_domain_extension(phi, psi, Z4, 2).ok);
    const auto incl = times_p_subgroup(Z4, 2).inclusion;
    for (const auto& x : oracle::points(phi.domains()))
        EXPECT_EQ(evaluate(psi, {apply(incl, x[0]), x[1]}).coords[0], 2 * evaluate(phi, x).coords[0]);

    EXPECT_TRUE(extend_domain(MultiMapG::zero({Z2, Z4}, Z2), Z4, 2, 2).is_zero());
    EXPECT_THROW(extend_domain(MultiMapG({Z2, Z2}, Z2, {el({1})}), Z4, 2, 2), PreconditionViolation);
}

TEST(Extension, RangeEnlargement) {
    const MultiMapG phi({Z4, Z4}, Z2, {el({1})});
    const MultiMapG psi = extend_range(phi, 2, 2);
    EXPECT_EQ(psi.tensor(), std::vector<GroupElement>{el({1})});
    for (const auto& x : oracle::points(phi.domains()))
        EXPECT_EQ(evaluate(psi, x).coords[0] % 2, evaluate(phi, x).coords[0]);
    EXPECT_TRUE(verify_range_extension(phi, psi).ok);
    EXPECT_TRUE(extend_range(MultiMapG::zero({Z4, Z4}, Z2), 2, 2).is_zero());
    EXPECT_THROW(extend_range(MultiMapG({Z2, Z4}, Z2, {el({1})}), 2, 2), PreconditionViolation);
}

TEST(Extension, RankOne) {
    const MultiMapG id2 = linear(Z2, Z2, {el({1})});
    const MultiMapG red = linear(Z4, Z2, {el({1})});
    const RankTerm w{2, {0}, id2, red};
    const MultiMapT phi = term_map(w, {Z2, Z4});
    const auto ext = extend_rank_one(phi, w, Z4, 2);
    EXPECT_EQ(ext.term.q, 4);
    EXPECT_EQ(ext.map, m_q(4));
    EXPECT_TRUE(verify_rank_one_extension(phi, ext.map, Z4, 2).ok);

    const RankTerm zero{2, {0}, MultiMapG::zero({Z2}, Z2), MultiMapG::zero({Z4}, Z2)};
    EXPECT_TRUE(extend_rank_one(MultiMapT::zero({Z2, Z4}), zero, Z4, 2).map.is_zero());

    // k = 3: m_2(a y mod 2, z mod 2) on 2(Z/4) x Z/4 x Z/4
    const RankTerm w3{2, {0, 1}, MultiMapG({Z2, Z4}, Z2, {el({1})}), red};
    const MultiMapT phi3 = term_map(w3, {Z2, Z4, Z4});
    const auto ext3 = extend_rank_one(phi3, w3, Z4, 2);
    EXPECT_TRUE(verify_rank_one_extension(phi3, ext3.map, Z4, 2).ok);
    const auto incl = times_p_subgroup(Z4, 2).inclusion;
    for (const auto& x : oracle::points(phi3.domains()))
        EXPECT_EQ(oracle::value(ext3.map, {apply(incl, x[0]), x[1], x[2]}), oracle::value(phi3, x));

    RankTerm bad = w;
    bad.axes = {1};
    std::swap(bad.left, bad.right);
    EXPECT_THROW(extend_rank_one(phi, bad, Z4, 2), InputError);
}

TEST(Extension, BatteryIsClean) {
    BatteryOptions o;
    o.trials = 60;
    o.seed = 9;
    const LemmaReport r = run_extension_battery(o);
    EXPECT_TRUE(r.all_passed());
    EXPECT_GT(r.at("extend-rank-one").trials, 0);
}

TEST(Induction, RecoversRankOneCertificates) {
    for (const MultiMapT& phi : {m_q(4), m_q(8), two_xy}) {
        const InductionResult r = induction_decompose(phi, 8, 1);
        ASSERT_TRUE(r.certificate.has_value()) << describe(phi);
        EXPECT_EQ(r.certificate->rank(), 1u);
        expect_certifies(phi, *r.certificate);
    }
}

TEST(Crush, TwoXyThroughMod2) {
    const MultiMapG f({Z4, Z4}, Z4, {el({2})});
    const auto cert = search_decomposition(from_group_map(f), 2, 1);
    ASSERT_TRUE(cert.has_value());
    const CrushDecomposition d = crush_decomposition(f, *cert);
    ASSERT_EQ(d.terms.size(), 1u);
    EXPECT_EQ(d.terms[0].axes, Axes{0});
    EXPECT_EQ(d.terms[0].g.codomain(), Z2);
    EXPECT_TRUE(verify_crush(f, d).ok);
    const MultiMapG s = crush_sum(d, f.domains(), f.codomain());
    for (const auto& x : oracle::points(f.domains())) EXPECT_EQ(evaluate(s, x), evaluate(f, x));

    CrushDecomposition broken = d;
    broken.terms[0].G = MultiMapG::zero(broken.terms[0].G.domains(), Z4);
    const auto r = verify_crush(f, broken);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.message(), "mismatch at (1) (1): expected (2), got (0)");
}

TEST(Crush, EmptyCertificateForZero) {
    const MultiMapG f = MultiMapG::zero({Z4, Z4}, Z4);
    const CrushDecomposition d = crush_decomposition(f, {});
    EXPECT_TRUE(d.terms.empty());
    EXPECT_TRUE(verify_crush(f, d).ok);
}

TEST(Crush, MergesTermsWithTheSameI) {
    // F(x, y) = (x1 y1, x2 y2) on (Z/2 + Z/2)^2 -> (Z/2)^2
    const FinAbGroup v = make_group({2, 2});
    const MultiMapG f({v, v}, v, {el({1, 0}), el({0, 0}), el({0, 0}), el({0, 1})});
    const MultiMapG pick1 = linear(v, Z2, {el({1}), el({0})});
    const MultiMapG pick2 = linear(v, Z2, {el({0}), el({1})});
    const MultiMapG r1({v, v}, Z2, {el({1}), el({0}), el({0}), el({0})});
    const MultiMapG r2({v, v}, Z2, {el({0}), el({0}), el({0}), el({1})});
    const RankCertificate cert{{RankTerm{2, {0}, pick1, r1}, RankTerm{2, {0}, pick2, r2}}};
    ASSERT_TRUE(verify_certificate(from_group_map(f), cert).ok);
    const CrushDecomposition d = crush_decomposition(f, cert);
    ASSERT_EQ(d.terms.size(), 1u);
    EXPECT_EQ(d.terms[0].g.codomain(), v);
    EXPECT_TRUE(verify_crush(f, d).ok);
}

TEST(Crush, HandBuiltDecomposition) {
    const MultiMapG f({Z2, Z2}, Z2, {el({1})});
    const CrushDecomposition d{{CrushTerm{{0}, linear(Z2, Z2, {el({1})}), MultiMapG({Z2, Z2}, Z2, {el({1})})}}};
    EXPECT_TRUE(verify_crush(f, d).ok);
}

TEST(Crush, RejectsCertificatesThatDoNotVerify) {
    const MultiMapG f({Z4, Z4}, Z4, {el({2})});
    EXPECT_THROW(crush_decomposition(f, {}), PreconditionViolation);
}
