#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "oracle.hpp"

using namespace abelbias;

namespace {

const std::string kData = ABELBIAS_DATA_DIR;

std::string data(const std::string& name) { return kData + "/" + name; }

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string kM2 =
    "mlmap 1\n"
    "k 2\n"
    "group 1 2\n"
    "group 2 2\n"
    "codomain T\n"
    "entry 1 1 1/2\n";

std::filesystem::path scratch_dir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    auto p = std::filesystem::temp_directory_path() / (std::string("abelbias_") + info->name());
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST(Mlmap, CanonicalDocumentRoundtrips) {
    const auto doc = parse_mlmap(kM2);
    EXPECT_EQ(to_multilinear(doc), m_q(2));
    EXPECT_EQ(emit_mlmap(doc), kM2);
}

TEST(Mlmap, EmitIsIdempotentAndCanonical) {
    const std::string messy =
        "# comment\n"
        "mlmap 1\n"
        "k 2\n"
        "group 1 6\n"
        "group 2 4 2\n"
        "codomain T\n"
        "entry 1 2 1/2   # out of order\n"
        "entry 1 1 2/4\n"
        "entry 2 1 0/1\n";
    const auto doc = parse_mlmap(messy);
    const std::string once = emit_mlmap(doc);
    EXPECT_EQ(emit_mlmap(parse_mlmap(once)), once);
    EXPECT_EQ(once.find("2/4"), std::string::npos);
    EXPECT_EQ(to_multilinear(parse_mlmap(once)), to_multilinear(doc));
}

TEST(Mlmap, RandomMapsRoundtrip) {
    Rng rng(41);
    for (int t = 0; t < 100; ++t) {
        const std::vector<FinAbGroup> doms{random_group(rng, 24), random_group(rng, 24)};
        const MultiMapT phi = random_map(rng, doms);
        EXPECT_EQ(to_multilinear(parse_mlmap(emit_mlmap(document_of(phi)))), phi);
        const MultiMapG f = random_map(rng, doms, random_group(rng, 24));
        EXPECT_EQ(to_group_valued(parse_mlmap(emit_mlmap(document_of(f)))), f);
        const MultiAffine a = random_multiaffine(rng, {doms[0], doms[1], random_group(rng, 6)}, 3);
        const MultiAffine back = to_multiaffine(parse_mlmap(emit_mlmap(document_of(a))));
        for (const auto& x : oracle::points(a.domains())) EXPECT_EQ(oracle::value(back, x), oracle::value(a, x));
    }
}

TEST(Mlmap, RejectsInadmissibleEntries) {
    const std::string bad = "mlmap 1\nk 2\ngroup 1 2\ngroup 2 2\ncodomain T\nentry 1 1 1/3\n";
    try {
        parse_mlmap(bad);
        FAIL() << "accepted 1/3 on (Z/2)^2";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_mlmap("mlmap 2\nk 1\ngroup 1 2\ncodomain T\n"), ParseError);
    EXPECT_THROW(parse_mlmap("mlmap 1\nk 1\ngroup 1 2\ncodomain T\nentry 3 1/2\n"), ParseError);
    EXPECT_THROW(parse_mlmap("mlmap 1\nk 1\ngroup 1 2\ncodomain T\nentry 1 half\n"), ParseError);
}

TEST(Mlmap, MissingEntriesAreZero) {
    const auto doc = parse_mlmap("mlmap 1\nk 2\ngroup 1 4\ngroup 2 3\ncodomain T\n");
    EXPECT_TRUE(to_multilinear(doc).is_zero());
}

TEST(Mlcert, Roundtrips) {
    const std::string text = read_text_file(data("two_xy_mod4_bad.mlcert"));
    const RankCertificate c = parse_mlcert(text);
    ASSERT_EQ(c.rank(), 1u);
    EXPECT_EQ(c.terms[0].q, 2);
    EXPECT_EQ(parse_mlcert(emit_mlcert(c)).terms[0].right, c.terms[0].right);
    EXPECT_EQ(emit_mlcert(parse_mlcert(emit_mlcert(c))), emit_mlcert(c));
}

TEST(Cli, BiasOfSamples) {
    auto r = run({"bias", data("m2.mlmap")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "1/2\n");
    EXPECT_EQ(run({"bias", data("m2.mlmap"), "--method", "oracle"}).out, "1/2\n");
    EXPECT_EQ(run({"bias", data("two_xy_mod4.mlmap")}).out, "1/2\n");
    EXPECT_EQ(run({"bias", data("diag_trilinear_f2.mlmap")}).out, "9/16\n");
    r = run({"bias", data("gauss3.mlmap")});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.substr(0, r.out.find('\t')), cyclo_scale(cyclo_conj(gauss_sum(3)), Fraction(1, 9)).str());
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({"bias", data("missing.mlmap")}).code, 2);
    EXPECT_EQ(run({"bias"}).code, 2);
    EXPECT_EQ(run({"--budget", "1", "bias", data("m2.mlmap")}).code, 3);
    EXPECT_EQ(run({"bias", data("gauss3.mlmap"), "--method", "kernel"}).code, 2);
}

TEST(Cli, VerifyReportsWitness) {
    const auto r = run({"verify", data("two_xy_mod4.mlmap"), data("two_xy_mod4_bad.mlcert")});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.out, "mismatch at (1) (1): expected 1/2, got 0/1\n");
}

TEST(Cli, DecomposeThenVerify) {
    const auto dir = scratch_dir();
    const std::string cert = (dir / "two_xy.mlcert").string();
    auto r = run({"decompose", data("two_xy_mod4.mlmap"), "--max-q", "2", "--max-rank", "1", "--emit", cert});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "rank 1\n");
    r = run({"verify", data("two_xy_mod4.mlmap"), cert});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "ok\n");
    r = run({"decompose", data("diag_trilinear_f2.mlmap"), "--max-q", "2", "--max-rank", "1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.out.rfind("none", 0), 0u);
    r = run({"decompose", data("two_xy_mod4.mlmap"), "--max-q", "4", "--max-rank", "1", "--strategy", "induction"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(parse_mlcert(r.out).rank(), 1u);
    std::filesystem::remove_all(dir);
}

TEST(Cli, Extend) {
    auto r = run({"extend", data("ay_on_2z4.mlmap"), "--mode", "domain", "--p", "2", "--q", "2", "--ambient", "4"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(to_group_valued(parse_mlmap(r.out)).tensor(), std::vector<GroupElement>{GroupElement{{1}}});
    r = run({"extend", data("xy_mod2_on_z4.mlmap"), "--mode", "range", "--p", "2", "--q", "2"});
    EXPECT_EQ(r.code, 0) << r.err;
    r = run({"extend", data("m2_on_2z4.mlcert"), "--mode", "rank1", "--p", "2", "--q", "2", "--ambient", "4"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(parse_mlcert(r.out).terms.at(0).q, 4);
    r = run({"extend", data("ay_on_2z4.mlmap"), "--mode", "domain", "--p", "2", "--q", "2"});
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, Crush) {
    const auto dir = scratch_dir();
    const std::string cert = (dir / "f.mlcert").string();
    ASSERT_EQ(run({"decompose", data("F_two_xy.mlmap"), "--max-q", "2", "--max-rank", "1", "--emit", cert}).code, 0);
    const auto r = run({"crush", data("F_two_xy.mlmap"), cert});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("crush 1\npart I=1 C=2\n", 0), 0u) << r.out;
    EXPECT_EQ(run({"crush", data("F_two_xy.mlmap"), data("two_xy_mod4_bad.mlcert")}).code, 2);
    std::filesystem::remove_all(dir);
}

TEST(Cli, SpectrumReportsAreReproducible) {
    const auto dir = scratch_dir();
    const std::string a = (dir / "a.txt").string(), b = (dir / "b.txt").string();
    ASSERT_EQ(run({"spectrum", "--k", "2", "--max-order", "6", "--out", a}).code, 0);
    ASSERT_EQ(run({"--jobs", "3", "spectrum", "--k", "2", "--max-order", "6", "--out", b}).code, 0);
    EXPECT_EQ(read_text_file(a), read_text_file(b));
    EXPECT_EQ(read_text_file(a).substr(0, 4), "1/6\t");
    const std::string csv = (dir / "s.csv").string();
    ASSERT_EQ(run({"spectrum", "--k", "1", "--max-order", "3", "--out", a, "--csv", csv, "--witness-dir",
                   (dir / "w").string()})
                  .code,
              0);
    EXPECT_NE(read_text_file(csv).find("1/1"), std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST(Cli, LemmasAndGauss) {
    const auto a = run({"lemmas", "--trials", "100", "--seed", "7", "--max-order", "8", "--max-k", "3"});
    EXPECT_EQ(a.code, 0);
    EXPECT_NE(a.out.find("recursion 100/100"), std::string::npos) << a.out;
    EXPECT_EQ(a.out.find("FAIL"), std::string::npos);
    EXPECT_EQ(run({"lemmas", "--trials", "100", "--seed", "7", "--max-order", "8", "--max-k", "3"}).out, a.out);
    const auto g = run({"gauss", "--p", "5"});
    EXPECT_EQ(g.code, 0);
    EXPECT_NE(g.out.find(gauss_sum(5).str()), std::string::npos) << g.out;
    EXPECT_EQ(run({"gauss", "--p", "4"}).code, 2);
}
