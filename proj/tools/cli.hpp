#pragma once

// The abelbias command line, as a function of argv so tests can drive it in-process.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "abelbias/abelbias.hpp"

namespace abelbias::cli {

enum Exit : int { kOk = 0, kVerifyFailed = 1, kInputError = 2, kBudgetExceeded = 3 };

namespace detail {

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

inline MlmapDocument load_map(const std::string& path) { return parse_mlmap(read_text_file(path)); }

/// A torus-valued view of any map document: group-valued maps F become <chi, F(x)>.
inline MultiMapT multilinear_view(const MlmapDocument& d) {
    return d.is_torus() ? to_multilinear(d) : from_group_map(to_group_valued(d));
}

inline std::string emit_crush(const CrushDecomposition& d) {
    std::string s = "crush 1\n";
    for (const auto& t : d.terms) {
        s += "part I=" + axes_str(t.axes) + " C=" + std::to_string(t.g.codomain().order()) + "\n";
        s += "g\n" + emit_mlmap(document_of(t.g)) + "end\n";
        s += "G\n" + emit_mlmap(document_of(t.G)) + "end\n";
    }
    return s;
}

}  // namespace detail

/// Runs one command line; returns the process exit code. Results go to `out`, diagnostics
/// to `err`.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact biases, rank certificates and bias spectra of multilinear maps"};
    app.require_subcommand(1);
    EngineOptions engine;
    app.add_option("--jobs", engine.jobs, "worker threads for inner loops (never changes output)")
        ->check(CLI::PositiveNumber);
    app.add_option("--budget", engine.budget, "maximum points or instances to enumerate");

    std::string map_path, cert_path, method = "auto", strategy = "search", emit_path, mode, out_path, csv_path,
                                     witness_dir;
    std::int64_t max_q = 0, p = 0, q = 0, max_order = 0, trials = 100, order_cap = 16;
    std::size_t max_rank = 0, k = 0, degree = 0, max_k = 3;
    std::uint64_t seed = 1;
    std::vector<std::int64_t> ambient;

    auto* bias_cmd = app.add_subcommand("bias", "exact bias of a map");
    bias_cmd->add_option("file", map_path, "MLMAP document")->required();
    bias_cmd->add_option("--method", method, "kernel, oracle or auto")
        ->check(CLI::IsMember({"auto", "kernel", "oracle"}));

    auto* dec_cmd = app.add_subcommand("decompose", "find a rank certificate");
    dec_cmd->add_option("file", map_path, "MLMAP document")->required();
    dec_cmd->add_option("--max-q", max_q, "largest prime power q allowed in a term")->required();
    dec_cmd->add_option("--max-rank", max_rank, "largest number of terms")->required();
    dec_cmd->add_option("--strategy", strategy, "search or induction")->check(CLI::IsMember({"search", "induction"}));
    dec_cmd->add_option("--emit", emit_path, "write the certificate here instead of standard output");

    auto* ver_cmd = app.add_subcommand("verify", "check a certificate against a map");
    ver_cmd->add_option("map", map_path, "MLMAP document")->required();
    ver_cmd->add_option("cert", cert_path, "MLCERT document")->required();

    auto* ext_cmd = app.add_subcommand("extend", "domain, range or rank-one extension of a p-group map");
    ext_cmd->add_option("file", map_path, "MLMAP (domain, range) or single-term MLCERT (rank1)")->required();
    ext_cmd->add_option("--mode", mode, "domain, range or rank1")
        ->required()
        ->check(CLI::IsMember({"domain", "range", "rank1"}));
    ext_cmd->add_option("--p", p, "the prime")->required();
    ext_cmd->add_option("--q", q, "current modulus, a power of p")->required();
    ext_cmd->add_option("--ambient", ambient, "cyclic orders of A_1 (domain and rank1 modes)");

    auto* crush_cmd = app.add_subcommand("crush", "rewrite a certificate of a group-valued map in crush form");
    crush_cmd->add_option("map", map_path, "MLMAP document with a group codomain")->required();
    crush_cmd->add_option("cert", cert_path, "MLCERT for the map paired with the dual")->required();

    auto* spec_cmd = app.add_subcommand("spectrum", "enumerate a finite slice of a bias set");
    spec_cmd->add_option("--k", k, "arity")->required();
    spec_cmd->add_option("--max-order", max_order, "bound on each |A_i|")->required();
    spec_cmd->add_option("--degree", degree, "enumerate multiaffine maps of this degree bound");
    spec_cmd->add_option("--out", out_path, "report file")->required();
    spec_cmd->add_option("--csv", csv_path, "also write value,witness-file pairs");
    spec_cmd->add_option("--witness-dir", witness_dir, "directory for witness MLMAP files (with --csv)");

    auto* lem_cmd = app.add_subcommand("lemmas", "seeded property battery");
    lem_cmd->add_option("--trials", trials, "random instances per battery")->required();
    lem_cmd->add_option("--seed", seed, "random seed")->required();
    lem_cmd->add_option("--max-order", order_cap, "bound on each |A_i|")->required();
    lem_cmd->add_option("--max-k", max_k, "largest arity")->required();

    auto* gauss_cmd = app.add_subcommand("gauss", "the quadratic Gauss sum G(p)");
    gauss_cmd->add_option("--p", p, "odd prime")->required();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kInputError;
    }

    try {
        if (*bias_cmd) {
            const auto doc = detail::load_map(map_path);
            if (doc.is_affine()) {
                if (method == "kernel") throw InputError("the kernel method needs a multilinear map");
                const BiasValue v(bias_oracle(to_multiaffine(doc), engine));
                out << v.str();
                if (!v.is_rational()) out << '\t' << v.decimal(15);
                out << '\n';
                return kOk;
            }
            const MultiMapT phi = detail::multilinear_view(doc);
            const BiasValue v = method == "oracle" ? BiasValue(bias_oracle(phi, engine)) : BiasValue(bias(phi, engine));
            out << v.str() << '\n';
            return kOk;
        }
        if (*dec_cmd) {
            const MultiMapT phi = detail::multilinear_view(detail::load_map(map_path));
            std::optional<RankCertificate> cert;
            if (strategy == "induction") {
                const auto r = induction_decompose(phi, max_q, max_rank, engine);
                for (const auto& line : r.log) err << line << '\n';
                cert = r.certificate;
            } else {
                cert = search_decomposition(phi, max_q, max_rank, engine);
            }
            if (!cert) {
                out << "none: no certificate with q <= " << max_q << " and rank <= " << max_rank << '\n';
                return kVerifyFailed;
            }
            const std::string text = emit_mlcert(*cert);
            if (emit_path.empty()) {
                out << text;
            } else {
                detail::write_file(emit_path, text);
                out << "rank " << cert->rank() << '\n';
            }
            return kOk;
        }
        if (*ver_cmd) {
            const MultiMapT phi = detail::multilinear_view(detail::load_map(map_path));
            const auto r = verify_certificate(phi, parse_mlcert(read_text_file(cert_path)), engine);
            out << r.message() << '\n';
            return r.ok ? kOk : kVerifyFailed;
        }
        if (*ext_cmd) {
            const auto a1 = [&] {
                if (ambient.empty()) throw InputError("--ambient is required in " + mode + " mode");
                return make_group(ambient);
            };
            if (mode == "rank1") {
                const RankCertificate c = parse_mlcert(read_text_file(map_path));
                if (c.rank() != 1) throw InputError("rank1 mode takes a single-term certificate");
                const RankTerm& w = c.terms[0];
                if (w.q != q) throw InputError("certificate modulus differs from --q");
                std::vector<FinAbGroup> doms(w.left.arity() + w.right.arity());
                const Axes rest = abelbias::detail::complement(w.axes, doms.size());
                for (std::size_t i = 0; i < w.axes.size(); ++i) doms[w.axes[i]] = w.left.domain(i);
                for (std::size_t i = 0; i < rest.size(); ++i) doms[rest[i]] = w.right.domain(i);
                const MultiMapT phi = term_map(w, doms);
                const auto ext = extend_rank_one(phi, w, a1(), p);
                const auto v = verify_rank_one_extension(phi, ext.map, a1(), p, engine);
                if (!v) {
                    out << v.message() << '\n';
                    return kVerifyFailed;
                }
                out << emit_mlcert(RankCertificate{{ext.term}});
                return kOk;
            }
            const MultiMapG phi = to_group_valued(detail::load_map(map_path));
            if (!(phi.codomain() == cyclic_group(q))) throw InputError("map codomain differs from Z/--q");
            MultiMapG psi = phi;
            VerifyResult v;
            if (mode == "domain") {
                psi = extend_domain(phi, a1(), p, q);
                v = verify_domain_extension(phi, psi, a1(), p, engine);
            } else {
                psi = extend_range(phi, p, q);
                v = verify_range_extension(phi, psi, engine);
            }
            if (!v) {
                out << v.message() << '\n';
                return kVerifyFailed;
            }
            out << emit_mlmap(document_of(psi));
            return kOk;
        }
        if (*crush_cmd) {
            const MultiMapG f = to_group_valued(detail::load_map(map_path));
            const CrushDecomposition d = crush_decomposition(f, parse_mlcert(read_text_file(cert_path)), engine);
            const auto v = verify_crush(f, d, engine);
            if (!v) {
                out << v.message() << '\n';
                return kVerifyFailed;
            }
            out << detail::emit_crush(d);
            return kOk;
        }
        if (*spec_cmd) {
            const SpectrumReport r = degree ? enumerate_bias_set_affine(k, degree, max_order, engine)
                                            : enumerate_bias_set(k, max_order, engine);
            std::ostringstream text;
            write_report(text, r);
            detail::write_file(out_path, text.str());
            if (!csv_path.empty()) {
                const std::filesystem::path dir =
                    witness_dir.empty() ? std::filesystem::path(csv_path).parent_path() : std::filesystem::path(witness_dir);
                if (!dir.empty()) std::filesystem::create_directories(dir);
                std::ostringstream csv;
                csv << "value,witness\n";
                for (std::size_t i = 0; i < r.entries.size(); ++i) {
                    const std::string name = "witness_" + std::to_string(i + 1) + ".mlmap";
                    const auto& w = r.entries[i].witness;
                    Axes all(w.arity());
                    std::iota(all.begin(), all.end(), std::size_t{0});
                    detail::write_file((dir / name).string(),
                                       emit_mlmap(degree ? document_of(w) : document_of(w.term(all))));
                    csv << '"' << r.entries[i].value.str() << "\"," << name << '\n';
                }
                detail::write_file(csv_path, csv.str());
            }
            out << r.entries.size() << " distinct values from " << r.instances << " maps\n";
            return kOk;
        }
        if (*lem_cmd) {
            BatteryOptions o;
            o.trials = trials;
            o.seed = seed;
            o.max_order = order_cap;
            o.max_k = max_k;
            o.engine = engine;
            if (o.max_k < 1) throw InputError("--max-k must be >= 1");
            LemmaReport all;
            for (auto&& r : {run_lemma_battery(o), run_main_term_battery(o), run_extension_battery(o)})
                for (const auto& t : r.tallies) all.tallies.push_back(t);
            write_lemma_report(out, all);
            return all.all_passed() ? kOk : kVerifyFailed;
        }
        if (*gauss_cmd) {
            const CycloValue g = gauss_sum(p);
            out << "G(" << p << ") = " << g.str() << '\t' << BiasValue(g).decimal(15) << '\n';
            out << "G(" << p << ")^2 = " << BiasValue(g * g).str() << '\n';
            return kOk;
        }
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << '\n';
        return kBudgetExceeded;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kInputError;
    } catch (const PreconditionViolation& e) {
        err << "precondition violated: " << e.what() << '\n';
        return kInputError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}

}  // namespace abelbias::cli
