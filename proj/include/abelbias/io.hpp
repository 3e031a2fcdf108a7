#pragma once

// MLMAP v1 and MLCERT v1, the line-oriented text formats of the command line tool.
//
//   mlmap 1
//   k 2
//   group 1 4
//   group 2 4
//   codomain T                 (or: codomain group 2 4)
//   entry 1 1 1/2              (torus value, or a tuple like (1,0) for group codomains)
//
// Generator indices are 1-based and refer to the canonical factor list of each group.
// Multiaffine documents put `term 1,3` before each block of entries. Certificates wrap
// two MLMAP documents per term between `left`/`end` and `right`/`end`.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "maps.hpp"
#include "structure.hpp"

namespace abelbias {

struct MlmapDocument {
    using Value = std::variant<TorusValue, GroupElement>;
    struct Entry {
        std::vector<std::size_t> index;  ///< 0-based generator indices
        Value value;
    };
    struct Block {
        std::optional<Axes> term;  ///< set in multiaffine documents
        std::vector<Entry> entries;
    };

    int version = 1;
    std::vector<FinAbGroup> groups;
    std::optional<FinAbGroup> codomain;  ///< empty for the torus
    std::vector<Block> blocks;

    std::size_t k() const noexcept { return groups.size(); }
    bool is_affine() const noexcept { return !blocks.empty() && blocks.front().term.has_value(); }
    bool is_torus() const noexcept { return !codomain.has_value(); }
};

namespace detail {

struct Token {
    std::string text;
    std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') break;
        if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#') ++i;
        out.push_back({std::string(line.substr(start, i - start)), start + 1});
    }
    return out;
}

inline std::int64_t parse_int(const Token& t, std::size_t line, const char* what) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(t.text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != t.text.size()) throw ParseError(std::string("expected ") + what + ", got '" + t.text + "'", line, t.column);
    return v;
}

inline Axes parse_axes(const Token& t, std::size_t line, std::size_t k) {
    Axes a;
    std::stringstream ss(t.text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const std::int64_t v = parse_int({part, t.column}, line, "an axis number");
        if (v < 1 || static_cast<std::size_t>(v) > k)
            throw ParseError("axis " + part + " out of range 1.." + std::to_string(k), line, t.column);
        a.push_back(static_cast<std::size_t>(v - 1));
    }
    for (std::size_t i = 1; i < a.size(); ++i)
        if (a[i] <= a[i - 1]) throw ParseError("axis list must be strictly increasing", line, t.column);
    if (a.empty()) throw ParseError("empty axis list", line, t.column);
    return a;
}

inline FinAbGroup parse_group_orders(const std::vector<Token>& toks, std::size_t from, std::size_t line) {
    std::vector<std::int64_t> orders;
    for (std::size_t i = from; i < toks.size(); ++i) {
        const std::int64_t n = parse_int(toks[i], line, "a group order");
        if (n < 1) throw ParseError("group orders must be positive", line, toks[i].column);
        orders.push_back(n);
    }
    if (orders.empty()) throw ParseError("missing group orders", line, toks.size() ? toks.back().column : 1);
    try {
        return make_group(orders);
    } catch (const Error& e) {
        throw ParseError(e.what(), line, toks[from].column);
    }
}

inline GroupElement parse_tuple(const Token& t, std::size_t line, const FinAbGroup& g) {
    const std::string& s = t.text;
    if (s.size() < 2 || s.front() != '(' || s.back() != ')')
        throw ParseError("expected a coordinate tuple like (1,0), got '" + s + "'", line, t.column);
    GroupElement x;
    const std::string body = s.substr(1, s.size() - 2);
    if (!body.empty()) {
        std::stringstream ss(body);
        std::string part;
        while (std::getline(ss, part, ',')) x.coords.push_back(parse_int({part, t.column}, line, "a coordinate"));
    }
    if (x.coords.size() != g.rank())
        throw ParseError("tuple has " + std::to_string(x.coords.size()) + " coordinates, codomain " + g.str() + " has " +
                             std::to_string(g.rank()),
                         line, t.column);
    for (std::size_t c = 0; c < g.rank(); ++c)
        if (x.coords[c] < 0 || x.coords[c] >= g.factor(c))
            throw ParseError("coordinate " + std::to_string(x.coords[c]) + " not reduced mod " + std::to_string(g.factor(c)),
                             line, t.column);
    return x;
}

inline bool value_is_zero(const MlmapDocument::Value& v) {
    if (const auto* t = std::get_if<TorusValue>(&v)) return t->is_zero();
    return abelbias::is_zero(std::get<GroupElement>(v));
}

/// Parses MLMAP lines [begin, end) of `lines`; `first_line` is the 1-based number of lines[begin].
inline MlmapDocument parse_mlmap_lines(const std::vector<std::string>& lines, std::size_t begin, std::size_t end,
                                       std::size_t first_line) {
    MlmapDocument doc;
    std::optional<std::size_t> k;
    std::vector<std::optional<FinAbGroup>> groups;
    bool have_codomain = false;
    bool saw_entries = false;
    std::size_t last = first_line;
    std::vector<std::map<std::vector<std::size_t>, std::size_t>> seen;  // per block: index -> line

    auto header_done = [&](std::size_t ln, std::size_t col) {
        if (!k) throw ParseError("missing 'k' line", ln, col);
        for (std::size_t i = 0; i < *k; ++i)
            if (!groups[i]) throw ParseError("missing 'group " + std::to_string(i + 1) + "' line", ln, col);
        if (!have_codomain) throw ParseError("missing 'codomain' line", ln, col);
        if (doc.groups.empty())
            for (auto& g : groups) doc.groups.push_back(*g);
    };

    bool saw_magic = false;
    for (std::size_t li = begin; li < end; ++li) {
        const std::size_t ln = first_line + (li - begin);
        last = ln;
        const auto toks = tokenize(lines[li]);
        if (toks.empty()) continue;
        const std::string& kw = toks[0].text;
        if (!saw_magic) {
            if (kw != "mlmap") throw ParseError("expected 'mlmap 1'", ln, toks[0].column);
            if (toks.size() != 2 || parse_int(toks[1], ln, "a version") != 1)
                throw ParseError("unsupported mlmap version", ln, toks.size() > 1 ? toks[1].column : toks[0].column);
            saw_magic = true;
            continue;
        }
        if (kw == "k") {
            if (k) throw ParseError("duplicate 'k' line", ln, toks[0].column);
            if (toks.size() != 2) throw ParseError("expected 'k <arity>'", ln, toks[0].column);
            const std::int64_t v = parse_int(toks[1], ln, "an arity");
            if (v < 1 || v > 16) throw ParseError("arity must be between 1 and 16", ln, toks[1].column);
            k = static_cast<std::size_t>(v);
            groups.assign(*k, std::nullopt);
        } else if (kw == "group") {
            if (!k) throw ParseError("'group' before 'k'", ln, toks[0].column);
            if (saw_entries) throw ParseError("'group' after entries", ln, toks[0].column);
            if (toks.size() < 3) throw ParseError("expected 'group <i> <order> ...'", ln, toks[0].column);
            const std::int64_t i = parse_int(toks[1], ln, "a group index");
            if (i < 1 || static_cast<std::size_t>(i) > *k)
                throw ParseError("group index out of range 1.." + std::to_string(*k), ln, toks[1].column);
            if (groups[i - 1]) throw ParseError("duplicate group " + std::to_string(i), ln, toks[1].column);
            groups[i - 1] = parse_group_orders(toks, 2, ln);
        } else if (kw == "codomain") {
            if (have_codomain) throw ParseError("duplicate 'codomain' line", ln, toks[0].column);
            if (saw_entries) throw ParseError("'codomain' after entries", ln, toks[0].column);
            if (toks.size() == 2 && toks[1].text == "T") {
                doc.codomain.reset();
            } else if (toks.size() >= 3 && toks[1].text == "group") {
                doc.codomain = parse_group_orders(toks, 2, ln);
            } else {
                throw ParseError("expected 'codomain T' or 'codomain group <order> ...'", ln, toks[0].column);
            }
            have_codomain = true;
        } else if (kw == "term") {
            header_done(ln, toks[0].column);
            if (!doc.is_torus()) throw ParseError("multiaffine maps take values in T", ln, toks[0].column);
            if (toks.size() != 2) throw ParseError("expected 'term <axes>'", ln, toks[0].column);
            if (saw_entries && !doc.is_affine()) throw ParseError("'term' after untermed entries", ln, toks[0].column);
            Axes a = parse_axes(toks[1], ln, *k);
            for (const auto& b : doc.blocks)
                if (b.term == a) throw ParseError("duplicate term " + toks[1].text, ln, toks[1].column);
            doc.blocks.push_back({std::move(a), {}});
            seen.emplace_back();
            saw_entries = true;
        } else if (kw == "entry") {
            header_done(ln, toks[0].column);
            if (doc.blocks.empty()) {
                doc.blocks.push_back({std::nullopt, {}});
                seen.emplace_back();
            }
            saw_entries = true;
            auto& block = doc.blocks.back();
            const Axes axes = block.term ? *block.term : [&] {
                Axes a(*k);
                for (std::size_t i = 0; i < *k; ++i) a[i] = i;
                return a;
            }();
            if (toks.size() != axes.size() + 2)
                throw ParseError("expected " + std::to_string(axes.size()) + " generator indices and a value", ln,
                                 toks[0].column);
            MlmapDocument::Entry e;
            std::vector<std::int64_t> orders;
            for (std::size_t a = 0; a < axes.size(); ++a) {
                const FinAbGroup& g = doc.groups[axes[a]];
                const std::int64_t j = parse_int(toks[1 + a], ln, "a generator index");
                if (j < 1 || static_cast<std::size_t>(j) > g.rank())
                    throw ParseError("generator index " + toks[1 + a].text + " out of range for " + g.str(), ln,
                                     toks[1 + a].column);
                e.index.push_back(static_cast<std::size_t>(j - 1));
                orders.push_back(g.factor(static_cast<std::size_t>(j - 1)));
            }
            std::int64_t ann = 0;
            for (auto o : orders) ann = std::gcd(ann, o);
            const Token& vt = toks.back();
            if (doc.is_torus()) {
                TorusValue v;
                try {
                    v = parse_torus(vt.text);
                } catch (const Error& err) {
                    throw ParseError(std::string("bad fraction: ") + err.what(), ln, vt.column);
                }
                if (!(to_integer(ann) % v.den() == 0))
                    throw ParseError("entry value " + v.str() + " is not killed by the generator orders (gcd " +
                                         std::to_string(ann) + ")",
                                     ln, vt.column);
                e.value = v;
            } else {
                GroupElement x = parse_tuple(vt, ln, *doc.codomain);
                if (!abelbias::is_zero(abelbias::scale(*doc.codomain, x, ann)))
                    throw ParseError("entry value " + to_string(x) + " is not killed by the generator orders (gcd " +
                                         std::to_string(ann) + ")",
                                     ln, vt.column);
                e.value = std::move(x);
            }
            if (auto [it, fresh] = seen.back().emplace(e.index, ln); !fresh)
                throw ParseError("duplicate entry (first on line " + std::to_string(it->second) + ")", ln,
                                 toks[0].column);
            block.entries.push_back(std::move(e));
        } else {
            throw ParseError("unknown keyword '" + kw + "'", ln, toks[0].column);
        }
    }
    if (!saw_magic) throw ParseError("empty document", last, 1);
    header_done(last, 1);
    return doc;
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string l;
    while (std::getline(ss, l)) lines.push_back(l);
    return lines;
}

inline std::string orders_str(const FinAbGroup& g) {
    if (g.rank() == 0) return "1";
    std::string s;
    for (std::size_t j = 0; j < g.rank(); ++j) s += (j ? " " : "") + std::to_string(g.factor(j));
    return s;
}

}  // namespace detail

inline MlmapDocument parse_mlmap(const std::string& text) {
    const auto lines = detail::split_lines(text);
    return detail::parse_mlmap_lines(lines, 0, lines.size(), 1);
}

/// Canonical text: canonical group factors, entries in lexicographic order, zeros omitted.
inline std::string emit_mlmap(const MlmapDocument& doc) {
    std::ostringstream os;
    os << "mlmap 1\nk " << doc.k() << '\n';
    for (std::size_t i = 0; i < doc.k(); ++i) os << "group " << i + 1 << ' ' << detail::orders_str(doc.groups[i]) << '\n';
    if (doc.codomain)
        os << "codomain group " << detail::orders_str(*doc.codomain) << '\n';
    else
        os << "codomain T\n";
    std::vector<const MlmapDocument::Block*> blocks;
    for (const auto& b : doc.blocks) blocks.push_back(&b);
    std::stable_sort(blocks.begin(), blocks.end(), [](const auto* a, const auto* b) {
        if (!a->term || !b->term) return false;
        return a->term->size() != b->term->size() ? a->term->size() < b->term->size() : *a->term < *b->term;
    });
    const bool all_empty = std::all_of(doc.blocks.begin(), doc.blocks.end(), [](const MlmapDocument::Block& b) {
        return std::all_of(b.entries.begin(), b.entries.end(),
                           [](const MlmapDocument::Entry& e) { return detail::value_is_zero(e.value); });
    });
    for (const auto* b : blocks) {
        std::vector<const MlmapDocument::Entry*> es;
        for (const auto& e : b->entries)
            if (!detail::value_is_zero(e.value)) es.push_back(&e);
        if (b->term) {
            // a zero multiaffine map keeps one header so it stays multiaffine
            if (es.empty() && !(all_empty && b == blocks.front())) continue;
            os << "term " << axes_str(*b->term) << '\n';
        }
        std::sort(es.begin(), es.end(), [](const auto* x, const auto* y) { return x->index < y->index; });
        for (const auto* e : es) {
            os << "entry";
            for (auto j : e->index) os << ' ' << j + 1;
            if (const auto* t = std::get_if<TorusValue>(&e->value))
                os << ' ' << t->str();
            else
                os << ' ' << to_string(std::get<GroupElement>(e->value));
            os << '\n';
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Documents <-> maps

namespace detail {

template <class V, class Tensor>
void fill_tensor(const MlmapDocument::Block& b, const tensor::Dims& dims, Tensor& t) {
    for (const auto& e : b.entries) t[tensor::flatten(e.index, dims)] = std::get<V>(e.value);
}

template <class V, class Tensor>
MlmapDocument::Block block_of(const Tensor& t, const tensor::Dims& dims, std::optional<Axes> term) {
    MlmapDocument::Block b{std::move(term), {}};
    tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
        const V& v = t[tensor::flatten(m, dims)];
        b.entries.push_back({m, v});
    });
    std::erase_if(b.entries, [](const MlmapDocument::Entry& e) { return value_is_zero(e.value); });
    return b;
}

}  // namespace detail

inline MultiMapT to_multilinear(const MlmapDocument& doc) {
    if (!doc.is_torus() || doc.is_affine()) throw InputError("document is not a multilinear map into T");
    const auto dims = detail::dims_of(doc.groups);
    std::vector<TorusValue> t(tensor::volume(dims));
    if (!doc.blocks.empty()) detail::fill_tensor<TorusValue>(doc.blocks[0], dims, t);
    return MultiMapT(doc.groups, std::move(t));
}

inline MultiMapG to_group_valued(const MlmapDocument& doc) {
    if (doc.is_torus()) throw InputError("document is not a group-valued map");
    const auto dims = detail::dims_of(doc.groups);
    std::vector<GroupElement> t(tensor::volume(dims), zero_element(*doc.codomain));
    if (!doc.blocks.empty()) detail::fill_tensor<GroupElement>(doc.blocks[0], dims, t);
    return MultiMapG(doc.groups, *doc.codomain, std::move(t));
}

/// Multiaffine view; a multilinear document becomes its single top-degree term.
inline MultiAffine to_multiaffine(const MlmapDocument& doc) {
    if (!doc.is_affine()) return MultiAffine::from_multilinear(to_multilinear(doc));
    std::vector<MultiAffine::Term> terms;
    for (const auto& b : doc.blocks) {
        const auto sub = detail::select(doc.groups, *b.term);
        const auto dims = detail::dims_of(sub);
        std::vector<TorusValue> t(tensor::volume(dims));
        detail::fill_tensor<TorusValue>(b, dims, t);
        terms.push_back({*b.term, MultiMapT(sub, std::move(t))});
    }
    return MultiAffine(doc.groups, std::move(terms));
}

inline MlmapDocument document_of(const MultiMapT& phi) {
    MlmapDocument d;
    d.groups = phi.domains();
    d.blocks.push_back(detail::block_of<TorusValue>(phi.tensor(), phi.dims(), std::nullopt));
    return d;
}

inline MlmapDocument document_of(const MultiMapG& f) {
    MlmapDocument d;
    d.groups = f.domains();
    d.codomain = f.codomain();
    d.blocks.push_back(detail::block_of<GroupElement>(f.tensor(), f.dims(), std::nullopt));
    return d;
}

inline MlmapDocument document_of(const MultiAffine& phi) {
    MlmapDocument d;
    d.groups = phi.domains();
    for (const auto& t : phi.terms())
        d.blocks.push_back(detail::block_of<TorusValue>(t.map.tensor(), t.map.dims(), t.axes));
    if (d.blocks.empty()) d.blocks.push_back({Axes{0}, {}});
    return d;
}

// ---------------------------------------------------------------------------
// Certificates

inline RankCertificate parse_mlcert(const std::string& text) {
    const auto lines = detail::split_lines(text);
    RankCertificate cert;
    bool saw_magic = false;
    std::size_t li = 0;

    // Reads `left`/`right` ... `end` starting at li; returns the parsed factor map.
    auto embedded = [&](const char* name, std::int64_t q) {
        while (li < lines.size() && detail::tokenize(lines[li]).empty()) ++li;
        if (li == lines.size()) throw ParseError(std::string("missing '") + name + "' block", li, 1);
        const auto open = detail::tokenize(lines[li]);
        if (open.size() != 1 || open[0].text != name)
            throw ParseError(std::string("expected '") + name + "'", li + 1, open[0].column);
        const std::size_t begin = ++li;
        while (li < lines.size()) {
            const auto t = detail::tokenize(lines[li]);
            if (t.size() == 1 && t[0].text == "end") break;
            ++li;
        }
        if (li == lines.size()) throw ParseError(std::string("unterminated '") + name + "' block", begin, 1);
        const MlmapDocument d = detail::parse_mlmap_lines(lines, begin, li, begin + 1);
        ++li;
        if (d.is_torus() || !(*d.codomain == cyclic_group(q)))
            throw ParseError(std::string(name) + " factor must map into Z/" + std::to_string(q), begin + 1, 1);
        return to_group_valued(d);
    };

    while (li < lines.size()) {
        const auto toks = detail::tokenize(lines[li]);
        const std::size_t ln = li + 1;
        if (toks.empty()) {
            ++li;
            continue;
        }
        if (!saw_magic) {
            if (toks[0].text != "mlcert" || toks.size() != 2 || toks[1].text != "1")
                throw ParseError("expected 'mlcert 1'", ln, toks[0].column);
            saw_magic = true;
            ++li;
            continue;
        }
        if (toks[0].text != "term" || toks.size() != 3 || toks[1].text.rfind("q=", 0) != 0 ||
            toks[2].text.rfind("I=", 0) != 0)
            throw ParseError("expected 'term q=<q> I=<axes>'", ln, toks[0].column);
        const std::int64_t q = detail::parse_int({toks[1].text.substr(2), toks[1].column + 2}, ln, "a modulus");
        if (q < 2 || !as_prime_power(q)) throw ParseError("q must be a prime power", ln, toks[1].column);
        const Axes axes = detail::parse_axes({toks[2].text.substr(2), toks[2].column + 2}, ln, 64);
        ++li;
        MultiMapG left = embedded("left", q);
        MultiMapG right = embedded("right", q);
        if (left.arity() != axes.size())
            throw ParseError("left factor arity differs from |I|", ln, toks[2].column);
        cert.terms.push_back({q, axes, std::move(left), std::move(right)});
    }
    if (!saw_magic) throw ParseError("empty certificate", 1, 1);
    return cert;
}

inline std::string emit_mlcert(const RankCertificate& cert) {
    std::string s = "mlcert 1\n";
    for (const auto& t : cert.terms) {
        s += "term q=" + std::to_string(t.q) + " I=" + axes_str(t.axes) + "\n";
        s += "left\n" + emit_mlmap(document_of(t.left)) + "end\n";
        s += "right\n" + emit_mlmap(document_of(t.right)) + "end\n";
    }
    return s;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace abelbias
