#pragma once

// Multilinear maps A_1 x ... x A_k -> T or -> B, stored as dense tensors of
// values on generator tuples, plus multiaffine maps and the restriction,
// pullback, kernel, splitting and composition machinery built on them.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "group.hpp"
#include "tensor.hpp"
#include "torus.hpp"

namespace abelbias {

using Axes = std::vector<std::size_t>;  // 0-based axis indices, strictly increasing

namespace detail {

inline tensor::Dims dims_of(const std::vector<FinAbGroup>& domains) {
    tensor::Dims d;
    for (const auto& g : domains) d.push_back(g.rank());
    return d;
}

/// gcd of the generator orders addressed by a multi-index: every admissible entry is
/// killed by it.
inline std::int64_t entry_annihilator(const std::vector<FinAbGroup>& domains,
                                      const std::vector<std::size_t>& multi) {
    std::int64_t g = 0;
    for (std::size_t a = 0; a < domains.size(); ++a) g = std::gcd(g, domains[a].factor(multi[a]));
    return g;
}

inline std::string multi_str(const std::vector<std::size_t>& multi) {
    std::string s = "(";
    for (std::size_t a = 0; a < multi.size(); ++a) {
        if (a) s += ",";
        s += std::to_string(multi[a] + 1);
    }
    return s + ")";
}

inline void check_axes(const Axes& axes, std::size_t k) {
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (axes[i] >= k) throw InputError("axis " + std::to_string(axes[i] + 1) + " out of range");
        if (i && axes[i] <= axes[i - 1]) throw InputError("axis list must be strictly increasing");
    }
}

inline Axes complement(const Axes& axes, std::size_t k) {
    Axes out;
    for (std::size_t a = 0; a < k; ++a)
        if (!std::binary_search(axes.begin(), axes.end(), a)) out.push_back(a);
    return out;
}

inline std::vector<FinAbGroup> select(const std::vector<FinAbGroup>& domains, const Axes& axes) {
    std::vector<FinAbGroup> out;
    for (auto a : axes) out.push_back(domains[a]);
    return out;
}

}  // namespace detail

inline std::string axes_str(const Axes& axes) {
    std::string s;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(axes[i] + 1);
    }
    return s;
}

/// Multilinear map into T. tensor[j_1..j_k] = phi(e_{1 j_1}, ..., e_{k j_k}).
class MultiMapT {
public:
    MultiMapT(std::vector<FinAbGroup> domains, std::vector<TorusValue> tensor)
        : domains_(std::move(domains)), tensor_(std::move(tensor)) {
        if (domains_.empty()) throw InputError("multilinear map needs arity k >= 1");
        const auto dims = detail::dims_of(domains_);
        if (tensor_.size() != tensor::volume(dims))
            throw InputError("tensor has " + std::to_string(tensor_.size()) + " entries, expected " +
                             std::to_string(tensor::volume(dims)));
        tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
            const auto& v = tensor_[tensor::flatten(m, dims)];
            const std::int64_t g = detail::entry_annihilator(domains_, m);
            if (!(to_integer(g) % v.den() == 0))
                throw InputError("entry " + detail::multi_str(m) + " = " + v.str() +
                                 " is not killed by the generator orders (gcd " + std::to_string(g) + ")");
        });
    }

    static MultiMapT zero(std::vector<FinAbGroup> domains) {
        const auto n = tensor::volume(detail::dims_of(domains));
        return MultiMapT(std::move(domains), std::vector<TorusValue>(n));
    }

    std::size_t arity() const noexcept { return domains_.size(); }
    const std::vector<FinAbGroup>& domains() const noexcept { return domains_; }
    const FinAbGroup& domain(std::size_t i) const { return domains_.at(i); }
    const std::vector<TorusValue>& tensor() const noexcept { return tensor_; }
    tensor::Dims dims() const { return detail::dims_of(domains_); }
    const TorusValue& entry(const std::vector<std::size_t>& multi) const {
        return tensor_.at(tensor::flatten(multi, dims()));
    }

    bool is_zero() const {
        return std::all_of(tensor_.begin(), tensor_.end(), [](const TorusValue& v) { return v.is_zero(); });
    }

    /// Total number of points of A_1 x ... x A_k (saturating at 2^62).
    std::int64_t domain_size() const {
        std::int64_t s = 1;
        for (const auto& g : domains_) {
            if (s > kMaxGroupOrder / g.order()) return kMaxGroupOrder;
            s *= g.order();
        }
        return s;
    }

    /// Residues over the common denominator of all entries.
    tensor::Residues residues(std::int64_t modulus = 0) const {
        if (modulus == 0) {
            modulus = 1;
            for (const auto& v : tensor_) modulus = checked_lcm(modulus, to_int64(v.den()));
        }
        tensor::Residues r;
        r.modulus = modulus;
        r.dims = dims();
        r.data.reserve(tensor_.size());
        for (const auto& v : tensor_) {
            if (to_integer(modulus) % v.den() != 0) throw InputError("residues: modulus too small");
            r.data.push_back(to_int64(v.num() * (to_integer(modulus) / v.den())));
        }
        return r;
    }

    static MultiMapT from_residues(std::vector<FinAbGroup> domains, const tensor::Residues& r) {
        std::vector<TorusValue> t;
        t.reserve(r.data.size());
        for (auto v : r.data) t.emplace_back(v, r.modulus);
        return MultiMapT(std::move(domains), std::move(t));
    }

    friend bool operator==(const MultiMapT& a, const MultiMapT& b) {
        return a.domains_ == b.domains_ && a.tensor_ == b.tensor_;
    }

private:
    std::vector<FinAbGroup> domains_;
    std::vector<TorusValue> tensor_;
};

/// Multilinear map into a finite abelian group B.
class MultiMapG {
public:
    MultiMapG(std::vector<FinAbGroup> domains, FinAbGroup codomain, std::vector<GroupElement> tensor)
        : domains_(std::move(domains)), codomain_(std::move(codomain)), tensor_(std::move(tensor)) {
        if (domains_.empty()) throw InputError("multilinear map needs arity k >= 1");
        const auto dims = detail::dims_of(domains_);
        if (tensor_.size() != tensor::volume(dims))
            throw InputError("tensor has " + std::to_string(tensor_.size()) + " entries, expected " +
                             std::to_string(tensor::volume(dims)));
        tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
            const auto& v = tensor_[tensor::flatten(m, dims)];
            check_element(codomain_, v);
            const std::int64_t g = detail::entry_annihilator(domains_, m);
            if (!abelbias::is_zero(abelbias::scale(codomain_, v, g)))
                throw InputError("entry " + detail::multi_str(m) + " = " + to_string(v) +
                                 " is not killed by the generator orders (gcd " + std::to_string(g) + ")");
        });
    }

    static MultiMapG zero(std::vector<FinAbGroup> domains, FinAbGroup codomain) {
        const auto n = tensor::volume(detail::dims_of(domains));
        GroupElement z = zero_element(codomain);
        return MultiMapG(std::move(domains), std::move(codomain), std::vector<GroupElement>(n, z));
    }

    std::size_t arity() const noexcept { return domains_.size(); }
    const std::vector<FinAbGroup>& domains() const noexcept { return domains_; }
    const FinAbGroup& domain(std::size_t i) const { return domains_.at(i); }
    const FinAbGroup& codomain() const noexcept { return codomain_; }
    const std::vector<GroupElement>& tensor() const noexcept { return tensor_; }
    tensor::Dims dims() const { return detail::dims_of(domains_); }
    const GroupElement& entry(const std::vector<std::size_t>& multi) const {
        return tensor_.at(tensor::flatten(multi, dims()));
    }
    bool is_zero() const {
        return std::all_of(tensor_.begin(), tensor_.end(), [](const GroupElement& v) { return abelbias::is_zero(v); });
    }
    std::int64_t domain_size() const {
        std::int64_t s = 1;
        for (const auto& g : domains_) {
            if (s > kMaxGroupOrder / g.order()) return kMaxGroupOrder;
            s *= g.order();
        }
        return s;
    }

    /// One residue tensor per codomain coordinate.
    std::vector<tensor::Residues> residues() const {
        std::vector<tensor::Residues> out;
        for (std::size_t c = 0; c < codomain_.rank(); ++c) {
            tensor::Residues r;
            r.modulus = codomain_.factor(c);
            r.dims = dims();
            for (const auto& v : tensor_) r.data.push_back(v.coords[c]);
            out.push_back(std::move(r));
        }
        return out;
    }

    static MultiMapG from_residues(std::vector<FinAbGroup> domains, FinAbGroup codomain,
                                   const std::vector<tensor::Residues>& rs) {
        const auto n = tensor::volume(detail::dims_of(domains));
        std::vector<GroupElement> t(n, zero_element(codomain));
        for (std::size_t c = 0; c < rs.size(); ++c)
            for (std::size_t i = 0; i < n; ++i) t[i].coords[c] = rs[c].data[i];
        return MultiMapG(std::move(domains), std::move(codomain), std::move(t));
    }

    friend bool operator==(const MultiMapG& a, const MultiMapG& b) {
        return a.domains_ == b.domains_ && a.codomain_ == b.codomain_ && a.tensor_ == b.tensor_;
    }

private:
    std::vector<FinAbGroup> domains_;
    FinAbGroup codomain_;
    std::vector<GroupElement> tensor_;
};

/// Multiaffine map sum_I phi_I(x_I) with zero constant term.
class MultiAffine {
public:
    struct Term {
        Axes axes;
        MultiMapT map;
    };

    /// Terms with equal axis sets are summed; a nonzero constant is rejected.
    MultiAffine(std::vector<FinAbGroup> domains, std::vector<Term> terms, TorusValue constant = {})
        : domains_(std::move(domains)) {
        if (domains_.empty()) throw InputError("multiaffine map needs arity k >= 1");
        if (!constant.is_zero()) throw InputError("multiaffine maps must have zero constant term");
        for (auto& t : terms) {
            if (t.axes.empty()) throw InputError("the constant term is fixed to 0");
            detail::check_axes(t.axes, domains_.size());
            if (t.map.arity() != t.axes.size()) throw InputError("term arity does not match its axis set");
            for (std::size_t i = 0; i < t.axes.size(); ++i)
                if (!(t.map.domain(i) == domains_[t.axes[i]]))
                    throw InputError("term domain mismatch on axis " + std::to_string(t.axes[i] + 1));
            auto it = std::find_if(terms_.begin(), terms_.end(), [&](const Term& u) { return u.axes == t.axes; });
            if (it == terms_.end()) {
                terms_.push_back(std::move(t));
            } else {
                std::vector<TorusValue> sum = it->map.tensor();
                for (std::size_t e = 0; e < sum.size(); ++e) sum[e] += t.map.tensor()[e];
                it->map = MultiMapT(it->map.domains(), std::move(sum));
            }
        }
        std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
            return a.axes.size() != b.axes.size() ? a.axes.size() < b.axes.size() : a.axes < b.axes;
        });
    }

    /// The multilinear map phi viewed as a multiaffine map with the single top term.
    static MultiAffine from_multilinear(const MultiMapT& phi) {
        Axes all(phi.arity());
        std::iota(all.begin(), all.end(), std::size_t{0});
        return MultiAffine(phi.domains(), {{all, phi}});
    }

    std::size_t arity() const noexcept { return domains_.size(); }
    const std::vector<FinAbGroup>& domains() const noexcept { return domains_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }

    /// phi_I, or the zero map when absent. Requires I nonempty.
    MultiMapT term(const Axes& axes) const {
        for (const auto& t : terms_)
            if (t.axes == axes) return t.map;
        detail::check_axes(axes, arity());
        if (axes.empty()) throw InputError("the constant term is not a multilinear map");
        std::vector<FinAbGroup> d;
        for (auto a : axes) d.push_back(domains_[a]);
        return MultiMapT::zero(std::move(d));
    }

    /// Largest |I| with phi_I nontrivial (0 for the zero map).
    std::size_t degree() const {
        std::size_t d = 0;
        for (const auto& t : terms_)
            if (!t.map.is_zero()) d = std::max(d, t.axes.size());
        return d;
    }

    std::int64_t domain_size() const {
        std::int64_t s = 1;
        for (const auto& g : domains_) {
            if (s > kMaxGroupOrder / g.order()) return kMaxGroupOrder;
            s *= g.order();
        }
        return s;
    }

private:
    std::vector<FinAbGroup> domains_;
    std::vector<Term> terms_;
};

/// Ordered partition of [k] into nonempty blocks; each block sorted.
struct Partition {
    std::vector<Axes> blocks;
};

inline void check_partition(const Partition& p, std::size_t k) {
    std::vector<int> seen(k, 0);
    for (const auto& b : p.blocks) {
        if (b.empty()) throw InputError("partition blocks must be nonempty");
        detail::check_axes(b, k);
        for (auto a : b) ++seen[a];
    }
    for (std::size_t a = 0; a < k; ++a)
        if (seen[a] != 1) throw InputError("partition must cover every axis exactly once");
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

template <class Points>
void check_point(const std::vector<FinAbGroup>& domains, const Points& x) {
    if (x.size() != domains.size())
        throw InputError("point has " + std::to_string(x.size()) + " coordinates, map has arity " +
                         std::to_string(domains.size()));
    for (std::size_t i = 0; i < x.size(); ++i) check_element(domains[i], x[i]);
}

inline std::int64_t evaluate_residue(tensor::Residues t, const std::vector<GroupElement>& x) {
    for (const auto& xi : x) t = tensor::contract(t, 0, xi.coords);
    return t.data.empty() ? 0 : t.data[0];
}

}  // namespace detail

/// Repeated evaluation of one residue tensor at many points without reallocating.
class PointEvaluator {
public:
    explicit PointEvaluator(tensor::Residues r) : r_(std::move(r)) {
        std::size_t v = r_.data.size();
        for (std::size_t a = 0; a < r_.dims.size(); ++a) {
            v = r_.dims[a] ? v / r_.dims[a] : 0;
            bufs_.emplace_back(v);
        }
    }

    std::int64_t modulus() const noexcept { return r_.modulus; }

    /// phi(x) as a residue mod modulus(); x must already be checked against the domains.
    std::int64_t operator()(const std::vector<GroupElement>& x) {
        if (r_.data.empty()) return 0;
        const std::int64_t* cur = r_.data.data();
        for (std::size_t a = 0; a < r_.dims.size(); ++a) {
            coords_.resize(x[a].coords.size());
            for (std::size_t j = 0; j < coords_.size(); ++j) coords_[j] = mod(x[a].coords[j], r_.modulus);
            tensor::contract_front(cur, r_.dims[a], bufs_[a].size(), coords_.data(), r_.modulus, bufs_[a].data());
            cur = bufs_[a].data();
        }
        return cur[0];
    }

private:
    tensor::Residues r_;
    std::vector<std::vector<std::int64_t>> bufs_;
    std::vector<std::int64_t> coords_;
};

inline TorusValue evaluate(const MultiMapT& phi, const std::vector<GroupElement>& x) {
    detail::check_point(phi.domains(), x);
    const auto r = phi.residues();
    return TorusValue(detail::evaluate_residue(r, x), r.modulus);
}

inline GroupElement evaluate(const MultiMapG& f, const std::vector<GroupElement>& x) {
    detail::check_point(f.domains(), x);
    GroupElement out = zero_element(f.codomain());
    const auto rs = f.residues();
    for (std::size_t c = 0; c < rs.size(); ++c) out.coords[c] = detail::evaluate_residue(rs[c], x);
    return out;
}

inline TorusValue evaluate(const MultiAffine& phi, const std::vector<GroupElement>& x) {
    detail::check_point(phi.domains(), x);
    TorusValue s;
    for (const auto& t : phi.terms()) {
        std::vector<GroupElement> sub;
        for (auto a : t.axes) sub.push_back(x[a]);
        s += evaluate(t.map, sub);
    }
    return s;
}

/// Visits every point of A_1 x ... x A_k lexicographically.
template <class Fn>
void for_each_point(const std::vector<FinAbGroup>& domains, Fn&& fn) {
    std::vector<GroupElement> x;
    for (const auto& g : domains) x.push_back(zero_element(g));
    for (;;) {
        fn(static_cast<const std::vector<GroupElement>&>(x));
        std::size_t i = domains.size();
        for (;;) {
            if (i == 0) return;
            --i;
            if (next_element(domains[i], x[i])) break;
        }
    }
}

// ---------------------------------------------------------------------------
// Constructors and arithmetic

/// m_q(x, y) = xy / q mod 1 on (Z/q)^2, q a prime power.
inline MultiMapT m_q(std::int64_t q) {
    if (!as_prime_power(q)) throw InputError("m_q: " + std::to_string(q) + " is not a prime power");
    const FinAbGroup zq = cyclic_group(q);
    return MultiMapT({zq, zq}, {TorusValue(1, q)});
}

inline void check_same_shape(const MultiMapT& a, const MultiMapT& b) {
    if (!(a.domains() == b.domains())) throw InputError("maps have different domains");
}

inline MultiMapT add(const MultiMapT& a, const MultiMapT& b) {
    check_same_shape(a, b);
    std::vector<TorusValue> t = a.tensor();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += b.tensor()[i];
    return MultiMapT(a.domains(), std::move(t));
}

inline MultiMapT negate(const MultiMapT& a) {
    std::vector<TorusValue> t;
    for (const auto& v : a.tensor()) t.push_back(-v);
    return MultiMapT(a.domains(), std::move(t));
}

inline MultiMapT subtract(const MultiMapT& a, const MultiMapT& b) { return add(a, negate(b)); }

inline MultiMapT scale(const MultiMapT& a, std::int64_t n) {
    std::vector<TorusValue> t;
    for (const auto& v : a.tensor()) t.push_back(torus_scale(v, n));
    return MultiMapT(a.domains(), std::move(t));
}

inline MultiMapG add(const MultiMapG& a, const MultiMapG& b) {
    if (!(a.domains() == b.domains()) || !(a.codomain() == b.codomain()))
        throw InputError("maps have different shapes");
    std::vector<GroupElement> t = a.tensor();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = add(a.codomain(), t[i], b.tensor()[i]);
    return MultiMapG(a.domains(), a.codomain(), std::move(t));
}

inline MultiMapG negate(const MultiMapG& a) {
    std::vector<GroupElement> t;
    for (const auto& v : a.tensor()) t.push_back(negate(a.codomain(), v));
    return MultiMapG(a.domains(), a.codomain(), std::move(t));
}

// ---------------------------------------------------------------------------
// Restriction and pullback

/// phi_a on A_{I^c}: fixes the axes in `fixed` (strictly increasing) to the values `a`.
inline MultiMapT restrict_fix(const MultiMapT& phi, const Axes& fixed, const std::vector<GroupElement>& a) {
    detail::check_axes(fixed, phi.arity());
    if (fixed.size() == phi.arity()) throw InputError("restrict_fix: fixing every axis; use evaluate");
    if (a.size() != fixed.size()) throw InputError("restrict_fix: one value per fixed axis required");
    for (std::size_t i = 0; i < fixed.size(); ++i) check_element(phi.domain(fixed[i]), a[i]);
    auto r = phi.residues();
    for (std::size_t i = fixed.size(); i-- > 0;) r = tensor::contract(r, fixed[i], a[i].coords);
    std::vector<FinAbGroup> rest;
    for (auto ax : detail::complement(fixed, phi.arity())) rest.push_back(phi.domain(ax));
    return MultiMapT::from_residues(std::move(rest), r);
}

namespace detail {

/// Rows of the matrix whose i-th row is the coordinate vector of images[i].
inline std::vector<std::vector<std::int64_t>> image_rows(const std::vector<GroupElement>& images) {
    std::vector<std::vector<std::int64_t>> rows;
    for (const auto& y : images) rows.push_back(y.coords);
    return rows;
}

}  // namespace detail

/// phi'(x') = phi(h_1(x'_1), ..., h_k(x'_k)); with inclusions this is the restriction to
/// A'_1 x ... x A'_k.
inline MultiMapT restrict_subgroups(const MultiMapT& phi, const std::vector<GroupHom>& homs) {
    if (homs.size() != phi.arity()) throw InputError("restrict_subgroups: one homomorphism per axis required");
    auto r = phi.residues();
    std::vector<FinAbGroup> doms;
    for (std::size_t i = 0; i < homs.size(); ++i) {
        if (!(homs[i].codomain == phi.domain(i)))
            throw InputError("restrict_subgroups: homomorphism " + std::to_string(i + 1) +
                             " does not land in the map's domain");
        r = tensor::transform(r, i, detail::image_rows(homs[i].images));
        doms.push_back(homs[i].domain);
    }
    return MultiMapT::from_residues(std::move(doms), r);
}

/// Pullback of a group-valued map along homomorphisms into its domains.
inline MultiMapG pullback(const MultiMapG& f, const std::vector<GroupHom>& homs) {
    if (homs.size() != f.arity()) throw InputError("pullback: one homomorphism per axis required");
    auto rs = f.residues();
    std::vector<FinAbGroup> doms;
    for (std::size_t i = 0; i < homs.size(); ++i) {
        if (!(homs[i].codomain == f.domain(i))) throw InputError("pullback: domain mismatch");
        for (auto& r : rs) r = tensor::transform(r, i, detail::image_rows(homs[i].images));
        doms.push_back(homs[i].domain);
    }
    return MultiMapG::from_residues(std::move(doms), f.codomain(), rs);
}

/// Replaces the generators of one axis by arbitrary elements (the images need not define a
/// homomorphism; the caller guarantees the result is admissible, e.g. lifts modulo a kernel).
inline MultiMapT substitute_axis(const MultiMapT& phi, std::size_t axis, const FinAbGroup& new_domain,
                                 const std::vector<GroupElement>& images) {
    auto r = tensor::transform(phi.residues(), axis, detail::image_rows(images));
    auto doms = phi.domains();
    doms[axis] = new_domain;
    return MultiMapT::from_residues(std::move(doms), r);
}

inline MultiMapG substitute_axis(const MultiMapG& f, std::size_t axis, const FinAbGroup& new_domain,
                                 const std::vector<GroupElement>& images) {
    auto rs = f.residues();
    for (auto& r : rs) r = tensor::transform(r, axis, detail::image_rows(images));
    auto doms = f.domains();
    doms[axis] = new_domain;
    return MultiMapG::from_residues(std::move(doms), f.codomain(), rs);
}

/// Post-composition with a homomorphism of the codomain.
inline MultiMapG pushforward(const MultiMapG& f, const GroupHom& h) {
    if (!(h.domain == f.codomain())) throw InputError("pushforward: codomain mismatch");
    std::vector<GroupElement> t;
    for (const auto& v : f.tensor()) t.push_back(apply(h, v));
    return MultiMapG(f.domains(), h.codomain, std::move(t));
}

/// Reorders axes: new axis a is old axis order[a].
inline MultiMapT permute_axes(const MultiMapT& phi, const std::vector<std::size_t>& order) {
    if (order.size() != phi.arity()) throw InputError("permute_axes: order has the wrong length");
    std::vector<FinAbGroup> doms;
    for (auto a : order) doms.push_back(phi.domain(a));
    return MultiMapT::from_residues(std::move(doms), tensor::permute(phi.residues(), order));
}

inline MultiMapG permute_axes(const MultiMapG& f, const std::vector<std::size_t>& order) {
    if (order.size() != f.arity()) throw InputError("permute_axes: order has the wrong length");
    std::vector<FinAbGroup> doms;
    for (auto a : order) doms.push_back(f.domain(a));
    auto rs = f.residues();
    for (auto& r : rs) r = tensor::permute(r, order);
    return MultiMapG::from_residues(std::move(doms), f.codomain(), rs);
}

// ---------------------------------------------------------------------------
// Kernels, nondegenerate reduction, primary splitting

/// K_i = {a in A_i : phi_a == 0}, decided on generators of the other axes.
inline std::vector<GroupElement> kernel_subgroup(const MultiMapT& phi, std::size_t axis,
                                                 std::size_t budget = 1'000'000) {
    if (axis >= phi.arity()) throw InputError("kernel_subgroup: axis out of range");
    const FinAbGroup& a = phi.domain(axis);
    if (static_cast<std::uint64_t>(a.order()) > budget)
        throw BudgetExceeded("kernel_subgroup", static_cast<std::size_t>(a.order()), budget);
    std::vector<std::size_t> order{axis};
    for (std::size_t i = 0; i < phi.arity(); ++i)
        if (i != axis) order.push_back(i);
    const auto r = tensor::permute(phi.residues(), order);
    const std::size_t rest = r.dims.empty() || r.dims[0] == 0 ? 0 : r.data.size() / r.dims[0];
    std::vector<std::int64_t> buf(rest), coords(a.rank());
    std::vector<GroupElement> out;
    for_each_element(a, [&](const GroupElement& x) {
        for (std::size_t j = 0; j < x.coords.size(); ++j) coords[j] = mod(x.coords[j], r.modulus);
        tensor::contract_front(r.data.data(), a.rank(), rest, coords.data(), r.modulus, buf.data());
        if (std::all_of(buf.begin(), buf.end(), [](std::int64_t v) { return v == 0; })) out.push_back(x);
    });
    return out;
}

/// Greedy generating set of the subgroup spanned by `elements`.
inline std::vector<GroupElement> generating_set(const FinAbGroup& a, const std::vector<GroupElement>& elements) {
    std::vector<GroupElement> gens;
    std::vector<char> in_span(static_cast<std::size_t>(a.order()), 0);
    in_span[0] = 1;
    for (const auto& x : elements) {
        if (in_span[static_cast<std::size_t>(index_of(a, x))]) continue;
        gens.push_back(x);
        for (const auto& y : span_elements(a, gens)) in_span[static_cast<std::size_t>(index_of(a, y))] = 1;
    }
    return gens;
}

struct NondegenerateReduction {
    MultiMapT map;
    std::vector<GroupHom> projections;  // A_i -> A_i / K_i
};

/// Quotients every axis by its kernel until all kernels are trivial.
inline NondegenerateReduction nondegenerate_reduction(const MultiMapT& phi, std::size_t budget = 1'000'000) {
    MultiMapT cur = phi;
    std::vector<GroupHom> proj;
    for (const auto& g : phi.domains()) proj.push_back(identity_hom(g));
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < cur.arity(); ++i) {
            const auto ker = kernel_subgroup(cur, i, budget);
            if (ker.size() <= 1) continue;
            const Quotient q = quotient(cur.domain(i), generating_set(cur.domain(i), ker));
            cur = substitute_axis(cur, i, q.group, q.lifts);
            proj[i] = compose(q.projection, proj[i]);
            changed = true;
        }
    }
    return {std::move(cur), std::move(proj)};
}

struct PrimaryPart {
    std::int64_t prime;
    MultiMapT map;                             // phi_p on A_1^(p) x ... x A_k^(p)
    std::vector<PrimaryComponent> components;  // per axis
    bool zero;
};

/// phi = sum_p phi_p o projections, one part per prime dividing some |A_i|.
inline std::vector<PrimaryPart> primary_split(const MultiMapT& phi) {
    std::vector<std::int64_t> primes;
    for (const auto& g : phi.domains())
        for (auto p : g.primes()) primes.push_back(p);
    std::sort(primes.begin(), primes.end());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    std::vector<PrimaryPart> out;
    for (auto p : primes) {
        std::vector<PrimaryComponent> comps;
        std::vector<GroupHom> emb;
        for (const auto& g : phi.domains()) {
            comps.push_back(primary_component(g, p));
            emb.push_back(comps.back().embedding);
        }
        MultiMapT part = restrict_subgroups(phi, emb);
        const bool z = part.is_zero();
        out.push_back({p, std::move(part), std::move(comps), z});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Factoring through psi, group-valued maps and duality

/// psi(f_1(x_{I_1}), ..., f_l(x_{I_l})) where f_j : A_{I_j} -> B_j.
inline MultiMapT compose_through(const MultiMapT& psi, const Partition& partition,
                                 const std::vector<MultiMapG>& factors, const std::vector<FinAbGroup>& domains) {
    const std::size_t k = domains.size();
    check_partition(partition, k);
    const std::size_t l = partition.blocks.size();
    if (psi.arity() != l || factors.size() != l)
        throw InputError("compose_through: need one factor per block and psi of arity l");
    for (std::size_t b = 0; b < l; ++b) {
        const auto& blk = partition.blocks[b];
        if (factors[b].arity() != blk.size()) throw InputError("compose_through: factor arity mismatch");
        for (std::size_t i = 0; i < blk.size(); ++i)
            if (!(factors[b].domain(i) == domains[blk[i]]))
                throw InputError("compose_through: factor domain mismatch on axis " + std::to_string(blk[i] + 1));
        if (!(factors[b].codomain() == psi.domain(b)))
            throw InputError("compose_through: factor " + std::to_string(b + 1) + " codomain differs from psi");
    }
    const auto dims = detail::dims_of(domains);
    const auto psi_r = psi.residues();
    std::vector<TorusValue> t(tensor::volume(dims));
    tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
        std::vector<GroupElement> ys;
        for (std::size_t b = 0; b < l; ++b) {
            std::vector<std::size_t> sub;
            for (auto a : partition.blocks[b]) sub.push_back(m[a]);
            ys.push_back(factors[b].entry(sub));
        }
        t[tensor::flatten(m, dims)] = TorusValue(detail::evaluate_residue(psi_r, ys), psi_r.modulus);
    });
    return MultiMapT(domains, std::move(t));
}

/// phi(x, chi) = <chi, F(x)> on A_1 x ... x A_{k-1} x B^ (the dual axis is last).
inline MultiMapT from_group_map(const MultiMapG& f) {
    auto doms = f.domains();
    const FinAbGroup& b = f.codomain();
    doms.push_back(dual_group(b));
    const auto dims = detail::dims_of(doms);
    std::vector<TorusValue> t(tensor::volume(dims));
    tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
        std::vector<std::size_t> sub(m.begin(), m.end() - 1);
        const std::size_t c = m.back();
        t[tensor::flatten(m, dims)] = TorusValue(f.entry(sub).coords[c], b.factor(c));
    });
    return MultiMapT(std::move(doms), std::move(t));
}

/// Inverse of from_group_map: reads `axis` as the dual B^ of a group B with the same
/// factor list and returns F with phi(x, chi) = <chi, F(x)>.
inline MultiMapG to_group_map(const MultiMapT& phi, std::size_t axis) {
    if (phi.arity() < 2) throw InputError("to_group_map: arity must be at least 2");
    if (axis >= phi.arity()) throw InputError("to_group_map: axis out of range");
    const FinAbGroup b = phi.domain(axis);
    std::vector<FinAbGroup> doms;
    for (std::size_t i = 0; i < phi.arity(); ++i)
        if (i != axis) doms.push_back(phi.domain(i));
    const auto dims = detail::dims_of(doms);
    std::vector<GroupElement> t(tensor::volume(dims), zero_element(b));
    tensor::for_each_index(dims, [&](const std::vector<std::size_t>& m) {
        GroupElement& y = t[tensor::flatten(m, dims)];
        std::vector<std::size_t> full(phi.arity());
        for (std::size_t i = 0, s = 0; i < phi.arity(); ++i)
            if (i != axis) full[i] = m[s++];
        for (std::size_t c = 0; c < b.rank(); ++c) {
            full[axis] = c;
            const TorusValue& v = phi.entry(full);
            y.coords[c] = to_int64(v.num() * (to_integer(b.factor(c)) / v.den()));
        }
    });
    return MultiMapG(std::move(doms), b, std::move(t));
}

inline MultiMapG to_group_map(const MultiMapT& phi) { return to_group_map(phi, phi.arity() - 1); }

}  // namespace abelbias
