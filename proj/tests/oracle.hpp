#pragma once

// Reference computations that share no code path with the library engines: pointwise
// evaluation in exact rationals, literal enumeration, and floating-point character sums.

#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <vector>

#include "abelbias/abelbias.hpp"

namespace oracle {

using namespace abelbias;

/// phi(x) = sum over generator multi-indices of entry * prod_i x_i[j_i], reduced mod 1.
inline Fraction value(const MultiMapT& phi, const std::vector<GroupElement>& x) {
    Fraction acc = 0;
    std::vector<std::size_t> m(phi.arity(), 0);
    const auto dims = phi.dims();
    for (std::size_t e = 0; e < phi.tensor().size(); ++e) {
        std::size_t r = e;
        for (std::size_t a = dims.size(); a-- > 0;) {
            m[a] = r % dims[a];
            r /= dims[a];
        }
        Fraction term = phi.tensor()[e].to_fraction();
        for (std::size_t a = 0; a < m.size(); ++a) term *= Fraction(static_cast<long>(x[a].coords[m[a]]));
        acc += term;
    }
    Integer fl;
    mpz_fdiv_q(fl.get_mpz_t(), acc.get_num_mpz_t(), acc.get_den_mpz_t());
    acc -= Fraction(fl);
    acc.canonicalize();
    return acc;
}

inline Fraction value(const MultiAffine& phi, const std::vector<GroupElement>& x) {
    Fraction acc = 0;
    for (const auto& t : phi.terms()) {
        std::vector<GroupElement> sub;
        for (auto a : t.axes) sub.push_back(x[a]);
        acc += value(t.map, sub);
    }
    Integer fl;
    mpz_fdiv_q(fl.get_mpz_t(), acc.get_num_mpz_t(), acc.get_den_mpz_t());
    acc -= Fraction(fl);
    acc.canonicalize();
    return acc;
}

/// All elements of A, by an odometer on the coordinates.
inline std::vector<GroupElement> elements(const FinAbGroup& a) {
    std::vector<GroupElement> out;
    GroupElement x{std::vector<std::int64_t>(a.rank(), 0)};
    for (;;) {
        out.push_back(x);
        std::size_t c = a.rank();
        while (c > 0) {
            --c;
            if (++x.coords[c] < a.factor(c)) break;
            x.coords[c] = 0;
            if (c == 0) return out;
        }
        if (a.rank() == 0) return out;
    }
}

inline std::vector<std::vector<GroupElement>> points(const std::vector<FinAbGroup>& doms) {
    std::vector<std::vector<GroupElement>> pts{{}};
    for (const auto& g : doms) {
        std::vector<std::vector<GroupElement>> next;
        const auto els = elements(g);
        for (const auto& p : pts)
            for (const auto& x : els) {
                auto q = p;
                q.push_back(x);
                next.push_back(std::move(q));
            }
        pts = std::move(next);
    }
    return pts;
}

/// Multilinear bias as the fraction of x_{<k} for which y -> phi(x, y) vanishes at every y.
inline Fraction bias(const MultiMapT& phi) {
    const std::size_t k = phi.arity();
    std::vector<FinAbGroup> head(phi.domains().begin(), phi.domains().end() - 1);
    const auto ys = elements(phi.domain(k - 1));
    const auto xs = points(head);
    std::int64_t zero = 0;
    for (auto x : xs) {
        bool all = true;
        x.push_back({});
        for (const auto& y : ys) {
            x.back() = y;
            if (value(phi, x) != 0) {
                all = false;
                break;
            }
        }
        zero += all;
    }
    return make_fraction(zero, static_cast<std::int64_t>(xs.size()));
}

/// Floating-point character sum E e(phi(x)).
template <class Map>
std::complex<double> numeric_bias(const Map& phi) {
    std::complex<long double> s = 0;
    const auto pts = points(phi.domains());
    for (const auto& x : pts) {
        const long double t = value(phi, x).get_d();
        s += std::polar<long double>(1.0L, 2 * 3.14159265358979323846264338327950288L * t);
    }
    s /= static_cast<long double>(pts.size());
    return {static_cast<double>(s.real()), static_cast<double>(s.imag())};
}

/// Whether the certified enclosure of c contains z up to tol.
inline bool encloses(const CycloValue& c, std::complex<double> z, double tol) {
    const auto e = cyclo_approx(c, 128);
    return std::abs(e.center_re() - z.real()) <= e.radius() + tol && std::abs(e.center_im() - z.imag()) <= e.radius() + tol;
}

/// The image of h as a set of coordinate vectors.
inline std::set<std::vector<std::int64_t>> image_set(const GroupHom& h) {
    std::set<std::vector<std::int64_t>> s;
    for (const auto& x : elements(h.domain)) s.insert(apply(h, x).coords);
    return s;
}

}  // namespace oracle
