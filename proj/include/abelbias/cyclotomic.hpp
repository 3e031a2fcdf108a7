#pragma once

// Exact arithmetic in cyclotomic fields Q(zeta_N), used for complex biases.
//
// A CycloValue is (sum_j c_j zeta_N^j) / den with j < phi(N), i.e. a vector in
// the power basis of Z[zeta_N] reduced modulo Phi_N. Values are always stored
// at the smallest level N at which they live, so equality is a plain
// comparison of (level, coeffs, den).
//
// Numerical enclosures are rigorous: MPFR evaluates cos/sin with directed
// rounding and every operation widens outward.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <mpfr.h>

#include "arith.hpp"
#include "torus.hpp"

namespace abelbias {

using IntPoly = std::vector<Integer>;  // coefficients, lowest degree first

namespace detail {

inline void trim(IntPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

/// Exact division of a by a monic b; throws if the remainder is nonzero.
inline IntPoly poly_divide_exact(IntPoly a, const IntPoly& b) {
    trim(a);
    const std::size_t db = b.size() - 1;
    if (a.size() < b.size()) {
        if (!a.empty()) throw InputError("poly_divide_exact: nonzero remainder");
        return {};
    }
    IntPoly q(a.size() - db, 0);
    for (std::size_t i = a.size(); i-- > db;) {
        const Integer c = a[i];
        if (c == 0) continue;
        q[i - db] = c;
        for (std::size_t k = 0; k <= db; ++k) a[i - db + k] -= c * b[k];
    }
    trim(a);
    if (!a.empty()) throw InputError("poly_divide_exact: nonzero remainder");
    return q;
}

/// p mod m for monic m, result padded to deg m coefficients.
inline IntPoly poly_mod_monic(IntPoly p, const IntPoly& m) {
    const std::size_t dm = m.size() - 1;
    for (std::size_t i = p.size(); i-- > dm;) {
        const Integer c = p[i];
        if (c == 0) continue;
        for (std::size_t k = 0; k <= dm; ++k) p[i - dm + k] -= c * m[k];
    }
    p.resize(dm, 0);
    return p;
}

}  // namespace detail

/// Phi_N, computed by dividing x^N - 1 by Phi_d for every proper divisor d of N. Cached.
inline const IntPoly& cyclotomic_polynomial(std::int64_t n) {
    if (n < 1) throw InputError("cyclotomic_polynomial: N must be positive");
    static std::mutex mu;
    static std::map<std::int64_t, IntPoly> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    IntPoly p(static_cast<std::size_t>(n) + 1, 0);
    p[0] = -1;
    p[static_cast<std::size_t>(n)] = 1;
    for (auto d : divisors(n))
        if (d < n) p = detail::poly_divide_exact(std::move(p), cyclotomic_polynomial(d));
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(n, std::move(p)).first->second;  // std::map references are stable
}

class CycloValue;
CycloValue cyclo_add(const CycloValue& a, const CycloValue& b);
CycloValue cyclo_mul(const CycloValue& a, const CycloValue& b);

namespace detail {

/// Lift matrix columns x^{j N/M} mod Phi_N (j < phi(M)) and a square invertible row
/// selection, used to detect whether a level-N value lives at level M.
struct Descent {
    bool unit_columns = false;            // columns are e_{j N/M}
    std::vector<IntPoly> columns;         // each of length phi(N)
    std::vector<std::size_t> pivot_rows;  // phi(M) rows
    std::vector<std::vector<Fraction>> pivot_inverse;
};

inline const Descent& descent(std::int64_t n, std::int64_t m) {
    static std::mutex mu;
    static std::map<std::pair<std::int64_t, std::int64_t>, Descent> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find({n, m}); it != cache.end()) return it->second;
    }
    Descent d;
    const std::int64_t step = n / m;
    const auto phim = static_cast<std::size_t>(euler_phi(m));
    const auto step_primes = factorize(step);
    d.unit_columns = std::all_of(step_primes.begin(), step_primes.end(),
                                 [m](const PrimePower& pp) { return m % pp.prime == 0; });
    if (!d.unit_columns) {
        const IntPoly& phin = cyclotomic_polynomial(n);
        for (std::size_t j = 0; j < phim; ++j) {
            IntPoly x(static_cast<std::size_t>(j * step) + 1, 0);
            x.back() = 1;
            d.columns.push_back(poly_mod_monic(std::move(x), phin));
        }
        // Gaussian elimination on the transposed system to pick pivot rows.
        const std::size_t rows = d.columns.front().size();
        std::vector<std::vector<Fraction>> a(rows, std::vector<Fraction>(phim));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < phim; ++c) a[r][c] = Fraction(d.columns[c][r]);
        std::vector<std::size_t> used;
        std::vector<std::vector<Fraction>> echelon;
        for (std::size_t r = 0; r < rows && used.size() < phim; ++r) {
            std::vector<Fraction> v = a[r];
            for (std::size_t e = 0; e < echelon.size(); ++e) {
                // find pivot col of echelon[e]
                std::size_t pc = 0;
                while (echelon[e][pc] == 0) ++pc;
                if (v[pc] != 0) {
                    const Fraction f = v[pc] / echelon[e][pc];
                    for (std::size_t c = 0; c < phim; ++c) v[c] -= f * echelon[e][c];
                }
            }
            if (std::any_of(v.begin(), v.end(), [](const Fraction& x) { return x != 0; })) {
                echelon.push_back(v);
                used.push_back(r);
            }
        }
        d.pivot_rows = used;
        // invert the square matrix S[i][c] = a[pivot_rows[i]][c]
        std::vector<std::vector<Fraction>> s(phim, std::vector<Fraction>(2 * phim, 0));
        for (std::size_t i = 0; i < phim; ++i) {
            for (std::size_t c = 0; c < phim; ++c) s[i][c] = a[used[i]][c];
            s[i][phim + i] = 1;
        }
        for (std::size_t c = 0; c < phim; ++c) {
            std::size_t piv = c;
            while (s[piv][c] == 0) ++piv;
            std::swap(s[piv], s[c]);
            const Fraction inv = 1 / s[c][c];
            for (auto& x : s[c]) x *= inv;
            for (std::size_t r = 0; r < phim; ++r) {
                if (r == c || s[r][c] == 0) continue;
                const Fraction f = s[r][c];
                for (std::size_t k = 0; k < 2 * phim; ++k) s[r][k] -= f * s[c][k];
            }
        }
        d.pivot_inverse.assign(phim, std::vector<Fraction>(phim));
        for (std::size_t i = 0; i < phim; ++i)
            for (std::size_t c = 0; c < phim; ++c) d.pivot_inverse[i][c] = s[i][phim + c];
    }
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(std::make_pair(n, m), std::move(d)).first->second;
}

}  // namespace detail

/// Exact element of Q(zeta_level): (sum_j coeffs[j] zeta^j) / den.
class CycloValue {
public:
    CycloValue() : level_(1), coeffs_{0}, den_(1) {}
    explicit CycloValue(const Fraction& f) : level_(1), coeffs_{f.get_num()}, den_(f.get_den()) {}
    explicit CycloValue(std::int64_t v) : CycloValue(Fraction(to_integer(v))) {}

    /// Builds a value from an arbitrary polynomial in zeta_level and normalizes it.
    static CycloValue from_poly(std::int64_t level, IntPoly poly, Integer den = 1) {
        if (level < 1) throw InputError("cyclotomic level must be positive");
        if (den == 0) throw InputError("cyclotomic value with zero denominator");
        CycloValue v;
        v.level_ = level;
        v.coeffs_ = detail::poly_mod_monic(std::move(poly), cyclotomic_polynomial(level));
        v.den_ = std::move(den);
        v.normalize();
        return v;
    }

    /// zeta_level^power.
    static CycloValue root_of_unity(std::int64_t level, std::int64_t power) {
        IntPoly p(static_cast<std::size_t>(mod(power, level)) + 1, 0);
        p.back() = 1;
        return from_poly(level, std::move(p));
    }

    std::int64_t level() const noexcept { return level_; }
    const std::vector<Integer>& coeffs() const noexcept { return coeffs_; }
    const Integer& den() const noexcept { return den_; }

    bool is_zero() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Integer& c) { return c == 0; });
    }
    bool is_rational() const { return level_ == 1; }
    Fraction to_fraction() const {
        if (!is_rational()) throw InputError("cyclotomic value is not rational: " + str());
        return make_fraction(coeffs_[0], den_);
    }

    /// Coefficients at level `target` (a multiple of level()), not normalized.
    IntPoly lifted_to(std::int64_t target) const {
        if (target % level_ != 0) throw InputError("cannot lift to a level that is not a multiple");
        const std::int64_t step = target / level_;
        IntPoly p(coeffs_.size() == 0 ? 1 : static_cast<std::size_t>((coeffs_.size() - 1) * step) + 1, 0);
        for (std::size_t j = 0; j < coeffs_.size(); ++j) p[static_cast<std::size_t>(j * step)] = coeffs_[j];
        return detail::poly_mod_monic(std::move(p), cyclotomic_polynomial(target));
    }

    std::string str() const {
        std::string s = "cyclo(" + std::to_string(level_) + ";";
        for (std::size_t j = 0; j < coeffs_.size(); ++j) {
            if (j) s += ",";
            s += coeffs_[j].get_str();
        }
        return s + ";" + den_.get_str() + ")";
    }

    friend bool operator==(const CycloValue& a, const CycloValue& b) {
        return a.level_ == b.level_ && a.den_ == b.den_ && a.coeffs_ == b.coeffs_;
    }
    /// Canonical-form order (level, coefficients, denominator); not a numeric order.
    friend std::strong_ordering operator<=>(const CycloValue& a, const CycloValue& b) {
        if (auto c = a.level_ <=> b.level_; c != 0) return c;
        for (std::size_t j = 0; j < a.coeffs_.size(); ++j) {
            const int c = cmp(a.coeffs_[j], b.coeffs_[j]);
            if (c) return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
        }
        const int c = cmp(a.den_, b.den_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend CycloValue operator+(const CycloValue& a, const CycloValue& b) { return cyclo_add(a, b); }
    friend CycloValue operator*(const CycloValue& a, const CycloValue& b) { return cyclo_mul(a, b); }
    friend CycloValue operator-(const CycloValue& a) {
        CycloValue r = a;
        for (auto& c : r.coeffs_) c = -c;
        return r;
    }
    friend CycloValue operator-(const CycloValue& a, const CycloValue& b) { return a + (-b); }

private:
    void normalize() {
        if (is_zero()) {
            *this = CycloValue();
            return;
        }
        descend();
        Integer g = den_;
        for (const auto& c : coeffs_) g = gcd(g, c);
        if (den_ < 0) g = -abs(g);
        if (g != 1) {
            for (auto& c : coeffs_) c /= g;
            den_ /= g;
        }
    }

    /// Moves to the smallest level M | N whose field contains the value.
    void descend() {
        for (auto m : divisors(level_)) {
            if (m == level_) return;
            const auto& d = detail::descent(level_, m);
            const std::int64_t step = level_ / m;
            const auto phim = static_cast<std::size_t>(euler_phi(m));
            std::vector<Integer> c(phim);
            bool ok = true;
            if (d.unit_columns) {
                for (std::size_t i = 0; i < coeffs_.size() && ok; ++i)
                    if (i % static_cast<std::size_t>(step) != 0 && coeffs_[i] != 0) ok = false;
                for (std::size_t j = 0; j < phim && ok; ++j) c[j] = coeffs_[j * static_cast<std::size_t>(step)];
            } else {
                for (std::size_t j = 0; j < phim && ok; ++j) {
                    Fraction s = 0;
                    for (std::size_t i = 0; i < phim; ++i)
                        s += d.pivot_inverse[j][i] * Fraction(coeffs_[d.pivot_rows[i]]);
                    s.canonicalize();
                    if (s.get_den() != 1) ok = false;
                    else c[j] = s.get_num();
                }
                for (std::size_t r = 0; r < coeffs_.size() && ok; ++r) {
                    Integer acc = 0;
                    for (std::size_t j = 0; j < phim; ++j) acc += d.columns[j][r] * c[j];
                    if (acc != coeffs_[r]) ok = false;
                }
            }
            if (ok) {
                level_ = m;
                coeffs_ = std::move(c);
                return;
            }
        }
    }

    std::int64_t level_;
    std::vector<Integer> coeffs_;
    Integer den_;
};

inline CycloValue cyclo_add(const CycloValue& a, const CycloValue& b) {
    const std::int64_t l = checked_lcm(a.level(), b.level());
    IntPoly pa = a.lifted_to(l), pb = b.lifted_to(l);
    for (std::size_t j = 0; j < pa.size(); ++j) pa[j] = pa[j] * b.den() + pb[j] * a.den();
    return CycloValue::from_poly(l, std::move(pa), a.den() * b.den());
}

inline CycloValue cyclo_mul(const CycloValue& a, const CycloValue& b) {
    const std::int64_t l = checked_lcm(a.level(), b.level());
    const IntPoly pa = a.lifted_to(l), pb = b.lifted_to(l);
    IntPoly prod(pa.size() + pb.size() - 1, 0);
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i] == 0) continue;
        for (std::size_t j = 0; j < pb.size(); ++j) prod[i + j] += pa[i] * pb[j];
    }
    return CycloValue::from_poly(l, std::move(prod), a.den() * b.den());
}

/// Complex conjugation zeta -> zeta^{N-1}.
inline CycloValue cyclo_conj(const CycloValue& a) {
    const std::int64_t n = a.level();
    IntPoly p(static_cast<std::size_t>(n), 0);
    for (std::size_t j = 0; j < a.coeffs().size(); ++j)
        p[static_cast<std::size_t>(mod(-static_cast<std::int64_t>(j), n))] += a.coeffs()[j];
    return CycloValue::from_poly(n, std::move(p), a.den());
}

inline bool cyclo_eq(const CycloValue& a, const CycloValue& b) { return a == b; }

inline CycloValue cyclo_abs_sq(const CycloValue& a) { return cyclo_mul(a, cyclo_conj(a)); }

/// Scalar multiple by a rational.
inline CycloValue cyclo_scale(const CycloValue& a, const Fraction& f) { return cyclo_mul(a, CycloValue(f)); }

/// e(t) = exp(2 pi i t) as zeta_den^num.
inline CycloValue cyclo_of_torus(const TorusValue& t) {
    const std::int64_t n = to_int64(t.den());
    return CycloValue::root_of_unity(n, to_int64(t.num()));
}

/// sum_r counts[r] zeta_n^r / den; the fast path for exponential sums over histograms.
inline CycloValue cyclo_from_histogram(std::int64_t n, const std::vector<std::int64_t>& counts,
                                       const Integer& den) {
    IntPoly p(counts.size(), 0);
    for (std::size_t r = 0; r < counts.size(); ++r) p[r] = to_integer(counts[r]);
    return CycloValue::from_poly(n, std::move(p), den);
}

// ---------------------------------------------------------------------------
// Certified enclosures

namespace detail {

/// RAII mpfr_t.
class Mp {
public:
    explicit Mp(mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    Mp(const Mp& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Mp& operator=(const Mp& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    ~Mp() { mpfr_clear(v_); }
    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

/// Closed real interval [lo, hi] with outward rounding.
struct Interval {
    Mp lo, hi;
    explicit Interval(mpfr_prec_t prec) : lo(prec), hi(prec) {}
};

inline void interval_add(Interval& acc, const Interval& x) {
    mpfr_add(acc.lo.get(), acc.lo.get(), x.lo.get(), MPFR_RNDD);
    mpfr_add(acc.hi.get(), acc.hi.get(), x.hi.get(), MPFR_RNDU);
}

inline void interval_mul_z(Interval& x, const Integer& c) {
    Mp lo(mpfr_get_prec(x.lo.get())), hi(mpfr_get_prec(x.lo.get()));
    if (c >= 0) {
        mpfr_mul_z(lo.get(), x.lo.get(), c.get_mpz_t(), MPFR_RNDD);
        mpfr_mul_z(hi.get(), x.hi.get(), c.get_mpz_t(), MPFR_RNDU);
    } else {
        mpfr_mul_z(lo.get(), x.hi.get(), c.get_mpz_t(), MPFR_RNDD);
        mpfr_mul_z(hi.get(), x.lo.get(), c.get_mpz_t(), MPFR_RNDU);
    }
    x.lo = lo;
    x.hi = hi;
}

inline void interval_div_z(Interval& x, const Integer& d) {  // d > 0
    mpfr_div_z(x.lo.get(), x.lo.get(), d.get_mpz_t(), MPFR_RNDD);
    mpfr_div_z(x.hi.get(), x.hi.get(), d.get_mpz_t(), MPFR_RNDU);
}

/// Enclosures of cos(2 pi j / n) and sin(2 pi j / n).
inline std::pair<Interval, Interval> unit_root(std::int64_t j, std::int64_t n, mpfr_prec_t prec) {
    Interval ang(prec);
    mpfr_const_pi(ang.lo.get(), MPFR_RNDD);
    mpfr_const_pi(ang.hi.get(), MPFR_RNDU);
    mpfr_mul_si(ang.lo.get(), ang.lo.get(), 2 * j, MPFR_RNDD);
    mpfr_mul_si(ang.hi.get(), ang.hi.get(), 2 * j, MPFR_RNDU);
    mpfr_div_si(ang.lo.get(), ang.lo.get(), n, MPFR_RNDD);
    mpfr_div_si(ang.hi.get(), ang.hi.get(), n, MPFR_RNDU);
    // Both cos and sin are 1-Lipschitz: f([lo, hi]) lies within f(lo) +- (hi - lo).
    Mp width(prec);
    mpfr_sub(width.get(), ang.hi.get(), ang.lo.get(), MPFR_RNDU);
    Interval c(prec), s(prec);
    mpfr_cos(c.lo.get(), ang.lo.get(), MPFR_RNDD);
    mpfr_cos(c.hi.get(), ang.lo.get(), MPFR_RNDU);
    mpfr_sin(s.lo.get(), ang.lo.get(), MPFR_RNDD);
    mpfr_sin(s.hi.get(), ang.lo.get(), MPFR_RNDU);
    for (Interval* x : {&c, &s}) {
        mpfr_sub(x->lo.get(), x->lo.get(), width.get(), MPFR_RNDD);
        mpfr_add(x->hi.get(), x->hi.get(), width.get(), MPFR_RNDU);
    }
    return {std::move(c), std::move(s)};
}

inline std::pair<Interval, Interval> enclose(const CycloValue& a, mpfr_prec_t prec) {
    Interval re(prec), im(prec);
    const std::int64_t n = a.level();
    for (std::size_t j = 0; j < a.coeffs().size(); ++j) {
        if (a.coeffs()[j] == 0) continue;
        auto [c, s] = unit_root(static_cast<std::int64_t>(j), n, prec);
        interval_mul_z(c, a.coeffs()[j]);
        interval_mul_z(s, a.coeffs()[j]);
        interval_add(re, c);
        interval_add(im, s);
    }
    interval_div_z(re, a.den());
    interval_div_z(im, a.den());
    return {std::move(re), std::move(im)};
}

/// Sign of a real-valued cyclotomic number, doubling precision from 64 up to 256 bits.
inline int real_sign(const CycloValue& a) {
    if (a.is_zero()) return 0;
    if (a.is_rational()) return sgn(a.coeffs()[0]) * sgn(a.den());
    for (mpfr_prec_t prec = 64; prec <= 256; prec *= 2) {
        auto [re, im] = enclose(a, prec);
        if (mpfr_sgn(re.lo.get()) > 0) return 1;
        if (mpfr_sgn(re.hi.get()) < 0) return -1;
    }
    throw UndecidedComparison("could not separate " + a.str() + " from 0 within 256 bits");
}

}  // namespace detail

/// Closed real interval in double precision, rounded outward.
struct RealEnclosure {
    double lo = 0, hi = 0;
    double mid() const { return lo / 2 + hi / 2; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Rectangle enclosing a complex value.
struct ComplexEnclosure {
    RealEnclosure re, im;

    double center_re() const { return re.mid(); }
    double center_im() const { return im.mid(); }
    /// Upper bound on the distance from the center to any point of the rectangle.
    double radius() const {
        const double dr = std::max(re.hi - center_re(), center_re() - re.lo);
        const double di = std::max(im.hi - center_im(), center_im() - im.lo);
        return std::nextafter(std::hypot(dr, di) * (1 + 1e-15), INFINITY);
    }
};

namespace detail {

inline RealEnclosure to_double(const Interval& x) {
    return {mpfr_get_d(x.lo.get(), MPFR_RNDD), mpfr_get_d(x.hi.get(), MPFR_RNDU)};
}

}  // namespace detail

/// Certified enclosure of the complex value; `precision_bits` sets the working precision.
inline ComplexEnclosure cyclo_approx(const CycloValue& a, long precision_bits = 128) {
    auto [re, im] = detail::enclose(a, precision_bits);
    return {detail::to_double(re), detail::to_double(im)};
}

/// Certified enclosure of |a|.
inline RealEnclosure cyclo_modulus(const CycloValue& a, long precision_bits = 128) {
    auto [re, im] = detail::enclose(cyclo_abs_sq(a), precision_bits);
    if (mpfr_sgn(re.lo.get()) < 0) mpfr_set_zero(re.lo.get(), 1);
    mpfr_sqrt(re.lo.get(), re.lo.get(), MPFR_RNDD);
    mpfr_sqrt(re.hi.get(), re.hi.get(), MPFR_RNDU);
    return detail::to_double(re);
}

/// Compares |a| with |b| exactly when equal, otherwise by certified enclosures.
/// Returns -1, 0 or 1; throws UndecidedComparison past 256 bits.
inline int compare_modulus(const CycloValue& a, const CycloValue& b) {
    const CycloValue diff = cyclo_abs_sq(a) - cyclo_abs_sq(b);
    return detail::real_sign(diff);
}

/// Compares |a| with a nonnegative rational r.
inline int compare_modulus(const CycloValue& a, const Fraction& r) {
    return compare_modulus(a, CycloValue(r));
}

}  // namespace abelbias
