#pragma once

// Integer helpers shared by every module. Exact scalars are GMP-backed
// (Integer, Fraction); group coordinates and residues are 64-bit with
// 128-bit intermediates.

#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "errors.hpp"

namespace abelbias {

using Integer = mpz_class;
using Fraction = mpq_class;

/// Cyclic factor orders are capped so that residue products fit in 128-bit intermediates
/// and every group order stays below 2^62.
inline constexpr std::int64_t kMaxFactorOrder = (std::int64_t{1} << 31) - 1;
inline constexpr std::int64_t kMaxGroupOrder = std::int64_t{1} << 62;

inline std::int64_t mod(std::int64_t a, std::int64_t n) {
    std::int64_t r = a % n;
    return r < 0 ? r + n : r;
}

inline std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t n) {
    const __int128 r = (static_cast<__int128>(a) * b) % n;
    return static_cast<std::int64_t>(r < 0 ? r + n : r);
}

inline std::int64_t addmod(std::int64_t a, std::int64_t b, std::int64_t n) {
    const std::int64_t s = a + b;  // both in [0, n) with n < 2^62
    return s >= n ? s - n : s;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r) || r > kMaxGroupOrder)
        throw InputError("integer overflow: product exceeds 2^62");
    return r;
}

inline std::int64_t checked_lcm(std::int64_t a, std::int64_t b) {
    if (a == 0 || b == 0) return 0;
    return checked_mul(a / std::gcd(a, b), b);
}

inline std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
    return r;
}

struct PrimePower {
    std::int64_t prime;
    int exponent;
    std::int64_t value;  // prime^exponent

    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Prime-power factorization by trial division, primes ascending. factorize(1) is empty.
inline std::vector<PrimePower> factorize(std::int64_t n) {
    if (n < 1) throw InputError("factorize: argument must be positive");
    std::vector<PrimePower> out;
    for (std::int64_t p = 2; p <= n / p; ++p) {
        if (n % p != 0) continue;
        PrimePower pp{p, 0, 1};
        while (n % p == 0) {
            n /= p;
            ++pp.exponent;
            pp.value *= p;
        }
        out.push_back(pp);
    }
    if (n > 1) out.push_back({n, 1, n});
    return out;
}

inline bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t p = 2; p <= n / p; ++p)
        if (n % p == 0) return false;
    return true;
}

/// Returns (p, n) with q = p^n, n >= 1, or nothing if q is not a prime power.
inline std::optional<PrimePower> as_prime_power(std::int64_t q) {
    if (q < 2) return std::nullopt;
    auto f = factorize(q);
    if (f.size() != 1) return std::nullopt;
    return f.front();
}

inline std::int64_t smallest_prime_divisor(std::int64_t n) {
    if (n < 2) throw InputError("smallest_prime_divisor: argument must be at least 2");
    return factorize(n).front().prime;
}

/// Largest power of p dividing n.
inline std::int64_t prime_part(std::int64_t n, std::int64_t p) {
    std::int64_t r = 1;
    while (n % p == 0) {
        n /= p;
        r *= p;
    }
    return r;
}

inline std::vector<std::int64_t> divisors(std::int64_t n) {
    std::vector<std::int64_t> lo, hi;
    for (std::int64_t d = 1; d <= n / d; ++d) {
        if (n % d) continue;
        lo.push_back(d);
        if (d != n / d) hi.push_back(n / d);
    }
    lo.insert(lo.end(), hi.rbegin(), hi.rend());
    return lo;
}

inline std::int64_t euler_phi(std::int64_t n) {
    std::int64_t r = n;
    for (const auto& pp : factorize(n)) r = r / pp.prime * (pp.prime - 1);
    return r;
}

inline Fraction make_fraction(const Integer& num, const Integer& den) {
    if (den == 0) throw InputError("fraction with zero denominator");
    Fraction f(num, den);
    f.canonicalize();
    return f;
}

inline Fraction make_fraction(std::int64_t num, std::int64_t den) {
    return make_fraction(Integer(static_cast<long>(num)), Integer(static_cast<long>(den)));
}

inline Integer to_integer(std::int64_t v) { return Integer(static_cast<long>(v)); }

inline std::int64_t to_int64(const Integer& v) {
    if (!v.fits_slong_p()) throw InputError("integer does not fit in 64 bits: " + v.get_str());
    return v.get_si();
}

/// Always `a/b` with b > 0, including `0/1` and `1/1`.
inline std::string to_string(const Fraction& f) {
    return f.get_num().get_str() + "/" + f.get_den().get_str();
}

inline std::string to_string(const Integer& v) { return v.get_str(); }

/// Parses `a/b` or a bare integer `a`.
inline Fraction parse_fraction(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Fraction(Integer(text));
        const Integer num(text.substr(0, slash));
        const Integer den(text.substr(slash + 1));
        return make_fraction(num, den);
    } catch (const std::invalid_argument&) {
        throw InputError("not a fraction: '" + text + "'");
    }
}

/// Fixed-point decimal truncated to `digits` fractional digits. Exact: the printed digits
/// are those of the true value.
inline std::string to_decimal(const Fraction& f, int digits) {
    Integer num = f.get_num();
    const Integer& den = f.get_den();
    std::string sign;
    if (num < 0) {
        sign = "-";
        num = -num;
    }
    Integer whole = num / den;
    Integer rem = num % den;
    std::string out = sign + whole.get_str();
    if (digits > 0) out += ".";
    for (int i = 0; i < digits; ++i) {
        rem *= 10;
        Integer d = rem / den;
        rem %= den;
        out += d.get_str();
    }
    return out;
}

}  // namespace abelbias
