#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "arith.hpp"

namespace abelbias {

/// An element of finite order of T = R/Z, stored as a reduced fraction num/den with
/// 0 <= num < den. The zero of T is 0/1.
class TorusValue {
public:
    TorusValue() : num_(0), den_(1) {}
    TorusValue(const Integer& num, const Integer& den) { assign(num, den); }
    TorusValue(std::int64_t num, std::int64_t den) { assign(to_integer(num), to_integer(den)); }
    explicit TorusValue(const Fraction& f) { assign(f.get_num(), f.get_den()); }

    const Integer& num() const noexcept { return num_; }
    const Integer& den() const noexcept { return den_; }

    /// Additive order in T; equals the reduced denominator.
    const Integer& order() const noexcept { return den_; }
    bool is_zero() const noexcept { return num_ == 0; }

    Fraction to_fraction() const { return Fraction(num_, den_); }

    TorusValue operator-() const { return TorusValue(-num_, den_); }

    friend TorusValue operator+(const TorusValue& a, const TorusValue& b) {
        return TorusValue(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend TorusValue operator-(const TorusValue& a, const TorusValue& b) { return a + (-b); }
    TorusValue& operator+=(const TorusValue& o) { return *this = *this + o; }
    TorusValue& operator-=(const TorusValue& o) { return *this = *this - o; }

    friend bool operator==(const TorusValue& a, const TorusValue& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    /// Orders representatives in [0, 1); used only for canonical sorting.
    friend std::strong_ordering operator<=>(const TorusValue& a, const TorusValue& b) {
        const int c = cmp(a.num_ * b.den_, b.num_ * a.den_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    std::string str() const { return num_.get_str() + "/" + den_.get_str(); }

private:
    void assign(const Integer& num, const Integer& den) {
        if (den == 0) throw InputError("torus value with zero denominator");
        Fraction f(num, den);
        f.canonicalize();
        num_ = f.get_num();
        den_ = f.get_den();
        mpz_fdiv_r(num_.get_mpz_t(), num_.get_mpz_t(), den_.get_mpz_t());
        if (num_ == 0) den_ = 1;
    }

    Integer num_;
    Integer den_;
};

inline TorusValue torus_add(const TorusValue& a, const TorusValue& b) { return a + b; }

/// n * t mod 1.
inline TorusValue torus_scale(const TorusValue& t, const Integer& n) {
    return TorusValue(t.num() * n, t.den());
}
inline TorusValue torus_scale(const TorusValue& t, std::int64_t n) {
    return torus_scale(t, to_integer(n));
}

/// Accepts `a/b` (any integers, b != 0) and reduces mod 1.
inline TorusValue parse_torus(const std::string& text) { return TorusValue(parse_fraction(text)); }

}  // namespace abelbias
