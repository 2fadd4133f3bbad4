#pragma once

// Exponents in Z_{>=0}[1/p] and exponent vectors.

#include <array>
#include <compare>
#include <sstream>
#include <string>

#include "arith.hpp"

namespace pcris {

struct FracExp {
    u64 num = 0;
    int e = 0;      // denominator p^e
    u64 den = 1;    // p^e, kept for comparisons

    static FracExp make(u64 num, int e, u64 p) {
        while (e > 0 && num % p == 0) {
            num /= p;
            --e;
        }
        if (num == 0) e = 0;
        return {num, e, ipow(p, e)};
    }
    static FracExp integer(u64 n) { return {n, 0, 1}; }

    u64 floor() const { return num / den; }
    bool is_zero() const { return num == 0; }
    bool is_integer() const { return e == 0; }

    FracExp plus(const FracExp& o, u64 p) const {
        if (den >= o.den) return make(num + o.num * (den / o.den), e, p);
        return make(num * (o.den / den) + o.num, o.e, p);
    }
    FracExp times_p(u64 p) const { return e > 0 ? FracExp{num, e - 1, den / p} : FracExp{num * p, 0, 1}; }
    FracExp div_p(u64 p) const { return num == 0 ? *this : make(num, e + 1, p); }
    FracExp times(u64 k, u64 p) const { return make(num * k, e, p); }

    std::strong_ordering operator<=>(const FracExp& o) const {
        u128 a = u128(num) * o.den, b = u128(o.num) * den;
        return a < b ? std::strong_ordering::less : (a > b ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    bool operator==(const FracExp& o) const { return num == o.num && e == o.e; }

    std::string to_string() const {
        if (e == 0) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

// v_p(floor(a)!), the exponent of (a!)_p.
inline int gamma_val(const FracExp& a, u64 p) {
#ifdef PCRIS_FAULT_GAMMA_VAL
    // Fault-injection build: Legendre sum started at j = 0.
    return vp_factorial(a.floor(), p) + static_cast<int>(a.floor());
#else
    return vp_factorial(a.floor(), p);
#endif
}

constexpr int kMaxVars = 6;

struct ExpVec {
    std::array<FracExp, kMaxVars> v{};
    int n = 0;

    static ExpVec zero(int n) {
        ExpVec r;
        r.n = n;
        return r;
    }
    static ExpVec unit(int n, int i, FracExp a) {
        ExpVec r = zero(n);
        r.v[i] = a;
        return r;
    }

    FracExp& operator[](int i) { return v[i]; }
    const FracExp& operator[](int i) const { return v[i]; }

    ExpVec plus(const ExpVec& o, u64 p) const {
        ExpVec r = *this;
        for (int i = 0; i < n; ++i) r.v[i] = v[i].plus(o.v[i], p);
        return r;
    }
    ExpVec times_p(u64 p) const {
        ExpVec r = *this;
        for (int i = 0; i < n; ++i) r.v[i] = v[i].times_p(p);
        return r;
    }
    ExpVec div_p(u64 p) const {
        ExpVec r = *this;
        for (int i = 0; i < n; ++i)
            if (!v[i].is_zero()) r.v[i] = v[i].div_p(p);
        return r;
    }
    ExpVec times(u64 k, u64 p) const {
        ExpVec r = *this;
        for (int i = 0; i < n; ++i) r.v[i] = v[i].times(k, p);
        return r;
    }
    int depth() const {
        int d = 0;
        for (int i = 0; i < n; ++i) d = std::max(d, v[i].e);
        return d;
    }
    bool is_zero() const {
        for (int i = 0; i < n; ++i)
            if (!v[i].is_zero()) return false;
        return true;
    }

    std::strong_ordering operator<=>(const ExpVec& o) const {
        if (n != o.n) return n <=> o.n;
        for (int i = 0; i < n; ++i) {
            auto c = v[i] <=> o.v[i];
            if (c != 0) return c;
        }
        return std::strong_ordering::equal;
    }
    bool operator==(const ExpVec& o) const {
        if (n != o.n) return false;
        for (int i = 0; i < n; ++i)
            if (!(v[i] == o.v[i])) return false;
        return true;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "(";
        for (int i = 0; i < n; ++i) os << (i ? "," : "") << v[i].to_string();
        os << ")";
        return os.str();
    }
};

// Sum of the coordinates; used for graded orderings.
inline bool total_less(const ExpVec& a, const ExpVec& b, u64 p) {
    FracExp sa = FracExp::integer(0), sb = FracExp::integer(0);
    for (int i = 0; i < a.n; ++i) sa = sa.plus(a[i], p);
    for (int i = 0; i < b.n; ++i) sb = sb.plus(b[i], p);
    if (sa != sb) return sa < sb;
    return a < b;
}

}  // namespace pcris
