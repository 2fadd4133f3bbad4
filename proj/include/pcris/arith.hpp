#pragma once

// Machine-word arithmetic modulo p^N.  Moduli are kept below 2^62 so sums of
// two residues never overflow and products go through unsigned __int128.

#include <cstdint>
#include <vector>

#include "error.hpp"

namespace pcris {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline u64 ipow(u64 b, int e) {
    u64 r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// v_p(n) for n > 0; returns `cap` for n == 0.
inline int vp(u64 n, u64 p, int cap) {
    if (n == 0) return cap;
    int v = 0;
    while (n % p == 0 && v < cap) {
        n /= p;
        ++v;
    }
    return v;
}

// Legendre: v_p(n!).
inline int vp_factorial(u64 n, u64 p) {
    int v = 0;
    while (n) {
        n /= p;
        v += static_cast<int>(n);
    }
    return v;
}

struct Prec {
    u64 p = 2;
    int N = 1;
    u64 mod = 2;

    Prec() = default;
    Prec(u64 p_, int N_) : p(p_), N(N_) {
        if (!is_prime(p)) throw CompositeModulus("modulus base " + std::to_string(p) + " is not prime");
        if (N < 1) throw BadParameters("precision N must be >= 1");
        u128 m = 1;
        for (int i = 0; i < N; ++i) {
            m *= p;
            if (m >= (u128(1) << 62)) throw BadParameters("p^N exceeds 2^62");
        }
        mod = static_cast<u64>(m);
    }

    static bool fits(u64 p, int N) {
        u128 m = 1;
        for (int i = 0; i < N; ++i) {
            m *= p;
            if (m >= (u128(1) << 62)) return false;
        }
        return true;
    }

    u64 red(u64 a) const { return a % mod; }
    u64 add(u64 a, u64 b) const {
        u64 s = a + b;
        return s >= mod ? s - mod : s;
    }
    u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + mod - b; }
    u64 neg(u64 a) const { return a == 0 ? 0 : mod - a; }
    u64 mul(u64 a, u64 b) const { return static_cast<u64>((u128(a) * b) % mod); }
    u64 pow(u64 a, u64 e) const {
        u64 r = 1 % mod;
        a %= mod;
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }
    u64 from_signed(i64 a) const {
        i64 m = static_cast<i64>(mod);
        i64 r = a % m;
        return static_cast<u64>(r < 0 ? r + m : r);
    }
    i64 to_signed(u64 a) const {
        return a > mod / 2 ? static_cast<i64>(a) - static_cast<i64>(mod) : static_cast<i64>(a);
    }
    int val(u64 a) const { return vp(a % mod, p, N); }
    bool is_unit(u64 a) const { return a % p != 0; }
    // Inverse of a unit modulo p^N.
    u64 inv(u64 a) const {
        i64 t = 0, nt = 1;
        i64 r = static_cast<i64>(mod), nr = static_cast<i64>(a % mod);
        while (nr != 0) {
            i64 q = r / nr;
            i64 tmp = t - q * nt;
            t = nt;
            nt = tmp;
            tmp = r - q * nr;
            r = nr;
            nr = tmp;
        }
        if (r != 1) throw NoSolution("element is not a unit mod p^N");
        return from_signed(t);
    }
    u64 ppow(int e) const { return e >= N ? 0 : ipow(p, e); }
    bool operator==(const Prec& o) const { return p == o.p && N == o.N; }
    bool operator!=(const Prec& o) const { return !(*this == o); }
};

// Deterministic generator used by sampling code; splitmix64 so results do not
// depend on the standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(u64 seed) : s_(seed) {}
    u64 next() {
        u64 z = (s_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    u64 below(u64 n) { return n == 0 ? 0 : next() % n; }
    u64 seed_state() const { return s_; }

  private:
    u64 s_;
};

}  // namespace pcris
