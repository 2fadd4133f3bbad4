#pragma once

// Root finding over F_{p^f}, embeddings GR(p^N,f) -> GR(p^N,f') and the
// solver for p^a*sigma(x) - x = rhs.

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

#include "galois_ring.hpp"
#include "linalg.hpp"

namespace pcris {

namespace fq {

// Polynomials over the residue field of a Galois ring at N = 1.
using Poly = std::vector<Coeffs>;

inline void trim(const GaloisRing& F, Poly& a) {
    while (!a.empty() && F.is_zero(a.back())) a.pop_back();
}

inline Poly mul(const GaloisRing& F, const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, F.zero());
    for (size_t i = 0; i < a.size(); ++i)
        if (!F.is_zero(a[i]))
            for (size_t j = 0; j < b.size(); ++j) F.add_to(r[i + j], F.mul(a[i], b[j]));
    trim(F, r);
    return r;
}

inline Poly sub(const GaloisRing& F, Poly a, const Poly& b) {
    if (a.size() < b.size()) a.resize(b.size(), F.zero());
    for (size_t i = 0; i < b.size(); ++i) a[i] = F.sub(a[i], b[i]);
    trim(F, a);
    return a;
}

inline Poly add(const GaloisRing& F, Poly a, const Poly& b) {
    if (a.size() < b.size()) a.resize(b.size(), F.zero());
    for (size_t i = 0; i < b.size(); ++i) F.add_to(a[i], b[i]);
    trim(F, a);
    return a;
}

inline Poly mod(const GaloisRing& F, Poly a, const Poly& m) {
    trim(F, a);
    Coeffs li = F.inv(m.back());
    while (a.size() >= m.size()) {
        Coeffs c = F.mul(a.back(), li);
        size_t sh = a.size() - m.size();
        for (size_t i = 0; i < m.size(); ++i) a[sh + i] = F.sub(a[sh + i], F.mul(c, m[i]));
        trim(F, a);
    }
    return a;
}

inline Poly monic(const GaloisRing& F, Poly a) {
    trim(F, a);
    if (a.empty()) return a;
    Coeffs li = F.inv(a.back());
    for (auto& c : a) c = F.mul(c, li);
    return a;
}

inline Poly gcd(const GaloisRing& F, Poly a, Poly b) {
    trim(F, a);
    trim(F, b);
    while (!b.empty()) {
        Poly r = mod(F, a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return monic(F, a);
}

inline Poly powmod(const GaloisRing& F, Poly b, u64 e, const Poly& m) {
    Poly r{F.one()};
    r = mod(F, r, m);
    b = mod(F, b, m);
    while (e) {
        if (e & 1) r = mod(F, mul(F, r, b), m);
        b = mod(F, mul(F, b, b), m);
        e >>= 1;
    }
    return r;
}

// x^{q} mod m with q = p^f
inline Poly frob_x(const GaloisRing& F, const Poly& m) {
    Poly x{F.zero(), F.one()};
    for (int i = 0; i < F.degree(); ++i) x = powmod(F, x, F.p(), m);
    return x;
}

// Splits a monic squarefree product of distinct linear factors.
inline void split_linear(const GaloisRing& F, const Poly& g, Rng& rng, std::vector<Coeffs>& roots) {
    if (g.size() <= 1) return;
    if (g.size() == 2) {
        roots.push_back(F.neg(g[0]));
        return;
    }
    u64 p = F.p();
    for (int attempt = 0; attempt < 200; ++attempt) {
        Coeffs a = F.zero();
        for (auto& c : a) c = rng.below(p);
        Poly h;
        if (p == 2) {
            // trace of a*X
            Poly y{F.zero(), a};
            y = mod(F, y, g);
            Poly acc = y;
            for (int i = 1; i < F.degree(); ++i) {
                y = mod(F, mul(F, y, y), g);
                acc = add(F, acc, y);
            }
            h = acc;
        } else {
            Poly base{a, F.one()};
            Poly b = powmod(F, base, (p - 1) / 2, g);
            Poly acc = b, c = b;
            for (int i = 1; i < F.degree(); ++i) {
                c = powmod(F, c, p, g);
                acc = mod(F, mul(F, acc, c), g);
            }
            h = sub(F, acc, Poly{F.one()});
        }
        Poly d = gcd(F, g, h);
        if (d.size() > 1 && d.size() < g.size()) {
            split_linear(F, d, rng, roots);
            // exact division g / d, both monic
            Poly quot(g.size() - d.size() + 1, F.zero());
            Poly r = g;
            while (r.size() >= d.size()) {
                Coeffs c = r.back();
                size_t sh = r.size() - d.size();
                quot[sh] = c;
                for (size_t i = 0; i < d.size(); ++i) r[sh + i] = F.sub(r[sh + i], F.mul(c, d[i]));
                trim(F, r);
            }
            split_linear(F, quot, rng, roots);
            return;
        }
    }
    throw Error("split_linear: splitting failed");
}

inline bool coeffs_less(const Coeffs& a, const Coeffs& b) { return a < b; }

// All roots in F of g, sorted by coordinate vector.
inline std::vector<Coeffs> roots(const GaloisRing& F, const Poly& g) {
    Poly m = monic(F, g);
    Poly fx = frob_x(F, m);
    Poly d = gcd(F, m, sub(F, fx, Poly{F.zero(), F.one()}));
    std::vector<Coeffs> out;
    Rng rng(0x5eed0001ULL);
    split_linear(F, d, rng, out);
    std::sort(out.begin(), out.end(), coeffs_less);
    return out;
}

}  // namespace fq

// Image of the generator t of GR(p^N,f) in GR(p^N,f').
inline Coeffs tower_root(const FieldDesc& from, const FieldDesc& to, int N) {
    static std::mutex mu;
    static std::map<std::tuple<u64, int, int, int>, Coeffs> cache;
    auto key = std::make_tuple(from.p, from.f, to.f, N);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto F = GaloisRing::get(to, 1);
    fq::Poly P;
    for (u64 c : from.minpoly) P.push_back(F->scalar(c));
    auto rts = fq::roots(*F, P);
    if (rts.empty()) throw NotASubfield("minimal polynomial has no root in target field");
    auto R = GaloisRing::get(to, N);
    std::vector<Coeffs> poly;
    for (u64 c : from.minpoly) poly.push_back(R->scalar(c));
    Coeffs r = R->hensel_root(poly, R->reduce(rts.front()));
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, r);
    return r;
}

inline Coeffs embed_coeffs(const GaloisRing& from, const GaloisRing& to, const Coeffs& x) {
    if (from.p() != to.p()) throw BaseMismatch("embed_tower: different primes");
    if (to.degree() % from.degree() != 0) throw NotASubfield("embed_tower: f does not divide f'");
    if (from.degree() == to.degree()) return to.reduce(x);
    Coeffs r = tower_root(from.field(), to.field(), to.N());
    Coeffs acc = to.zero(), pw = to.one();
    for (int i = 0; i < from.degree(); ++i) {
        acc = to.add(acc, to.scale(pw, to.prec().red(x[i])));
        pw = to.mul(pw, r);
    }
    return acc;
}

inline GaloisRingElem embed_tower(const GaloisRingElem& x, const FieldDesc& target) {
    if (target.p != x.field().p) throw BaseMismatch("embed_tower: different primes");
    if (target.f % x.field().f != 0) throw NotASubfield("embed_tower: " + std::to_string(x.field().f) + " does not divide " + std::to_string(target.f));
    auto to = GaloisRing::get(target, x.prec().N);
    return {to, embed_coeffs(*x.ring(), *to, x.coeffs())};
}

struct SemilinearSolution {
    FieldDesc field;
    GaloisRingElem lambda;
};

namespace detail {

// One solution of sigma(x) - x = r in GR(p^N, f), assuming Tr(r) = 0.
inline Coeffs artin_schreier_lift(const GaloisRing& R, const Coeffs& r) {
    int N = R.N();
    auto F = R.at_precision(1);
    int f = R.degree();
    // x -> x^p - x is F_p-linear on the residue field; its matrix is sigma - 1.
    ZpnMatrix m(F->prec(), f, f);
    for (int k = 0; k < f; ++k) {
        Coeffs e = F->zero();
        e[k] = 1;
        Coeffs img = F->sub(F->sigma(e), e);
        for (int i = 0; i < f; ++i) m(i, k) = img[i];
    }
    Vec sol = preimage(m, F->reduce(r));
    // the roots are sol + c, c in F_p; take the smallest coordinate vector
    std::vector<Coeffs> rts;
    for (u64 c = 0; c < R.p(); ++c) rts.push_back(F->add(sol, F->scalar(c)));
    std::sort(rts.begin(), rts.end());
    Coeffs x0 = R.reduce(rts.front());
    if (N == 1) return x0;
    Coeffs resid = R.sub(r, R.sub(R.sigma(x0), x0));
    auto Rm = R.at_precision(N - 1);
    Coeffs r1 = Rm->reduce(R.div_p(resid, 1));
    Coeffs mu = artin_schreier_lift(*Rm, r1);
    return R.add(x0, R.mul_p(R.reduce(mu), 1));
}

}  // namespace detail

inline SemilinearSolution semilinear_solve(int a, const GaloisRingElem& rhs, bool allow_extension) {
    if (a < 0) throw BadParameters("semilinear_solve: a must be >= 0");
    const auto& R = *rhs.ring();
    int N = R.N();
    if (a >= 1) {
        Coeffs term = rhs.coeffs(), acc = R.zero();
        for (int j = 0; j * a < N; ++j) {
            acc = R.sub(acc, term);
            term = R.mul_p(R.sigma(term), a);
        }
        return {rhs.field(), GaloisRingElem(rhs.ring(), acc)};
    }
    if (rhs.is_zero()) return {rhs.field(), rhs};
    int vt = R.val(R.trace(rhs.coeffs()));
    FieldDesc fd = rhs.field();
    RingPtr ring = rhs.ring();
    Coeffs r = rhs.coeffs();
    if (vt < N) {
        if (!allow_extension) throw NoSolution("sigma(x) - x = rhs has no solution over this field");
        int m = N - vt;
        fd = make_field(R.p(), R.degree() * static_cast<int>(ipow(R.p(), m)));
        ring = GaloisRing::get(fd, N);
        r = embed_coeffs(R, *ring, r);
    }
    Coeffs x = detail::artin_schreier_lift(*ring, r);
    Coeffs chk = ring->sub(ring->sub(ring->sigma(x), x), r);
    if (!ring->is_zero(chk)) throw PrecisionExhausted("semilinear_solve: substitution check failed");
    return {fd, GaloisRingElem(ring, x)};
}

}  // namespace pcris
