#pragma once

// Logarithm of Tate units, the divided Frobenius F/p - 1 and the comparison of
// the Frobenius images with Ainf inside a finite monomial window.

#include <string>
#include <vector>

#include "linalg.hpp"
#include "pd_series.hpp"

namespace pcris {

// prod_k (1 + c_k x^{a_k})^{e_k}
struct TateUnit {
    struct Factor {
        Coeffs c;  // residue-field coefficient
        ExpVec a;
        u64 e = 1;
    };
    RingPtr residue;  // any precision; only the residue field is used
    VarLayout layout;
    std::vector<Factor> factors;

    TateUnit() = default;
    TateUnit(RingPtr R, VarLayout L) : residue(R->at_precision(1)), layout(L) {}

    TateUnit& times(const Coeffs& c, const ExpVec& a, u64 e = 1) {
        factors.push_back({residue->reduce(c), a, e});
        return *this;
    }
    TateUnit operator*(const TateUnit& o) const {
        TateUnit r = *this;
        for (auto& f : o.factors) r.factors.push_back(f);
        return r;
    }

    SharpSeries sharp() const {
        SharpSeries s = SharpSeries::one(residue, layout);
        for (auto& f : factors) {
            SharpSeries b = SharpSeries::one(residue, layout);
            b.add_term(f.a, f.c);
            s = s * b.pow(f.e);
        }
        return s;
    }
};

// A unit 1 + c x^a lies in 1 + J iff some divided-power exponent is >= 1.
inline bool in_one_plus_J(const TateUnit::Factor& f, const VarLayout& L) {
    for (int i = L.plain; i < L.n(); ++i)
        if (f.a[i].floor() >= 1) return true;
    return false;
}

inline PDSeries teichmuller_of_unit(const TateUnit& u, int N) {
    auto R = u.residue->at_precision(N);
    PDSeries acc = PDSeries::one(R, u.layout);
    for (auto& f : u.factors) {
        SharpSeries b = SharpSeries::one(u.residue, u.layout);
        b.add_term(f.a, f.c);
        acc = acc * teichmuller_lift(b, N).pow(f.e);
    }
    return acc;
}

// log [u] = sum_{d >= 1} (-1)^{d-1} ([u]-1)^d / d, exact modulo p^N.
inline PDSeries pd_log_unit(const TateUnit& u, int N) {
    for (auto& f : u.factors)
        if (!in_one_plus_J(f, u.layout)) throw BadParameters("pd_log_unit: factor is not congruent to 1 mod J");
    u64 p = u.residue->p();
    int dmax = 1;
    while (vp_factorial(dmax - 1, p) < N) ++dmax;
    int extra = 0;
    for (int d = 1; d < dmax; ++d) extra = std::max(extra, vp(d, p, 64));
    int W = N + extra;
    auto RW = u.residue->at_precision(W);
    auto RN = u.residue->at_precision(N);

    PDSeries y = teichmuller_of_unit(u, W) - PDSeries::one(RW, u.layout);
    PDSeries out(RN, u.layout);
    PDSeries yd = y;
    for (int d = 1; d < dmax; ++d) {
        if (d > 1) yd = yd * y;
        int v = vp(d, p, 64);
        u64 unit = d;
        for (int k = 0; k < v; ++k) unit /= p;
        PDSeries term(RN, u.layout);
        for (auto& [a, c] : yd.terms()) {
            Coeffs q;
            try {
                q = RW->div_p(c, v);
            } catch (const PrecisionExhausted&) {
                throw PrecisionExhausted("pd_log_unit: exact division by d failed");
            }
            term.add_term(a, RN->scale(RN->reduce(q), RN->prec().inv(unit)));
        }
        if (d % 2 == 0) term = -term;
        out += term;
    }
    return out;
}

// F(a)/p - a, the divided Frobenius computed on the integer lift of a.
inline PDSeries f_over_p_minus_1(const PDSeries& a) {
    if (!a.nygaard_coefficient_test()) throw NotNygaard("f_over_p_minus_1: argument is not in the Nygaard ideal");
    int N = a.N();
    PDSeries fa = a.lifted(N + 1).frobenius();
    return fa.divided_by_p(1) - a;
}

// Finite window of basis monomials e_a, a = (k_1/p^depth, ...), 0 <= a_i < bound.
struct AcrisWindow {
    u64 p = 2;
    int f = 1;
    int nvars = 1;
    int depth = 3;
    u64 bound = 8;
    int max_depth = 16;  // largest representable denominator exponent

    std::vector<ExpVec> monomials() const {
        std::vector<ExpVec> out;
        u64 den = ipow(p, depth);
        u64 per = bound * den;
        u64 total = 1;
        for (int i = 0; i < nvars; ++i) total *= per;
        for (u64 code = 0; code < total; ++code) {
            ExpVec a = ExpVec::zero(nvars);
            u64 c = code;
            for (int i = 0; i < nvars; ++i) {
                a[i] = FracExp::make(c % per, depth, p);
                c /= per;
            }
            out.push_back(a);
        }
        return out;
    }
};

struct FrobeniusIntersection {
    std::vector<ExpVec> monomials;
    Submodule intersection;  // of F^j(Acris) restricted to the window, j = 1..n_max
    Submodule ainf;          // naive lifts: (a!)_p | b_a
    bool equal = false;
};

inline FrobeniusIntersection frobenius_intersection(const AcrisWindow& w, int N, int n_max) {
    if (w.depth + n_max > w.max_depth) throw WindowTooSmall("frobenius_intersection: F-preimages exceed the representable depth");
    auto fd = make_field(w.p, w.f);
    auto R = GaloisRing::get(fd, N);
    VarLayout L{0, w.nvars};
    FrobeniusIntersection out;
    out.monomials = w.monomials();
    int M = static_cast<int>(out.monomials.size());
    int f = w.f;
    int amb = M * f;
    std::map<ExpVec, int> index;
    for (int i = 0; i < M; ++i) index[out.monomials[i]] = i;

    Submodule acc = Submodule::whole(R->prec(), amb);
    for (int j = 1; j <= n_max; ++j) {
        std::vector<Vec> gens;
        for (int i = 0; i < M; ++i) {
            ExpVec pre = out.monomials[i];
            for (int k = 0; k < j; ++k) pre = pre.div_p(w.p);
            if (pre.depth() > w.max_depth) throw WindowTooSmall("frobenius_intersection: preimage exponent not representable");
            for (int k = 0; k < f; ++k) {
                Coeffs e = R->zero();
                e[k] = 1;
                PDSeries x = PDSeries::basis(R, L, pre, e);
                for (int s = 0; s < j; ++s) x = x.frobenius();
                Vec g(amb, 0);
                for (auto& [a, c] : x.terms()) {
                    auto it = index.find(a);
                    if (it == index.end()) throw WindowTooSmall("frobenius_intersection: image left the window");
                    for (int t = 0; t < f; ++t) g[it->second * f + t] = c[t];
                }
                gens.push_back(std::move(g));
            }
        }
        acc = intersect(acc, Submodule(R->prec(), amb, gens));
    }
    out.intersection = acc;

    std::vector<Vec> gens;
    for (int i = 0; i < M; ++i) {
        int g = 0;
        for (int v = 0; v < w.nvars; ++v) g += gamma_val(out.monomials[i][v], w.p);
        for (int k = 0; k < f; ++k) {
            Vec e(amb, 0);
            e[i * f + k] = R->prec().ppow(g);
            gens.push_back(std::move(e));
        }
    }
    out.ainf = Submodule(R->prec(), amb, gens);
    out.equal = out.ainf == out.intersection;
    return out;
}

}  // namespace pcris
