#pragma once

// Cech-Alexander complex of the affine line over F_p for the cover by
// its coperfection.  Level m is W(F_p[x^{1/p^inf}]) with divided-power
// variables t_1..t_m, where the m+1 coordinates are y_0..y_m, x = y_m is the
// base and t_i = y_{i-1} - y_m.  The cofaces d^j, j <= m, only relabel; d^{m+1}
// sends x to x + t_{m+1} and t_i to t_i - t_{m+1}, both through Teichmuller
// lifts of the perfect ring.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pd_series.hpp"
#include "linalg.hpp"

namespace pcris {

struct CechWindow {
    u64 p = 2;
    int D = 4;        // total degree bound
    int m_den = 1;    // exponents are multiples of 1/p^m_den
    int t_bound = 4;  // degree bound for the t-variables
    int N = 1;

    void validate() const {
        if (D < 1 || m_den < 0) throw BadParameters("CechWindow: need D >= 1 and m_den >= 0");
        if (t_bound < D) throw WindowTooSmall("CechWindow: t-degree bound below D; one coface of x^D needs t^D");
        if (static_cast<u64>(m_den) + N > 12) throw BadParameters("CechWindow: denominator depth too large");
    }
    // degrees d with one coface and one product staying inside the window
    bool interior(const FracExp& d) const { return d.times(2, p) <= FracExp::integer(static_cast<u64>(D)); }
};

struct CechLevel {
    int m = 0;
    VarLayout layout;
    RingPtr ring;
    std::string description;
};

inline CechLevel build_level(int m, const CechWindow& w) {
    if (m < 0 || m + 1 > kMaxVars) throw BadParameters("build_level: level out of range");
    CechLevel L;
    L.m = m;
    L.layout = VarLayout{1, m};
    L.ring = GaloisRing::get(w.p, 1, w.N);
    L.description = "W(F_" + std::to_string(w.p) + "[x^(1/p^inf)])";
    for (int i = 1; i <= m; ++i) L.description += (i == 1 ? "[" : ",") + std::string("t") + std::to_string(i) + "^(1/p^inf)";
    if (m > 0) L.description += "] divided powers";
    return L;
}

// exponent vectors (x, t_1..t_m) with total degree exactly d, coordinates k/p^den
inline std::vector<ExpVec> graded_monomials(u64 p, int m, int den, const FracExp& d) {
    std::vector<ExpVec> out;
    u64 scale = ipow(p, den);
    // d * p^den must be an integer
    FracExp sd = d;
    for (int i = 0; i < den; ++i) sd = sd.times_p(p);
    if (sd.e != 0) return out;
    u64 total = sd.num;
    ExpVec cur = ExpVec::zero(m + 1);
    auto rec = [&](auto& self, int slot, u64 rem) -> void {
        if (slot == m) {
            cur[slot] = FracExp::make(rem, den, p);
            out.push_back(cur);
            return;
        }
        for (u64 k = 0; k <= rem; ++k) {
            cur[slot] = FracExp::make(k, den, p);
            self(self, slot + 1, rem - k);
        }
    };
    rec(rec, 0, total);
    (void)scale;
    return out;
}

inline FracExp total_degree(const ExpVec& a, u64 p) {
    FracExp s = FracExp::integer(0);
    for (int i = 0; i < a.n; ++i) s = s.plus(a[i], p);
    return s;
}

struct GradedBlock {
    FracExp degree;
    std::vector<ExpVec> source, target;
    ZpnMatrix matrix;  // target x source
};

struct CechDegreeH {
    FracExp degree;
    bool interior = false;
    int h0 = 0, h1 = 0;
    std::vector<PDSeries> h0_basis;
};

struct CechH {
    CechWindow window;
    std::vector<CechDegreeH> degrees;
    int h0_interior = 0, h1_interior = 0;
};

class CechComplex {
public:
    explicit CechComplex(CechWindow w) : w_(w) {
        w_.validate();
        R_ = GaloisRing::get(w_.p, 1, w_.N);
        F_ = R_->at_precision(1);
    }

    const CechWindow& window() const { return w_; }
    const RingPtr& ring() const { return R_; }
    VarLayout layout(int m) const { return VarLayout{1, m}; }

    PDSeries coface(int j, int m, const PDSeries& a) {
        if (j < 0 || j > m + 1) throw BadParameters("coface: index out of range");
        if (a.layout() != layout(m)) throw BaseMismatch("coface: element is not at level m");
        if (m + 2 > kMaxVars) throw BadParameters("coface: level out of range");
        PDSeries out(R_, layout(m + 1));
        for (auto& [al, c] : a.terms()) {
            PDSeries img = PDSeries::constant(R_, layout(m + 1), c);
            img = img * image_var(j, m, 0, al[0]);
            for (int i = 1; i <= m; ++i)
                if (!al[i].is_zero()) img = img * image_var(j, m, i, al[i]);
            out += img;
        }
        return out;
    }

    PDSeries differential(int m, const PDSeries& a) {
        PDSeries out(R_, layout(m + 1));
        for (int j = 0; j <= m + 1; ++j) {
            PDSeries d = coface(j, m, a);
            if (j % 2)
                out -= d;
            else
                out += d;
        }
        return out;
    }

    // d : level m -> level m+1 on the monomials of total degree d (depth <= m_den)
    GradedBlock block(int m, const FracExp& d) {
        GradedBlock b;
        b.degree = d;
        b.source = graded_monomials(w_.p, m, w_.m_den, d);
        std::map<ExpVec, int> idx;
        for (auto& t : graded_monomials(w_.p, m + 1, w_.m_den, d)) {
            idx.emplace(t, static_cast<int>(b.target.size()));
            b.target.push_back(t);
        }
        std::vector<PDSeries> imgs;
        for (auto& s : b.source) {
            imgs.push_back(differential(m, PDSeries::basis(R_, layout(m), s, R_->one())));
            for (auto& [t, c] : imgs.back().terms())
                if (!idx.count(t)) {
                    idx.emplace(t, static_cast<int>(b.target.size()));
                    b.target.push_back(t);
                }
        }
        b.matrix = ZpnMatrix(R_->prec(), static_cast<int>(b.target.size()), static_cast<int>(b.source.size()));
        for (size_t j = 0; j < imgs.size(); ++j)
            for (auto& [t, c] : imgs[j].terms()) b.matrix(idx.at(t), static_cast<int>(j)) = c[0];
        return b;
    }

    std::vector<FracExp> degrees() const {
        std::vector<FracExp> out;
        u64 den = ipow(w_.p, w_.m_den);
        for (u64 k = 0; k <= static_cast<u64>(w_.D) * den; ++k) out.push_back(FracExp::make(k, w_.m_den, w_.p));
        return out;
    }

    std::vector<GradedBlock> total_differential(int m) {
        std::vector<GradedBlock> out;
        for (auto& d : degrees()) out.push_back(block(m, d));
        return out;
    }

    // H^0 and H^1 degree by degree; N = 1 gives the mod-p groups
    CechH cohomology() {
        CechH h;
        h.window = w_;
        for (auto& d : degrees()) {
            CechDegreeH g;
            g.degree = d;
            g.interior = w_.interior(d);
            GradedBlock b0 = block(0, d);
            Submodule K0 = kernel(b0.matrix);
            ModuleStructure k0 = kernel_structure(b0.matrix);
            g.h0 = w_.N == 1 ? static_cast<int>(K0.basis().size()) : k0.free;
            for (auto& v : K0.basis()) {
                PDSeries s(R_, layout(0));
                for (size_t i = 0; i < v.size(); ++i)
                    if (v[i]) s.add_term(b0.source[i], Coeffs{v[i]});
                g.h0_basis.push_back(s);
            }
            if (w_.N == 1) {
                // level-1 coordinates of b1's source must contain b0's targets;
                // for N >= 2 the p-corrections go deeper and only H^0 is reported
                GradedBlock b1 = block(1, d);
                std::map<ExpVec, int> pos;
                for (size_t i = 0; i < b1.source.size(); ++i) pos.emplace(b1.source[i], static_cast<int>(i));
                for (auto& t : b0.target)
                    if (!pos.count(t)) throw WindowTooSmall("cohomology: d0 image leaves the level-1 window");
                int rk0 = rank_mod_p(b0.matrix);
                int ker1 = static_cast<int>(b1.source.size()) - rank_mod_p(b1.matrix);
                g.h1 = ker1 - rk0;
            }
            if (g.interior) {
                h.h0_interior += g.h0;
                h.h1_interior += g.h1;
            }
            h.degrees.push_back(std::move(g));
        }
        return h;
    }

private:
    // image under d^j of the level-m basis element in one variable
    const PDSeries& image_var(int j, int m, int var, const FracExp& e) {
        auto key = std::make_tuple(j, m, var, e.num, e.e);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        VarLayout L1 = layout(m + 1);
        PDSeries img(R_, L1);
        if (e.is_zero()) {
            img = PDSeries::one(R_, L1);
        } else if (j <= m) {
            // relabel: x stays, t_i -> t_i for i <= j, t_{i+1} otherwise
            int target = var == 0 ? 0 : (var <= j ? var : var + 1);
            img = PDSeries::basis(R_, L1, ExpVec::unit(L1.n(), target, e), R_->one());
        } else if (var == 0) {
            img = shifted_power(0, m + 1, e, +1);
        } else {
            img = shifted_power(var, m + 1, e, -1);
        }
        return cache_.emplace(key, std::move(img)).first->second;
    }

    // [y_a^{1/p^k} + sign * t_b^{1/p^k}] at level b, t_b being the last variable
    PDSeries teich_root_sum(int a, int b, int k, int sign) {
        VarLayout L1 = layout(b);
        SharpSeries s(F_, L1);
        FracExp r = FracExp::make(1, k, w_.p);
        s.add_term(ExpVec::unit(L1.n(), a, r), F_->one());
        s.add_term(ExpVec::unit(L1.n(), b, r), sign > 0 ? F_->one() : F_->neg(F_->one()));
        return teichmuller_lift(s, w_.N);
    }

    // var^e / (e!)_p with var -> var + sign * t_{m1}
    PDSeries shifted_power(int var, int m1, const FracExp& e, int sign) {
        u64 p = w_.p;
        int k = e.e;  // e = q + r/p^k with r < p^k
        u64 den = ipow(p, k);
        u64 q = e.num / den, r = e.num % den;
        PDSeries s = teich_root_sum(var, m1, k, sign);
        if (var == 0) {
            // plain variable: no divided powers, [x + t]^e = s^(q p^k + r)
            return s.pow(q * den + r);
        }
        PDSeries T = s.pow(den);
        u64 unit = 1;
        for (u64 i = 2; i <= q; ++i) {
            u64 ii = i;
            while (ii % p == 0) ii /= p;
            unit = R_->prec().mul(unit, ii);
        }
        PDSeries out = divided_power(T, static_cast<int>(q)) * s.pow(r);
        return out.scaled(unit);
    }

    CechWindow w_;
    RingPtr R_, F_;
    std::map<std::tuple<int, int, int, u64, int>, PDSeries> cache_;
};

}  // namespace pcris
