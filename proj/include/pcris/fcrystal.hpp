#pragma once

// Sigma-semilinear crystals over W(F_{p^f})/p^N.  Column convention:
// F(sum_j l_j e_j) = sum_j sigma(l_j) Phi e_j, i.e. F(v) = Phi * sigma(v).

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tower.hpp"

namespace pcris {

using CVec = std::vector<Coeffs>;
using CMat = std::vector<CVec>;  // row-major

namespace cmat {

inline CMat zeros(const GaloisRing& R, int rows, int cols) { return CMat(rows, CVec(cols, R.zero())); }

inline CMat identity(const GaloisRing& R, int n) {
    CMat m = zeros(R, n, n);
    for (int i = 0; i < n; ++i) m[i][i] = R.one();
    return m;
}

inline int cols(const CMat& a) { return a.empty() ? 0 : static_cast<int>(a[0].size()); }

inline CMat mul(const GaloisRing& R, const CMat& a, const CMat& b) {
    int n = static_cast<int>(a.size()), k = cols(a), m = cols(b);
    CMat c = zeros(R, n, m);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < k; ++l) {
            if (R.is_zero(a[i][l])) continue;
            for (int j = 0; j < m; ++j) R.add_to(c[i][j], R.mul(a[i][l], b[l][j]));
        }
    return c;
}

inline CVec apply(const GaloisRing& R, const CMat& a, const CVec& v) {
    CVec out(a.size(), R.zero());
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j) R.add_to(out[i], R.mul(a[i][j], v[j]));
    return out;
}

template <class Fn>
CMat map(const CMat& a, Fn fn) {
    CMat r = a;
    for (auto& row : r)
        for (auto& x : row) x = fn(x);
    return r;
}

inline CMat sigma(const GaloisRing& R, const CMat& a) {
    return map(a, [&](const Coeffs& x) { return R.sigma(x); });
}

inline CVec sigma(const GaloisRing& R, const CVec& v) {
    CVec r;
    for (auto& x : v) r.push_back(R.sigma(x));
    return r;
}

inline CVec sigma_inv(const GaloisRing& R, const CVec& v) {
    CVec r;
    for (auto& x : v) r.push_back(R.sigma_inv(x));
    return r;
}

// Coefficients of det(xI - A), leading coefficient first (Berkowitz, division free).
inline CVec charpoly(const GaloisRing& R, const CMat& A) {
    int n = static_cast<int>(A.size());
    CVec vect{R.one()};
    for (int r = 0; r < n; ++r) {
        // leading (r+1)x(r+1) block: [[M, C], [Rw, a]]
        CVec t{R.one(), R.neg(A[r][r])};
        CVec col(r);
        for (int i = 0; i < r; ++i) col[i] = A[i][r];
        for (int k = 0; k < r; ++k) {
            Coeffs s = R.zero();
            for (int i = 0; i < r; ++i) R.add_to(s, R.mul(A[r][i], col[i]));
            t.push_back(R.neg(s));
            CVec next(r, R.zero());
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < r; ++j) R.add_to(next[i], R.mul(A[i][j], col[j]));
            col = std::move(next);
        }
        CVec nv(r + 2, R.zero());
        for (int i = 0; i < r + 2; ++i)
            for (int j = 0; j <= std::min(i, r); ++j) R.add_to(nv[i], R.mul(t[i - j], vect[j]));
        vect = std::move(nv);
    }
    return vect;
}

inline Coeffs det(const GaloisRing& R, const CMat& A) {
    if (A.empty()) return R.one();
    Coeffs c = charpoly(R, A).back();
    return A.size() % 2 ? R.neg(c) : c;
}

inline CMat submatrix(const CMat& A, const std::vector<int>& rows, const std::vector<int>& cs) {
    CMat m;
    for (int i : rows) {
        CVec r;
        for (int j : cs) r.push_back(A[i][j]);
        m.push_back(r);
    }
    return m;
}

inline CMat adjugate(const GaloisRing& R, const CMat& A) {
    int n = static_cast<int>(A.size());
    CMat adj = zeros(R, n, n);
    if (n == 1) {
        adj[0][0] = R.one();
        return adj;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<int> rs, cs;
            for (int k = 0; k < n; ++k) {
                if (k != j) rs.push_back(k);
                if (k != i) cs.push_back(k);
            }
            Coeffs d = det(R, submatrix(A, rs, cs));
            adj[i][j] = (i + j) % 2 ? R.neg(d) : d;
        }
    return adj;
}

// Move entries to another precision of the same field (canonical lift or reduction).
inline CMat to_precision(const GaloisRing& R2, const CMat& A) {
    return map(A, [&](const Coeffs& x) { return R2.reduce(x); });
}

}  // namespace cmat

// Phi is kept one digit beyond the working precision N: F/p - 1 divides by p,
// so its value mod p^N depends on Phi mod p^{N+1}.
class FCrystal {
public:
    FCrystal() = default;
    // entries known mod p^N; the guard digit is taken from the canonical representatives
    FCrystal(RingPtr R, CMat phi, std::string label = {}) : FCrystal(guarded(R->at_precision(R->N() + 1), std::move(phi), std::move(label))) {}

    // entries known mod p^{N+1}, where Rg has precision N+1
    static FCrystal guarded(RingPtr Rg, CMat phi, std::string label = {}) {
        if (Rg->N() < 2) throw BadParameters("FCrystal: guard ring needs precision >= 2");
        FCrystal x;
        x.Rg_ = std::move(Rg);
        x.R_ = x.Rg_->at_precision(x.Rg_->N() - 1);
        x.label_ = std::move(label);
        int r = static_cast<int>(phi.size());
        for (auto& row : phi) {
            if (static_cast<int>(row.size()) != r) throw BadParameters("FCrystal: matrix must be square");
            for (auto& c : row) c = x.Rg_->reduce(c);
        }
        x.phig_ = std::move(phi);
        x.phi_ = cmat::to_precision(*x.R_, x.phig_);
        return x;
    }

    const RingPtr& ring() const { return R_; }
    const RingPtr& guard_ring() const { return Rg_; }
    u64 p() const { return R_->p(); }
    int f() const { return R_->degree(); }
    int N() const { return R_->N(); }
    int rank() const { return static_cast<int>(phi_.size()); }
    const CMat& phi() const { return phi_; }
    const CMat& guard_phi() const { return phig_; }
    const std::string& label() const { return label_; }
    void set_label(std::string s) { label_ = std::move(s); }

    CVec apply(const CVec& v) const { return cmat::apply(*R_, phi_, cmat::sigma(*R_, v)); }

    FCrystal at_precision(int N2) const {
        auto Rg2 = Rg_->at_precision(N2 + 1);
        return guarded(Rg2, cmat::to_precision(*Rg2, phig_), label_);
    }

    FCrystal at_level(int fprime) const {
        if (fprime % f() != 0) throw NotASubfield("at_level: f does not divide f'");
        auto to = GaloisRing::get(make_field(p(), fprime), Rg_->N());
        CMat m = cmat::map(phig_, [&](const Coeffs& x) { return embed_coeffs(*Rg_, *to, x); });
        return guarded(to, m, label_);
    }

    bool operator==(const FCrystal& o) const { return Rg_ == o.Rg_ && phig_ == o.phig_ && label_ == o.label_; }

private:
    RingPtr R_, Rg_;
    CMat phi_, phig_;
    std::string label_;
};

inline FCrystal standard_slope_module(int r, int s, const RingPtr& R0) {
    if (r < 1 || s < 0 || std::gcd(r, s) != 1) throw BadParameters("standard_slope_module: need r >= 1, s >= 0, gcd(r,s) = 1");
    auto R = R0->at_precision(R0->N() + 1);
    CMat phi = cmat::zeros(*R, r, r);
    for (int i = 0; i + 1 < r; ++i) phi[i + 1][i] = R->one();
    phi[0][r - 1] = R->scalar(R->prec().ppow(s));
    return FCrystal::guarded(R, phi, "M_" + std::to_string(s) + "/" + std::to_string(r));
}

inline FCrystal direct_sum(const FCrystal& a, const FCrystal& b) {
    if (a.ring() != b.ring()) throw BaseMismatch("direct_sum: different bases");
    int n = a.rank(), m = b.rank();
    CMat phi = cmat::zeros(*a.guard_ring(), n + m, n + m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) phi[i][j] = a.guard_phi()[i][j];
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) phi[n + i][n + j] = b.guard_phi()[i][j];
    return FCrystal::guarded(a.guard_ring(), phi, "(" + a.label() + "+" + b.label() + ")");
}

// basis e_i (x) f_j at index i * rank(b) + j
inline FCrystal tensor(const FCrystal& a, const FCrystal& b) {
    if (a.ring() != b.ring()) throw BaseMismatch("tensor: different bases");
    const auto& R = *a.guard_ring();
    int n = a.rank(), m = b.rank();
    CMat phi = cmat::zeros(R, n * m, n * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) phi[i * m + k][j * m + l] = R.mul(a.guard_phi()[i][j], b.guard_phi()[k][l]);
    return FCrystal::guarded(a.guard_ring(), phi, "(" + a.label() + "x" + b.label() + ")");
}

// i-element subsets of {0..n-1} in lexicographic order
inline std::vector<std::vector<int>> subsets(int n, int i) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto& self, int start) -> void {
        if (static_cast<int>(cur.size()) == i) {
            out.push_back(cur);
            return;
        }
        for (int k = start; k < n; ++k) {
            cur.push_back(k);
            self(self, k + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

// basis e_I = e_{i_1} ^ ... ^ e_{i_k}, I increasing, lexicographic; entries are minors
inline FCrystal wedge(const FCrystal& x, int i) {
    if (i < 0) throw BadParameters("wedge: negative degree");
    const auto& R = *x.guard_ring();
    auto sets = subsets(x.rank(), i);
    int n = static_cast<int>(sets.size());
    CMat phi = cmat::zeros(R, n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) phi[a][b] = cmat::det(R, cmat::submatrix(x.guard_phi(), sets[a], sets[b]));
    return FCrystal::guarded(x.guard_ring(), phi, "L" + std::to_string(i) + x.label());
}

// H^1 of an ordinary abelian variety: F(x_i) = x_i, F(y_i) = p y_i.
inline FCrystal ordinary_h1(int g, const RingPtr& R0) {
    if (g < 1) throw BadParameters("ordinary_h1: g must be >= 1");
    auto R = R0->at_precision(R0->N() + 1);
    CMat phi = cmat::zeros(*R, 2 * g, 2 * g);
    for (int i = 0; i < g; ++i) {
        phi[i][i] = R->one();
        phi[g + i][g + i] = R->scalar(R->prec().ppow(1));
    }
    return FCrystal::guarded(R, phi, "H1ord" + std::to_string(g));
}

// cohomology crystals H^0..H^{2g}, H^i = wedge^i H^1
inline std::vector<FCrystal> ordinary_av(int g, const RingPtr& R) {
    auto h1 = ordinary_h1(g, R);
    std::vector<FCrystal> out;
    for (int i = 0; i <= 2 * g; ++i) {
        auto c = wedge(h1, i);
        c.set_label("ordinary-av g=" + std::to_string(g) + " H" + std::to_string(i));
        out.push_back(c);
    }
    return out;
}

// supersingular elliptic curve: F(x) = y, F(y) = p x
inline FCrystal supersingular_h1(const RingPtr& R0) {
    auto R = R0->at_precision(R0->N() + 1);
    CMat phi = cmat::zeros(*R, 2, 2);
    phi[1][0] = R->one();
    phi[0][1] = R->scalar(R->prec().ppow(1));
    return FCrystal::guarded(R, phi, "H1ss");
}

// E x E by Kunneth from H^*(E) = (W, H^1, wedge^2 H^1)
inline std::vector<FCrystal> supersingular_exe(const RingPtr& R) {
    auto e1 = supersingular_h1(R);
    auto e0 = wedge(e1, 0), e2 = wedge(e1, 2);
    std::vector<FCrystal> out{
        tensor(e0, e0),
        direct_sum(tensor(e1, e0), tensor(e0, e1)),
        direct_sum(direct_sum(tensor(e2, e0), tensor(e1, e1)), tensor(e0, e2)),
        direct_sum(tensor(e2, e1), tensor(e1, e2)),
        tensor(e2, e2),
    };
    for (size_t i = 0; i < out.size(); ++i) out[i].set_label("supersingular-exe H" + std::to_string(i));
    return out;
}

// ---------------------------------------------------------------------------
// restriction of scalars

// Z/p^N matrix of v -> A sigma(v) + B v, coordinates (j, k) -> j*f + k in the power basis.
inline ZpnMatrix semilinear_matrix(const GaloisRing& R, const CMat& A, const CMat& B) {
    int rows = static_cast<int>(std::max(A.size(), B.size()));
    int cols = std::max(cmat::cols(A), cmat::cols(B));
    int f = R.degree();
    ZpnMatrix m(R.prec(), rows * f, cols * f);
    for (int j = 0; j < cols; ++j)
        for (int k = 0; k < f; ++k) {
            Coeffs u = R.zero();
            u[k] = 1;
            Coeffs su = R.sigma(u);
            for (int i = 0; i < rows; ++i) {
                Coeffs y = R.zero();
                if (!A.empty()) R.add_to(y, R.mul(A[i][j], su));
                if (!B.empty()) R.add_to(y, R.mul(B[i][j], u));
                for (int l = 0; l < f; ++l) m(i * f + l, j * f + k) = y[l];
            }
        }
    return m;
}

inline Vec flatten(const CVec& v) {
    Vec out;
    for (auto& x : v) out.insert(out.end(), x.begin(), x.end());
    return out;
}

inline CVec unflatten(const Vec& v, int f) {
    CVec out;
    for (size_t i = 0; i < v.size(); i += f) out.emplace_back(v.begin() + i, v.begin() + i + f);
    return out;
}

struct NygaardLattice {
    CMat basis;                // columns span the lattice, precision N
    std::vector<int> free_cols;  // columns that are lifts of kernel vectors mod p
    Submodule sub;             // Z/p^N span in restricted coordinates
};

// F^{-1}(pM): lifts of sigma^{-1}(ker Phi mod p) together with p e_c.
inline NygaardLattice nygaard_lattice(const FCrystal& X) {
    const auto& R = *X.ring();
    auto F1 = X.ring()->at_precision(1);
    int r = X.rank();
    CMat a = cmat::to_precision(*F1, X.phi());
    std::vector<int> pivcol;
    int row = 0;
    for (int c = 0; c < r && row < r; ++c) {
        int piv = -1;
        for (int i = row; i < r; ++i)
            if (!F1->is_zero(a[i][c])) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(a[piv], a[row]);
        Coeffs inv = F1->inv(a[row][c]);
        for (auto& x : a[row]) x = F1->mul(x, inv);
        for (int i = 0; i < r; ++i) {
            if (i == row || F1->is_zero(a[i][c])) continue;
            Coeffs q = a[i][c];
            for (int j = 0; j < r; ++j) a[i][j] = F1->sub(a[i][j], F1->mul(q, a[row][j]));
        }
        pivcol.push_back(c);
        ++row;
    }
    NygaardLattice L;
    L.basis = cmat::zeros(R, r, r);
    std::vector<bool> is_piv(r, false);
    for (int c : pivcol) is_piv[c] = true;
    for (int j = 0; j < r; ++j) {
        if (is_piv[j]) {
            L.basis[j][j] = R.scalar(R.prec().ppow(1));
            continue;
        }
        CVec k(r, F1->zero());
        k[j] = F1->one();
        for (size_t i = 0; i < pivcol.size(); ++i) k[pivcol[i]] = F1->neg(a[i][j]);
        for (int i = 0; i < r; ++i) L.basis[i][j] = R.reduce(F1->sigma_inv(k[i]));
        L.free_cols.push_back(j);
    }
    ZpnMatrix bm = semilinear_matrix(R, {}, L.basis);
    L.sub = image(bm);
    return L;
}

enum class MapKind { FMinusP, FOverPMinus1, FMinus1, PowerSigmaMinus1 };

// Z/p^N matrix of the chosen map.  For F/p - 1 the domain coordinates are the
// lattice coordinates of nygaard_lattice(X); the division by p is exact at N+1.
inline ZpnMatrix restrict_scalars(const FCrystal& X, MapKind kind, int a = 0) {
    const auto& R = *X.ring();
    int r = X.rank();
    CMat minus_one = cmat::map(cmat::identity(R, r), [&](const Coeffs& x) { return R.neg(x); });
    switch (kind) {
        case MapKind::FMinusP: {
            CMat b = cmat::map(cmat::identity(R, r), [&](const Coeffs& x) { return R.neg(R.mul_p(x, 1)); });
            return semilinear_matrix(R, X.phi(), b);
        }
        case MapKind::FMinus1:
            return semilinear_matrix(R, X.phi(), minus_one);
        case MapKind::PowerSigmaMinus1: {
            CMat s = cmat::map(cmat::identity(R, r), [&](const Coeffs& x) { return R.mul_p(x, a); });
            return semilinear_matrix(R, s, minus_one);
        }
        case MapKind::FOverPMinus1: {
            auto L = nygaard_lattice(X);
            const auto& Rw = X.guard_ring();
            const CMat& phi = X.guard_phi();
            CMat b = cmat::to_precision(*Rw, L.basis);
            CMat fb = cmat::mul(*Rw, phi, cmat::sigma(*Rw, b));
            CMat g = cmat::map(fb, [&](const Coeffs& x) {
                try {
                    return R.reduce(Rw->div_p(x, 1));
                } catch (const PrecisionExhausted&) {
                    throw NotNygaardDomain("restrict_scalars: F(lattice) is not in pM");
                }
            });
            CMat nb = cmat::map(L.basis, [&](const Coeffs& x) { return R.neg(x); });
            return semilinear_matrix(R, g, nb);
        }
    }
    throw BadParameters("restrict_scalars: unknown map");
}

// ---------------------------------------------------------------------------
// Newton polygon

struct Slope {
    i64 num = 0, den = 1;
    static Slope make(i64 n, i64 d) {
        i64 g = std::gcd(n < 0 ? -n : n, d);
        if (g == 0) g = 1;
        return {n / g, d / g};
    }
    auto operator<=>(const Slope& o) const { return num * o.den <=> o.num * den; }
    bool operator==(const Slope& o) const { return num == o.num && den == o.den; }
    std::string to_string() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }
};

struct NewtonPolygon {
    std::vector<std::pair<Slope, int>> segments;  // nondecreasing slopes with multiplicities
    bool operator==(const NewtonPolygon& o) const { return segments == o.segments; }
    std::string to_string() const {
        std::string s = "{";
        for (size_t i = 0; i < segments.size(); ++i)
            s += (i ? ", " : "") + std::string("(") + segments[i].first.to_string() + "," + std::to_string(segments[i].second) + ")";
        return s + "}";
    }
};

// Linear operator F^f = Phi sigma(Phi) ... sigma^{f-1}(Phi).
inline CMat frobenius_power_matrix(const FCrystal& X) {
    const auto& R = *X.ring();
    CMat acc = cmat::identity(R, X.rank()), cur = X.phi();
    for (int k = 0; k < X.f(); ++k) {
        acc = cmat::mul(R, acc, cur);
        cur = cmat::sigma(R, cur);
    }
    return acc;
}

namespace detail {

// lower hull of (k, v_k); returns segment endpoints
inline std::vector<std::pair<i64, i64>> lower_hull(const std::vector<std::pair<i64, i64>>& pts) {
    std::vector<std::pair<i64, i64>> h;
    for (auto& q : pts) {
        while (h.size() >= 2) {
            auto& a = h[h.size() - 2];
            auto& b = h.back();
            i64 cross = (b.first - a.first) * (q.second - a.second) - (b.second - a.second) * (q.first - a.first);
            if (cross <= 0)
                h.pop_back();
            else
                break;
        }
        h.push_back(q);
    }
    return h;
}

}  // namespace detail

inline NewtonPolygon newton_polygon(const FCrystal& X) {
    NewtonPolygon np;
    int r = X.rank();
    if (r == 0) return np;
    const auto& R = *X.ring();
    CVec cp = cmat::charpoly(R, frobenius_power_matrix(X));  // leading first
    int N = X.N();
    std::vector<std::pair<i64, i64>> known, capped;
    for (int k = 0; k <= r; ++k) {
        const Coeffs& c = cp[r - k];  // coefficient of x^k
        if (R.is_zero(c)) {
            if (k == 0) throw PrecisionInsufficient("newton_polygon: det(F^f) vanishes mod p^N");
            capped.push_back({k, N});
            continue;
        }
        known.push_back({k, R.val(c)});
        capped.push_back({k, R.val(c)});
    }
    auto h1 = detail::lower_hull(known), h2 = detail::lower_hull(capped);
    if (h1 != h2) throw PrecisionInsufficient("newton_polygon: a coefficient valuation is not determined at precision N");
    std::map<Slope, int> acc;
    for (size_t i = 0; i + 1 < h1.size(); ++i) {
        i64 dk = h1[i + 1].first - h1[i].first;
        i64 dv = h1[i].second - h1[i + 1].second;
        acc[Slope::make(dv, dk * X.f())] += static_cast<int>(dk);
    }
    for (auto& [s, m] : acc) np.segments.push_back({s, m});
    return np;
}

// ---------------------------------------------------------------------------
// fppf groups along the tower f' = f 2^j

struct FppfLevel {
    int fprime = 0;
    ModuleStructure kernel;
    ModuleStructure coker;
};

struct FppfGroups {
    int rank = 0;
    std::vector<FppfLevel> levels;
    int free_rank = 0;
    bool rank_stable = true;  // false means the tower did not stabilize
    int coker_free = 0;
    std::vector<int> finite_torsion;     // exponents whose multiplicity is constant on the tower
    std::vector<int> growing_exponents;  // exponents whose multiplicity changes
    i64 a = 0, b = 0;                    // torsion count = a f' + b
    bool affine_exact = true;
    int max_torsion_exponent = 0;
};

inline FppfGroups fppf_groups(const FCrystal& X, int tower_levels = 3) {
    if (tower_levels < 2) throw BadParameters("fppf_groups: need at least two tower levels");
    FppfGroups g;
    g.rank = X.rank();
    for (int j = 1; j <= tower_levels; ++j) {
        int fp = X.f() << j;
        FppfLevel lv;
        lv.fprime = fp;
        if (X.rank() > 0) {
            ZpnMatrix T = restrict_scalars(X.at_level(fp), MapKind::FOverPMinus1);
            lv.kernel = kernel_structure(T);
            lv.coker = cokernel_divisors(T);
        }
        g.levels.push_back(lv);
    }
    auto& last = g.levels.back();
    auto& prev = g.levels[g.levels.size() - 2];
    g.free_rank = last.kernel.free;
    g.rank_stable = last.kernel.free == prev.kernel.free && last.coker.free == prev.coker.free;
    g.coker_free = last.coker.free;

    std::map<int, std::vector<int>> counts;
    for (size_t j = 0; j < g.levels.size(); ++j)
        for (int e : g.levels[j].coker.torsion) {
            auto& v = counts[e];
            v.resize(g.levels.size(), 0);
            ++v[j];
            g.max_torsion_exponent = std::max(g.max_torsion_exponent, e);
        }
    for (auto& [e, v] : counts) {
        v.resize(g.levels.size(), 0);
        if (std::all_of(v.begin(), v.end(), [&](int c) { return c == v.front(); }))
            g.finite_torsion.insert(g.finite_torsion.end(), v.front(), e);
        else
            g.growing_exponents.push_back(e);
    }
    auto dim = [](const FppfLevel& l) { return static_cast<i64>(l.coker.torsion.size()); };
    i64 df = last.fprime - prev.fprime, dd = dim(last) - dim(prev);
    if (dd % df != 0) {
        g.affine_exact = false;
    } else {
        g.a = dd / df;
        g.b = dim(last) - g.a * last.fprime;
        for (auto& l : g.levels)
            if (dim(l) != g.a * l.fprime + g.b) g.affine_exact = false;
    }
    return g;
}

// Degree i of H_fl(X, Z_p(1)): free part from ker on H^i, torsion from coker on H^{i-1}.
struct FppfDegree {
    int degree = 0;
    int free_rank = 0;
    std::vector<int> finite_torsion;
    i64 unipotent_a = 0;
    int unipotent_exponent = 0;
    bool stable = true;
};

inline std::vector<FppfDegree> fppf_cohomology(const std::vector<FCrystal>& by_degree, int tower_levels, std::vector<FppfGroups>* groups = nullptr) {
    std::vector<FppfGroups> gs;
    for (auto& x : by_degree) gs.push_back(fppf_groups(x, tower_levels));
    std::vector<FppfDegree> out;
    for (size_t i = 0; i <= by_degree.size(); ++i) {
        FppfDegree d;
        d.degree = static_cast<int>(i);
        if (i < gs.size()) {
            d.free_rank = gs[i].free_rank;
            d.stable = gs[i].rank_stable;
        }
        if (i > 0) {
            const auto& c = gs[i - 1];
            d.finite_torsion = c.finite_torsion;
            d.unipotent_a = c.a;
            for (int e : c.growing_exponents) d.unipotent_exponent = std::max(d.unipotent_exponent, e);
            d.stable = d.stable && c.affine_exact;
        }
        out.push_back(d);
    }
    if (groups) *groups = std::move(gs);
    return out;
}

// coker(F - p) at f' = f 2^j, j = 0..levels
inline std::vector<ModuleStructure> coker_F_minus_p_tower(const FCrystal& X, int levels) {
    std::vector<ModuleStructure> out;
    for (int j = 0; j <= levels; ++j) out.push_back(cokernel_divisors(restrict_scalars(X.at_level(X.f() << j), MapKind::FMinusP)));
    return out;
}

// ---------------------------------------------------------------------------
// constructive preimages for F - p on pure slope modules

struct CokerWitness {
    bool certificate = false;
    CVec preimage;
    std::string method;  // "zero", "series-F", "series-Finv", "divisors"
    int terms = 0;
    ModuleStructure divisors;
};

inline CVec f_minus_p(const FCrystal& X, const CVec& x) {
    const auto& R = *X.ring();
    CVec y = X.apply(x);
    for (size_t i = 0; i < y.size(); ++i) y[i] = R.sub(y[i], R.mul_p(x[i], 1));
    return y;
}

inline CokerWitness coker_F_minus_p_witness(const FCrystal& X, const CVec& target) {
    const auto& R = *X.ring();
    int r = X.rank(), N = X.N();
    u64 p = X.p();
    if (static_cast<int>(target.size()) != r) throw AmbientMismatch("coker_F_minus_p_witness: target length differs from rank");
    CokerWitness w;
    w.divisors = cokernel_divisors(restrict_scalars(X, MapKind::FMinusP));
    if (std::all_of(target.begin(), target.end(), [&](const Coeffs& c) { return R.is_zero(c); })) {
        w.certificate = true;
        w.preimage = CVec(r, R.zero());
        w.method = "zero";
        return w;
    }
    // case selection only; the certificate below is checked by substitution
    NewtonPolygon np;
    try {
        np = newton_polygon(X);
    } catch (const PrecisionInsufficient&) {
        int N2 = N * (X.f() * r + 1);
        while (N2 > N && !Prec::fits(p, N2 + 1)) --N2;
        np = newton_polygon(X.at_precision(N2));
    }
    if (np.segments.size() != 1) {
        w.method = "divisors";
        return w;
    }
    Slope sl = np.segments.front().first;
    // pure slope s/r' in lowest terms; the sublattice condition uses these
    int rr = static_cast<int>(sl.den), ss = static_cast<int>(sl.num);
    int vt = N;
    for (auto& c : target) vt = std::min(vt, R.val(c));
    auto fits = [&](int W) { return Prec::fits(p, W); };

    if (ss > rr) {
        if (vt < rr) throw CaseInapplicable("coker_F_minus_p_witness: target not in p^r M");
        int K = rr * (N + 1);
        int W = N + K + 1;
        if (!fits(W)) throw PrecisionExhausted("coker_F_minus_p_witness: working precision too large");
        auto Rw = X.ring()->at_precision(W);
        FCrystal Xw = X.at_precision(W);
        CVec u = cmat::to_precision(*Rw, CMat{target})[0];
        CVec x(r, R.zero());
        for (int i = 0; i <= K; ++i) {
            for (int k = 0; k < r; ++k) {
                Coeffs c = Rw->div_p(u[k], i + 1);
                x[k] = R.sub(x[k], R.reduce(c));
            }
            u = Xw.apply(u);
        }
        w.preimage = x;
        w.terms = K + 1;
        w.method = "series-F";
    } else if (ss < rr) {
        if (vt < ss) throw CaseInapplicable("coker_F_minus_p_witness: target not in p^s M");
        int K = (N + 1 + ss) * rr / (rr - ss) + rr + 1;
        auto det0 = cmat::det(R, X.phi());
        int d = R.val(det0);
        int W = N + d * K + 1;
        if (!fits(W)) throw PrecisionExhausted("coker_F_minus_p_witness: working precision too large");
        auto Rw = X.ring()->at_precision(W);
        CMat phi = cmat::to_precision(*Rw, X.phi());
        CMat adj = cmat::adjugate(*Rw, phi);
        Coeffs det = cmat::det(*Rw, phi);
        Coeffs uinv = Rw->inv(Rw->div_p(det, d));
        auto finv = [&](const CVec& v) {
            CVec y = cmat::apply(*Rw, adj, v);
            for (auto& c : y) {
                if (Rw->val(c) < d) throw CaseInapplicable("coker_F_minus_p_witness: F^{-1} leaves the lattice");
                c = Rw->reduce(Rw->mul(Rw->div_p(c, d), uinv));
            }
            return cmat::sigma_inv(*Rw, y);
        };
        CVec t = cmat::to_precision(*Rw, CMat{target})[0];
        CVec term = finv(t);
        CVec x(r, R.zero());
        for (int i = 1; i <= K; ++i) {
            for (int k = 0; k < r; ++k) x[k] = R.add(x[k], R.reduce(term[k]));
            CVec pt = term;
            for (auto& c : pt) c = Rw->mul_p(c, 1);
            term = finv(pt);
        }
        w.preimage = x;
        w.terms = K;
        w.method = "series-Finv";
    } else {
        w.method = "divisors";
        return w;
    }
    if (f_minus_p(X, w.preimage) != target) throw PrecisionExhausted("coker_F_minus_p_witness: series did not converge at this precision");
    w.certificate = true;
    return w;
}

// ---------------------------------------------------------------------------
// multiplication by n on H^1 acts by n^i on H^i

struct IsogenyReport {
    u64 n = 1;
    int weight = 0;
    u64 scalar = 1;  // n^weight mod p^N
    bool lattice_preserved = false;
    bool commutes = false;
    bool kernel_scalar = false;
    bool coker_scalar = false;
    int kernel_free = 0;
    bool free_part_bijective = false;
    bool torsion_annihilated = false;
    bool ok() const { return lattice_preserved && commutes && kernel_scalar && coker_scalar; }
};

inline IsogenyReport isogeny_action_check(const FCrystal& X, u64 n, int weight) {
    const auto& R = *X.ring();
    const Prec& pr = R.prec();
    IsogenyReport rep;
    rep.n = n;
    rep.weight = weight;
    u64 sc = 1;
    for (int k = 0; k < weight; ++k) sc = pr.mul(sc, pr.red(n));
    rep.scalar = sc;
    int r = X.rank();
    CMat e = cmat::map(cmat::identity(R, r), [&](const Coeffs& x) { return R.scale(x, sc); });
    auto L = nygaard_lattice(X);
    ZpnMatrix T = restrict_scalars(X, MapKind::FOverPMinus1);
    ZpnMatrix EM = semilinear_matrix(R, {}, e);
    // lattice coordinates: e acts as the same scalar on the basis columns
    ZpnMatrix EL = EM;
    ZpnMatrix BM = semilinear_matrix(R, {}, L.basis);
    rep.lattice_preserved = BM * EL == EM * BM;
    rep.commutes = T * EL == EM * T;

    Submodule K = kernel(T);
    rep.kernel_scalar = true;
    for (auto& k : K.basis()) {
        Vec a = EL.apply(k), b = k;
        for (auto& x : b) x = pr.mul(x, sc);
        if (a != b) rep.kernel_scalar = false;
    }
    rep.kernel_free = kernel_structure(T).free;

    auto s = smith(T, true);
    const ZpnMatrix& U = *s.U;
    int m = T.rows();
    rep.coker_scalar = true;
    bool killed = true;
    for (int i = 0; i < m; ++i) {
        int ei = i < static_cast<int>(s.exps.size()) ? s.exps[i] : pr.N;
        if (ei == 0) continue;
        Vec unit(m, 0);
        unit[i] = 1;
        Vec g = preimage(U, unit);
        Vec img = U.apply(EM.apply(g));
        for (int k = 0; k < m; ++k) {
            int ek = k < static_cast<int>(s.exps.size()) ? s.exps[k] : pr.N;
            if (ek == 0) continue;
            u64 mod = ek >= pr.N ? pr.mod : ipow(pr.p, ek);
            u64 want = k == i ? sc % mod : 0;
            if (img[k] % mod != want) rep.coker_scalar = false;
        }
        if (ei < pr.N && sc % ipow(pr.p, ei) != 0) killed = false;
    }
    rep.free_part_bijective = sc % pr.p != 0;
    rep.torsion_annihilated = killed;
    return rep;
}

struct BrauerProfile {
    i64 a = 0;
    int exponent_bound = 0;
    bool negative_divisible_rank = false;
};

inline BrauerProfile brauer_profile(const FppfDegree& h2, const FppfDegree& h3, int ns_rank) {
    BrauerProfile b;
    b.a = static_cast<i64>(h2.free_rank) - ns_rank;
    b.negative_divisible_rank = b.a < 0;
    for (int e : h3.finite_torsion) b.exponent_bound = std::max(b.exponent_bound, e);
    return b;
}

}  // namespace pcris
