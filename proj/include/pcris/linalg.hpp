#pragma once

// Dense linear algebra over Z/p^N.  Matrices act on column vectors; a
// Submodule is stored by the Howell form of a generating set of rows.

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "error.hpp"

namespace pcris {

using Vec = std::vector<u64>;

class ZpnMatrix {
  public:
    ZpnMatrix() = default;
    ZpnMatrix(Prec pr, int rows, int cols) : pr_(pr), rows_(rows), cols_(cols), a_(size_t(rows) * cols, 0) {}

    static ZpnMatrix identity(Prec pr, int n) {
        ZpnMatrix m(pr, n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1 % pr.mod;
        return m;
    }
    static ZpnMatrix from_rows(Prec pr, const std::vector<Vec>& rows, int cols) {
        ZpnMatrix m(pr, static_cast<int>(rows.size()), cols);
        for (int i = 0; i < m.rows_; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = pr.red(rows[i][j]);
        return m;
    }

    const Prec& prec() const { return pr_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    u64& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    u64 operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

    Vec row(int i) const { return Vec(a_.begin() + size_t(i) * cols_, a_.begin() + size_t(i + 1) * cols_); }
    Vec col(int j) const {
        Vec v(rows_);
        for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }
    std::vector<Vec> row_list() const {
        std::vector<Vec> r;
        for (int i = 0; i < rows_; ++i) r.push_back(row(i));
        return r;
    }

    ZpnMatrix transpose() const {
        ZpnMatrix t(pr_, cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Vec apply(const Vec& v) const {
        if (static_cast<int>(v.size()) != cols_) throw AmbientMismatch("vector length does not match matrix columns");
        Vec out(rows_, 0);
        for (int i = 0; i < rows_; ++i) {
            u128 acc = 0;
            const u64* r = &a_[size_t(i) * cols_];
            for (int j = 0; j < cols_; ++j) {
                if (r[j] && v[j]) acc = (acc + u128(r[j]) * v[j]) % pr_.mod;
            }
            out[i] = static_cast<u64>(acc);
        }
        return out;
    }

    ZpnMatrix operator*(const ZpnMatrix& o) const {
        if (cols_ != o.rows_) throw AmbientMismatch("matrix product dimension mismatch");
        ZpnMatrix r(pr_, rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                u64 a = (*this)(i, k);
                if (!a) continue;
                for (int j = 0; j < o.cols_; ++j)
                    if (o(k, j)) r(i, j) = pr_.add(r(i, j), pr_.mul(a, o(k, j)));
            }
        return r;
    }
    ZpnMatrix operator+(const ZpnMatrix& o) const {
        ZpnMatrix r = *this;
        for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = pr_.add(a_[i], o.a_[i]);
        return r;
    }
    ZpnMatrix operator-(const ZpnMatrix& o) const {
        ZpnMatrix r = *this;
        for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = pr_.sub(a_[i], o.a_[i]);
        return r;
    }
    ZpnMatrix scaled(u64 c) const {
        ZpnMatrix r = *this;
        for (auto& x : r.a_) x = pr_.mul(x, c);
        return r;
    }
    bool is_zero() const {
        return std::all_of(a_.begin(), a_.end(), [](u64 x) { return x == 0; });
    }
    bool operator==(const ZpnMatrix& o) const {
        return pr_ == o.pr_ && rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }

  private:
    Prec pr_;
    int rows_ = 0, cols_ = 0;
    std::vector<u64> a_;
};

namespace detail {

inline bool zero_vec(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](u64 x) { return x == 0; });
}

inline void axpy(const Prec& pr, Vec& y, u64 c, const Vec& x, size_t from = 0) {
    if (!c) return;
    for (size_t j = from; j < y.size(); ++j)
        if (x[j]) y[j] = pr.sub(y[j], pr.mul(c, x[j]));
}

// Howell form of the row span of `rows` (each of length `cols`).
inline std::vector<Vec> howell_rows(const Prec& pr, std::vector<Vec> pool, int cols) {
    std::vector<Vec> out;
    std::vector<int> pivcol;
    std::vector<int> pivexp;
    pool.erase(std::remove_if(pool.begin(), pool.end(), zero_vec), pool.end());
    for (int c = 0; c < cols && !pool.empty(); ++c) {
        int best = -1, bv = pr.N;
        for (size_t i = 0; i < pool.size(); ++i) {
            int v = pr.val(pool[i][c]);
            if (v < bv) {
                bv = v;
                best = static_cast<int>(i);
                if (v == 0) break;
            }
        }
        if (best < 0) continue;
        Vec r = std::move(pool[best]);
        pool.erase(pool.begin() + best);
        u64 pe = ipow(pr.p, bv);
        u64 unit = r[c] / pe;
        u64 uinv = pr.inv(unit);
        for (int j = c; j < cols; ++j) r[j] = pr.mul(r[j], uinv);
        for (auto& s : pool) {
            if (s[c]) axpy(pr, s, s[c] / pe, r, c);
        }
        if (bv > 0) {
            Vec sat(cols, 0);
            u64 k = ipow(pr.p, pr.N - bv);
            for (int j = c; j < cols; ++j) sat[j] = pr.mul(r[j], k);
            if (!zero_vec(sat)) pool.push_back(std::move(sat));
        }
        pool.erase(std::remove_if(pool.begin(), pool.end(), zero_vec), pool.end());
        out.push_back(std::move(r));
        pivcol.push_back(c);
        pivexp.push_back(bv);
    }
    for (size_t i = 0; i < out.size(); ++i) {
        int c = pivcol[i];
        u64 pe = ipow(pr.p, pivexp[i]);
        for (size_t k = 0; k < i; ++k) {
            u64 q = out[k][c] / pe;
            if (q) axpy(pr, out[k], q, out[i], c);
        }
    }
    return out;
}

}  // namespace detail

inline ZpnMatrix howell_form(const ZpnMatrix& m) {
    auto rows = detail::howell_rows(m.prec(), m.row_list(), m.cols());
    return ZpnMatrix::from_rows(m.prec(), rows, m.cols());
}

class Submodule {
  public:
    Submodule() = default;
    Submodule(Prec pr, int ambient, const std::vector<Vec>& gens)
        : pr_(pr), ambient_(ambient), basis_(detail::howell_rows(pr, gens, ambient)) {}

    static Submodule whole(Prec pr, int n) {
        std::vector<Vec> g;
        for (int i = 0; i < n; ++i) {
            Vec v(n, 0);
            v[i] = 1 % pr.mod;
            g.push_back(v);
        }
        return Submodule(pr, n, g);
    }

    const Prec& prec() const { return pr_; }
    int ambient() const { return ambient_; }
    const std::vector<Vec>& basis() const { return basis_; }
    ZpnMatrix matrix() const { return ZpnMatrix::from_rows(pr_, basis_, ambient_); }

    bool contains(Vec v) const {
        if (static_cast<int>(v.size()) != ambient_) throw AmbientMismatch("vector length differs from ambient rank");
        for (auto& x : v) x = pr_.red(x);
        size_t bi = 0;
        for (int c = 0; c < ambient_; ++c) {
            if (!v[c]) {
                if (bi < basis_.size() && lead(basis_[bi]) == c) ++bi;
                continue;
            }
            if (bi >= basis_.size() || lead(basis_[bi]) != c) return false;
            const Vec& r = basis_[bi];
            u64 piv = r[c];
            if (v[c] % piv != 0) return false;
            detail::axpy(pr_, v, v[c] / piv, r, c);
            ++bi;
        }
        return true;
    }

    // Number of elements is p^(sum of (N - pivot valuation)).
    int log_order() const {
        int s = 0;
        for (auto& r : basis_) s += pr_.N - pr_.val(r[lead(r)]);
        return s;
    }

    bool operator==(const Submodule& o) const {
        return pr_ == o.pr_ && ambient_ == o.ambient_ && basis_ == o.basis_;
    }
    bool operator!=(const Submodule& o) const { return !(*this == o); }

  private:
    static int lead(const Vec& r) {
        for (size_t i = 0; i < r.size(); ++i)
            if (r[i]) return static_cast<int>(i);
        return -1;
    }
    Prec pr_;
    int ambient_ = 0;
    std::vector<Vec> basis_;
};

inline Submodule kernel(const ZpnMatrix& m) {
    const Prec& pr = m.prec();
    int R = m.rows(), C = m.cols();
    std::vector<Vec> aug(C, Vec(R + C, 0));
    for (int j = 0; j < C; ++j) {
        for (int i = 0; i < R; ++i) aug[j][i] = m(i, j);
        aug[j][R + j] = 1 % pr.mod;
    }
    auto h = detail::howell_rows(pr, std::move(aug), R + C);
    std::vector<Vec> gens;
    for (auto& r : h) {
        bool head_zero = std::all_of(r.begin(), r.begin() + R, [](u64 x) { return x == 0; });
        if (head_zero) gens.emplace_back(r.begin() + R, r.end());
    }
    return Submodule(pr, C, gens);
}

inline Submodule image(const ZpnMatrix& m) {
    return Submodule(m.prec(), m.rows(), m.transpose().row_list());
}

inline Submodule intersect(const Submodule& a, const Submodule& b) {
    if (a.ambient() != b.ambient()) throw AmbientMismatch("intersect: ambient ranks differ");
    if (a.prec() != b.prec()) throw PrecisionMismatch("intersect: precisions differ");
    int n = a.ambient();
    std::vector<Vec> rows;
    for (auto& r : a.basis()) {
        Vec v(2 * n);
        std::copy(r.begin(), r.end(), v.begin());
        std::copy(r.begin(), r.end(), v.begin() + n);
        rows.push_back(std::move(v));
    }
    for (auto& r : b.basis()) {
        Vec v(2 * n, 0);
        std::copy(r.begin(), r.end(), v.begin());
        rows.push_back(std::move(v));
    }
    auto h = detail::howell_rows(a.prec(), std::move(rows), 2 * n);
    std::vector<Vec> gens;
    for (auto& r : h)
        if (std::all_of(r.begin(), r.begin() + n, [](u64 x) { return x == 0; })) gens.emplace_back(r.begin() + n, r.end());
    return Submodule(a.prec(), n, gens);
}

// Smith normal form U·m·V = diag(p^e_0, p^e_1, ...), exponents nondecreasing.
// An exponent equal to N stands for a zero diagonal entry.
struct SmithForm {
    std::vector<int> exps;  // length min(rows, cols)
    std::optional<ZpnMatrix> U, V;
};

inline SmithForm smith(const ZpnMatrix& m, bool with_transforms) {
    const Prec& pr = m.prec();
    int R = m.rows(), C = m.cols();
    ZpnMatrix a = m;
    ZpnMatrix U = with_transforms ? ZpnMatrix::identity(pr, R) : ZpnMatrix();
    ZpnMatrix V = with_transforms ? ZpnMatrix::identity(pr, C) : ZpnMatrix();
    auto swap_rows = [&](ZpnMatrix& x, int i, int j) {
        for (int c = 0; c < x.cols(); ++c) std::swap(x(i, c), x(j, c));
    };
    auto swap_cols = [&](ZpnMatrix& x, int i, int j) {
        for (int r = 0; r < x.rows(); ++r) std::swap(x(r, i), x(r, j));
    };
    SmithForm out;
    int K = std::min(R, C);
    for (int k = 0; k < K; ++k) {
        int bi = -1, bj = -1, bv = pr.N;
        for (int i = k; i < R && bv > 0; ++i)
            for (int j = k; j < C; ++j) {
                int v = pr.val(a(i, j));
                if (v < bv) {
                    bv = v;
                    bi = i;
                    bj = j;
                    if (v == 0) break;
                }
            }
        if (bi < 0) {
            for (int r = k; r < K; ++r) out.exps.push_back(pr.N);
            break;
        }
        if (bi != k) {
            swap_rows(a, bi, k);
            if (with_transforms) swap_rows(U, bi, k);
        }
        if (bj != k) {
            swap_cols(a, bj, k);
            if (with_transforms) swap_cols(V, bj, k);
        }
        u64 pe = ipow(pr.p, bv);
        u64 uinv = pr.inv(a(k, k) / pe);
        for (int c = 0; c < C; ++c) a(k, c) = pr.mul(a(k, c), uinv);
        if (with_transforms)
            for (int c = 0; c < R; ++c) U(k, c) = pr.mul(U(k, c), uinv);
        for (int i = k + 1; i < R; ++i) {
            u64 q = a(i, k) / pe;
            if (!q) continue;
            for (int c = k; c < C; ++c)
                if (a(k, c)) a(i, c) = pr.sub(a(i, c), pr.mul(q, a(k, c)));
            if (with_transforms)
                for (int c = 0; c < R; ++c)
                    if (U(k, c)) U(i, c) = pr.sub(U(i, c), pr.mul(q, U(k, c)));
        }
        for (int j = k + 1; j < C; ++j) {
            u64 q = a(k, j) / pe;
            if (!q) continue;
            a(k, j) = 0;
            if (with_transforms)
                for (int r = 0; r < C; ++r)
                    if (V(r, k)) V(r, j) = pr.sub(V(r, j), pr.mul(q, V(r, k)));
        }
        out.exps.push_back(bv);
    }
    if (with_transforms) {
        out.U = std::move(U);
        out.V = std::move(V);
    }
    return out;
}

struct ModuleStructure {
    std::vector<int> torsion;  // exponents e with 0 < e < N, sorted
    int free = 0;              // number of Z/p^N summands

    int fp_dimension() const { return free + static_cast<int>(torsion.size()); }
    bool operator==(const ModuleStructure& o) const { return torsion == o.torsion && free == o.free; }
};

inline ModuleStructure cokernel_divisors(const ZpnMatrix& m) {
    auto s = smith(m, false);
    ModuleStructure out;
    for (int e : s.exps) {
        if (e >= m.prec().N)
            ++out.free;
        else if (e > 0)
            out.torsion.push_back(e);
    }
    out.free += m.rows() - static_cast<int>(s.exps.size());
    std::sort(out.torsion.begin(), out.torsion.end());
    return out;
}

// Abstract group structure of ker(m): a diagonal entry p^e contributes Z/p^e.
inline ModuleStructure kernel_structure(const ZpnMatrix& m) {
    auto s = smith(m, false);
    ModuleStructure out;
    for (int e : s.exps) {
        if (e >= m.prec().N)
            ++out.free;
        else if (e > 0)
            out.torsion.push_back(e);
    }
    out.free += m.cols() - static_cast<int>(s.exps.size());
    std::sort(out.torsion.begin(), out.torsion.end());
    return out;
}

inline Vec preimage(const ZpnMatrix& m, const Vec& v) {
    const Prec& pr = m.prec();
    if (static_cast<int>(v.size()) != m.rows()) throw AmbientMismatch("preimage: vector length differs from rows");
    auto s = smith(m, true);
    Vec w = s.U->apply(v);
    Vec y(m.cols(), 0);
    for (int i = 0; i < m.rows(); ++i) {
        int e = i < static_cast<int>(s.exps.size()) ? s.exps[i] : pr.N;
        if (e >= pr.N) {
            if (w[i] != 0) throw NoSolution("preimage: target outside the column span");
            continue;
        }
        u64 pe = ipow(pr.p, e);
        if (w[i] % pe != 0) throw NoSolution("preimage: target outside the column span");
        y[i] = w[i] / pe;
    }
    return s.V->apply(y);
}

// Rank of a matrix over F_p (N = 1 reading of the entries mod p).
inline int rank_mod_p(const ZpnMatrix& m) {
    Prec p1(m.prec().p, 1);
    ZpnMatrix r(p1, m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j) % p1.mod;
    int k = 0;
    for (int e : smith(r, false).exps)
        if (e == 0) ++k;
    return k;
}

}  // namespace pcris
