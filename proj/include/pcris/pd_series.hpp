#pragma once

// Elements of Acris(C)/p^N for C = B[x_1^{1/p^inf},...]/(x_1,...), stored as
// finite sums  sum_a b_a * x^a / (a!)_p  over a Galois ring.  Variables are
// either divided-power variables (the x_i or the Cech t_i) or "plain"
// variables of a perfect monoid base (the Cech x_0) which carry no divided
// powers.  Plain variables come first in every exponent vector.

#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "exponent.hpp"
#include "galois_ring.hpp"

namespace pcris {

struct VarLayout {
    int plain = 0;
    int pd = 1;
    int n() const { return plain + pd; }
    bool operator==(const VarLayout& o) const { return plain == o.plain && pd == o.pd; }
    bool operator!=(const VarLayout& o) const { return !(*this == o); }
};

class PDSeries {
  public:
    using Terms = std::map<ExpVec, Coeffs>;

    PDSeries() = default;
    PDSeries(RingPtr R, VarLayout L) : R_(std::move(R)), L_(L) {}

    static PDSeries constant(RingPtr R, VarLayout L, const Coeffs& c) {
        PDSeries s(R, L);
        s.add_term(ExpVec::zero(L.n()), c);
        return s;
    }
    static PDSeries one(RingPtr R, VarLayout L) { return constant(R, L, R->one()); }
    // c * x^a / (a!)_p
    static PDSeries basis(RingPtr R, VarLayout L, const ExpVec& a, const Coeffs& c) {
        PDSeries s(R, L);
        s.add_term(a, c);
        return s;
    }
    // c * x^a, i.e. (a!)_p * c on the basis element
    static PDSeries monomial(RingPtr R, VarLayout L, const ExpVec& a, const Coeffs& c) {
        PDSeries s(R, L);
        s.add_term(a, R->mul_p(c, s.gamma_total(a)));
        return s;
    }

    const RingPtr& ring() const { return R_; }
    const VarLayout& layout() const { return L_; }
    u64 p() const { return R_->p(); }
    int N() const { return R_->N(); }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    size_t size() const { return terms_.size(); }

    Coeffs coeff(const ExpVec& a) const {
        auto it = terms_.find(a);
        return it == terms_.end() ? R_->zero() : it->second;
    }

    void add_term(const ExpVec& a, const Coeffs& c) {
        if (R_->is_zero(c)) return;
        auto it = terms_.find(a);
        if (it == terms_.end()) {
            terms_.emplace(a, R_->reduce(c));
            return;
        }
        R_->add_to(it->second, c);
        if (R_->is_zero(it->second)) terms_.erase(it);
    }

    // sum over divided-power coordinates of gamma_val
    int gamma_total(const ExpVec& a) const {
        int g = 0;
        for (int i = L_.plain; i < L_.n(); ++i) g += gamma_val(a[i], p());
        return g;
    }
    // sum of floors over divided-power coordinates
    u64 pd_floor(const ExpVec& a) const {
        u64 s = 0;
        for (int i = L_.plain; i < L_.n(); ++i) s += a[i].floor();
        return s;
    }

    PDSeries operator+(const PDSeries& o) const {
        check(o);
        PDSeries r = *this;
        for (auto& [a, c] : o.terms_) r.add_term(a, c);
        return r;
    }
    PDSeries operator-() const {
        PDSeries r(R_, L_);
        for (auto& [a, c] : terms_) r.terms_.emplace(a, R_->neg(c));
        return r;
    }
    PDSeries operator-(const PDSeries& o) const { return *this + (-o); }
    PDSeries& operator+=(const PDSeries& o) { return *this = *this + o; }
    PDSeries& operator-=(const PDSeries& o) { return *this = *this - o; }

    PDSeries scaled(const Coeffs& c) const {
        PDSeries r(R_, L_);
        for (auto& [a, b] : terms_) r.add_term(a, R_->mul(b, c));
        return r;
    }
    PDSeries scaled(u64 c) const { return scaled(R_->scalar(c)); }

    PDSeries operator*(const PDSeries& o) const {
        check(o);
        PDSeries r(R_, L_);
        u64 pp = p();
        int N = R_->N();
        // gamma of each factor's exponents, cached per term
        std::vector<int> ga, gb;
        for (auto& t : terms_) ga.push_back(gamma_total(t.first));
        for (auto& t : o.terms_) gb.push_back(gamma_total(t.first));
        size_t i = 0;
        for (auto& [a, ca] : terms_) {
            size_t j = 0;
            for (auto& [b, cb] : o.terms_) {
                ExpVec s = a.plus(b, pp);
                int carry = gamma_total(s) - ga[i] - gb[j];
                ++j;
                if (carry >= N) continue;
                Coeffs c = R_->mul(ca, cb);
                if (carry) c = R_->mul_p(c, carry);
                r.add_term(s, c);
            }
            ++i;
        }
        return r;
    }
    PDSeries& operator*=(const PDSeries& o) { return *this = *this * o; }

    PDSeries pow(u64 e) const {
        PDSeries r = one(R_, L_), b = *this;
        while (e) {
            if (e & 1) r = r * b;
            e >>= 1;
            if (e) b = b * b;
        }
        return r;
    }

    // F(b x^a/(a!)_p) = sigma(b) * ((pa)!)_p/(a!)_p * x^{pa}/((pa)!)_p
    PDSeries frobenius() const {
        PDSeries r(R_, L_);
        u64 pp = p();
        for (auto& [a, b] : terms_) {
            ExpVec pa = a.times_p(pp);
            int k = gamma_total(pa) - gamma_total(a);
            if (k >= R_->N()) continue;
            r.add_term(pa, R_->mul_p(R_->sigma(b), k));
        }
        return r;
    }

    // Coefficient criterion: p | b_a whenever every divided-power a_i < 1.
    bool nygaard_coefficient_test() const {
        for (auto& [a, b] : terms_)
            if (pd_floor(a) == 0 && R_->val(b) == 0) return false;
        return true;
    }
    // Frobenius criterion: p | F(a).
    bool nygaard_frobenius_test() const {
        for (auto& [a, b] : frobenius().terms_)
            if (R_->val(b) == 0) return false;
        return true;
    }

    // Coefficients reduced to precision N' <= N.
    PDSeries reduced(int N2) const {
        auto R2 = R_->at_precision(N2);
        PDSeries r(R2, L_);
        for (auto& [a, b] : terms_) r.add_term(a, R2->reduce(b));
        return r;
    }
    // Coefficients read as integer representatives at precision N' >= N.
    PDSeries lifted(int N2) const {
        auto R2 = R_->at_precision(N2);
        PDSeries r(R2, L_);
        for (auto& [a, b] : terms_) r.add_term(a, b);
        return r;
    }
    // Exact division of every coefficient by p^k, landing at precision N - k.
    PDSeries divided_by_p(int k) const {
        auto R2 = R_->at_precision(R_->N() - k);
        PDSeries r(R2, L_);
        for (auto& [a, b] : terms_) r.add_term(a, R2->reduce(R_->div_p(b, k)));
        return r;
    }

    int depth() const {
        int d = 0;
        for (auto& t : terms_) d = std::max(d, t.first.depth());
        return d;
    }

    bool operator==(const PDSeries& o) const { return R_ == o.R_ && L_ == o.L_ && terms_ == o.terms_; }
    bool operator!=(const PDSeries& o) const { return !(*this == o); }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto& [a, b] : terms_) {
            os << (first ? "" : " + ") << R_->to_string(b) << "*e" << a.to_string();
            first = false;
        }
        return os.str();
    }

    void check(const PDSeries& o) const {
        if (R_ != o.R_) throw BaseMismatch("PD series over different coefficient rings");
        if (L_ != o.L_) throw BaseMismatch("PD series with different variable layouts");
    }

  private:
    RingPtr R_;
    VarLayout L_;
    Terms terms_;
};

inline std::ostream& operator<<(std::ostream& os, const PDSeries& s) { return os << s.to_string(); }

// y^[q] for y in the divided-power ideal (p, and monomials with some
// divided-power exponent >= 1).
inline PDSeries divided_power(const PDSeries& y, int q) {
    const auto& R = *y.ring();
    const VarLayout& L = y.layout();
    u64 p = y.p();
    int N = y.N();
    if (q == 0) return PDSeries::one(y.ring(), L);
    if (q == 1) return y;

    // term^[i] for i = 0..q
    auto term_powers = [&](const ExpVec& a, const Coeffs& c) {
        std::vector<PDSeries> out;
        out.push_back(PDSeries::one(y.ring(), L));
        int v = R.val(c);
        bool in_ideal = v >= 1 || y.pd_floor(a) >= 1;
        if (!in_ideal) throw NotNygaard("divided power of an element outside the divided-power ideal");
        Coeffs cu = v > 0 ? R.reduce(R.div_p(c, v)) : c;
        int ga = y.gamma_total(a);
        Coeffs cpow = R.one();
        ExpVec ia = ExpVec::zero(L.n());
        for (int i = 1; i <= q; ++i) {
            cpow = R.mul(cpow, cu);
            ia = ia.plus(a, p);
            int E = y.gamma_total(ia) - i * ga;
            u64 fact = 1;
            int vf = vp_factorial(i, p);
            for (int k = 2; k <= i; ++k) {
                u64 kk = k;
                while (kk % p == 0) kk /= p;
                fact = R.prec().mul(fact, kk);
            }
            long total = static_cast<long>(i) * v + E - vf;
            PDSeries t(y.ring(), L);
            if (total < 0) throw PrecisionExhausted("negative valuation in divided power");
            if (total < N) t.add_term(ia, R.mul_p(R.scale(cpow, R.prec().inv(fact)), static_cast<int>(total)));
            out.push_back(std::move(t));
        }
        return out;
    };

    std::vector<PDSeries> acc;  // acc[i] = (partial sum)^[i]
    bool first = true;
    for (auto& [a, c] : y.terms()) {
        auto tp = term_powers(a, c);
        if (first) {
            acc = std::move(tp);
            first = false;
            continue;
        }
        std::vector<PDSeries> next(q + 1, PDSeries(y.ring(), L));
        for (int i = 0; i <= q; ++i)
            for (int l = 0; l <= i; ++l) {
                if (acc[l].is_zero() || tp[i - l].is_zero()) continue;
                next[i] += acc[l] * tp[i - l];
            }
        acc = std::move(next);
    }
    if (first) return PDSeries(y.ring(), L);
    return acc[q];
}

// Truncated elements of the perfect ring C-flat = B[x^{1/p^inf}] (residue
// coefficients), before reduction modulo the x_i.
class SharpSeries {
  public:
    using Terms = std::map<ExpVec, Coeffs>;

    SharpSeries() = default;
    SharpSeries(RingPtr residue, VarLayout L) : F_(residue->at_precision(1)), L_(L) {}

    static SharpSeries monomial(RingPtr residue, VarLayout L, const ExpVec& a, const Coeffs& c) {
        SharpSeries s(residue, L);
        s.add_term(a, c);
        return s;
    }
    static SharpSeries one(RingPtr residue, VarLayout L) {
        return monomial(residue, L, ExpVec::zero(L.n()), residue->at_precision(1)->one());
    }

    const RingPtr& residue() const { return F_; }
    const VarLayout& layout() const { return L_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const ExpVec& a, const Coeffs& c) {
        Coeffs r = F_->reduce(c);
        if (F_->is_zero(r)) return;
        auto it = terms_.find(a);
        if (it == terms_.end()) {
            terms_.emplace(a, r);
            return;
        }
        F_->add_to(it->second, r);
        if (F_->is_zero(it->second)) terms_.erase(it);
    }

    SharpSeries operator+(const SharpSeries& o) const {
        SharpSeries r = *this;
        for (auto& [a, c] : o.terms_) r.add_term(a, c);
        return r;
    }
    SharpSeries operator-(const SharpSeries& o) const {
        SharpSeries r = *this;
        for (auto& [a, c] : o.terms_) r.add_term(a, F_->neg(c));
        return r;
    }
    SharpSeries operator*(const SharpSeries& o) const {
        SharpSeries r(F_, L_);
        u64 p = F_->p();
        for (auto& [a, ca] : terms_)
            for (auto& [b, cb] : o.terms_) r.add_term(a.plus(b, p), F_->mul(ca, cb));
        return r;
    }
    SharpSeries pow(u64 e) const {
        SharpSeries r = one(F_, L_), b = *this;
        while (e) {
            if (e & 1) r = r * b;
            e >>= 1;
            if (e) b = b * b;
        }
        return r;
    }
    // p-th power is additive in characteristic p
    SharpSeries frobenius() const {
        SharpSeries r(F_, L_);
        for (auto& [a, c] : terms_) r.add_term(a.times_p(F_->p()), F_->sigma(c));
        return r;
    }
    bool operator==(const SharpSeries& o) const { return F_ == o.F_ && L_ == o.L_ && terms_ == o.terms_; }

  private:
    RingPtr F_;
    VarLayout L_;
    Terms terms_;
};

inline SharpSeries sharp_root(const SharpSeries& s) {
    SharpSeries r(s.residue(), s.layout());
    u64 p = s.residue()->p();
    for (auto& [a, c] : s.terms()) r.add_term(a.div_p(p), s.residue()->sigma_inv(c));
    return r;
}

// Naive lift: residue coefficients read as integers, monomials x^a = (a!)_p e_a.
inline PDSeries naive_lift(const SharpSeries& s, int N) {
    auto R = s.residue()->at_precision(N);
    PDSeries r(R, s.layout());
    for (auto& [a, c] : s.terms()) r += PDSeries::monomial(R, s.layout(), a, c);
    return r;
}

// [s]: lift s^{1/p^N} naively and raise it to the p^N-th power.
inline PDSeries teichmuller_lift(const SharpSeries& s, int N) {
    SharpSeries r = s;
    for (int i = 0; i < N; ++i) r = sharp_root(r);
    PDSeries y = naive_lift(r, N);
    u64 p = s.residue()->p();
    for (int i = 0; i < N; ++i) y = y.pow(p);
    return y;
}

}  // namespace pcris
