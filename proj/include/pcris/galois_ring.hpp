#pragma once

// Galois rings GR(p^N, f) = (Z/p^N)[t]/(P), where P is the lexicographically
// smallest monic irreducible of degree f over F_p with its coefficients read
// as integers.  Elements are coefficient vectors in the basis 1, t, ..., t^{f-1}.

#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "arith.hpp"
#include "error.hpp"

namespace pcris {

using Coeffs = std::vector<u64>;

namespace fp {

// Dense polynomials over F_p, low degree first, no trailing zeros.
using Poly = std::vector<u64>;

inline void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

inline Poly mul(const Poly& a, const Poly& b, u64 p) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i])
            for (size_t j = 0; j < b.size(); ++j) r[i + j] = (r[i + j] + a[i] * b[j]) % p;
    trim(r);
    return r;
}

inline u64 inv(u64 a, u64 p) { return Prec(p, 1).inv(a); }

inline Poly mod(Poly a, const Poly& m, u64 p) {
    trim(a);
    u64 li = inv(m.back(), p);
    while (a.size() >= m.size()) {
        u64 c = a.back() * li % p;
        size_t sh = a.size() - m.size();
        for (size_t i = 0; i < m.size(); ++i) a[sh + i] = (a[sh + i] + p - c * m[i] % p) % p;
        trim(a);
    }
    return a;
}

inline Poly sub(Poly a, const Poly& b, u64 p) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (size_t i = 0; i < b.size(); ++i) a[i] = (a[i] + p - b[i]) % p;
    trim(a);
    return a;
}

inline Poly gcd(Poly a, Poly b, u64 p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = mod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        u64 li = inv(a.back(), p);
        for (auto& c : a) c = c * li % p;
    }
    return a;
}

inline Poly powmod(Poly b, u64 e, const Poly& m, u64 p) {
    Poly r{1};
    b = mod(b, m, p);
    while (e) {
        if (e & 1) r = mod(mul(r, b, p), m, p);
        b = mod(mul(b, b, p), m, p);
        e >>= 1;
    }
    return r;
}

// Ben-Or: reject as soon as a factor of degree k <= f/2 shows up.
inline bool irreducible(const Poly& P, u64 p) {
    int f = static_cast<int>(P.size()) - 1;
    if (f <= 0) return false;
    if (f == 1) return true;
    if (P[0] == 0) return false;
    Poly h = mod({0, 1}, P, p);
    for (int k = 1; 2 * k <= f; ++k) {
        h = powmod(h, p, P, p);
        Poly g = gcd(P, sub(h, {0, 1}, p), p);
        if (g.size() != 1) return false;
    }
    return true;
}

}  // namespace fp

struct FieldDesc {
    u64 p = 2;
    int f = 1;
    std::vector<u64> minpoly;  // monic, low degree first, size f+1

    bool operator==(const FieldDesc& o) const { return p == o.p && f == o.f && minpoly == o.minpoly; }
    bool operator!=(const FieldDesc& o) const { return !(*this == o); }

    std::string minpoly_string() const {
        std::ostringstream os;
        bool first = true;
        for (int i = f; i >= 0; --i) {
            u64 c = minpoly[i];
            if (!c) continue;
            if (!first) os << " + ";
            first = false;
            if (i == 0 || c != 1) os << c;
            if (i > 0) os << "t";
            if (i > 1) os << "^" << i;
        }
        if (first) os << "0";
        if (f == 1 && minpoly[0] == 0) os << " + 0";
        return os.str();
    }
};

inline FieldDesc make_field(u64 p, int f) {
    if (!is_prime(p)) throw CompositeModulus("make_field: " + std::to_string(p) + " is not prime");
    if (f < 1) throw BadParameters("make_field: degree must be >= 1");
    static std::mutex mu;
    static std::map<std::pair<u64, int>, FieldDesc> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({p, f});
    if (it != cache.end()) return it->second;

    // Enumerate (c_{f-1}, ..., c_0) in lexicographic order.
    std::vector<u64> digits(f, 0);  // digits[0] = c_{f-1}
    for (;;) {
        fp::Poly P(f + 1);
        for (int i = 0; i < f; ++i) P[i] = digits[f - 1 - i];
        P[f] = 1;
        if (fp::irreducible(P, p)) {
            FieldDesc fd{p, f, P};
            cache.emplace(std::make_pair(p, f), fd);
            return fd;
        }
        int k = f - 1;
        while (k >= 0 && ++digits[k] == p) digits[k--] = 0;
        if (k < 0) throw Error("make_field: no irreducible polynomial found");
    }
}

class GaloisRing {
  public:
    static std::shared_ptr<const GaloisRing> get(const FieldDesc& fd, int N) {
        static std::mutex mu;
        static std::map<std::tuple<u64, int, int>, std::shared_ptr<const GaloisRing>> cache;
        {
            std::lock_guard<std::mutex> lock(mu);
            auto it = cache.find({fd.p, fd.f, N});
            if (it != cache.end()) return it->second;
        }
        auto R = std::shared_ptr<GaloisRing>(new GaloisRing(fd, N));
        R->init_sigma();
        std::lock_guard<std::mutex> lock(mu);
        cache.emplace(std::make_tuple(fd.p, fd.f, N), R);
        return R;
    }
    static std::shared_ptr<const GaloisRing> get(u64 p, int f, int N) { return get(make_field(p, f), N); }

    const FieldDesc& field() const { return fd_; }
    const Prec& prec() const { return pr_; }
    u64 p() const { return pr_.p; }
    int N() const { return pr_.N; }
    int degree() const { return fd_.f; }
    std::shared_ptr<const GaloisRing> at_precision(int N) const { return get(fd_, N); }

    Coeffs zero() const { return Coeffs(fd_.f, 0); }
    Coeffs one() const { return scalar(1); }
    Coeffs scalar(u64 c) const {
        Coeffs r(fd_.f, 0);
        r[0] = pr_.red(c);
        return r;
    }
    Coeffs from_signed(i64 c) const { return scalar(pr_.from_signed(c)); }
    Coeffs gen() const {
        Coeffs r = zero();
        if (fd_.f > 1)
            r[1] = 1;
        else
            r[0] = pr_.from_signed(-static_cast<i64>(fd_.minpoly[0]));
        return r;
    }

    bool is_zero(const Coeffs& a) const {
        for (u64 x : a)
            if (x) return false;
        return true;
    }
    int val(const Coeffs& a) const {
        int v = pr_.N;
        for (u64 x : a) v = std::min(v, pr_.val(x));
        return v;
    }
    bool is_unit(const Coeffs& a) const { return val(a) == 0; }

    Coeffs add(const Coeffs& a, const Coeffs& b) const {
        Coeffs r(fd_.f);
        for (int i = 0; i < fd_.f; ++i) r[i] = pr_.add(a[i], b[i]);
        return r;
    }
    void add_to(Coeffs& a, const Coeffs& b) const {
        for (int i = 0; i < fd_.f; ++i) a[i] = pr_.add(a[i], b[i]);
    }
    Coeffs sub(const Coeffs& a, const Coeffs& b) const {
        Coeffs r(fd_.f);
        for (int i = 0; i < fd_.f; ++i) r[i] = pr_.sub(a[i], b[i]);
        return r;
    }
    Coeffs neg(const Coeffs& a) const {
        Coeffs r(fd_.f);
        for (int i = 0; i < fd_.f; ++i) r[i] = pr_.neg(a[i]);
        return r;
    }
    Coeffs scale(const Coeffs& a, u64 c) const {
        Coeffs r(fd_.f);
        for (int i = 0; i < fd_.f; ++i) r[i] = pr_.mul(a[i], c);
        return r;
    }
    Coeffs mul(const Coeffs& a, const Coeffs& b) const {
        int f = fd_.f;
        if (f == 1) return Coeffs{pr_.mul(a[0], b[0])};
        std::vector<u128> t(2 * f - 1, 0);
        for (int i = 0; i < f; ++i) {
            if (!a[i]) continue;
            for (int j = 0; j < f; ++j)
                if (b[j]) t[i + j] = (t[i + j] + u128(a[i]) * b[j]) % pr_.mod;
        }
        for (int k = 2 * f - 2; k >= f; --k) {
            u64 c = static_cast<u64>(t[k]);
            if (!c) continue;
            for (int i = 0; i < f; ++i)
                if (lifted_[i]) t[k - f + i] = (t[k - f + i] + u128(pr_.neg(pr_.mul(c, lifted_[i])))) % pr_.mod;
        }
        Coeffs r(f);
        for (int i = 0; i < f; ++i) r[i] = static_cast<u64>(t[i]);
        return r;
    }
    Coeffs pow(Coeffs a, u64 e) const {
        Coeffs r = one();
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }
    // a^(p^k)
    Coeffs pow_p(Coeffs a, int k) const {
        for (int i = 0; i < k; ++i) a = pow(a, pr_.p);
        return a;
    }

    Coeffs sigma(const Coeffs& a) const { return apply_matrix(sigma_, a); }
    Coeffs sigma_inv(const Coeffs& a) const { return apply_matrix(sigma_inv_, a); }
    Coeffs sigma_pow(Coeffs a, i64 k) const {
        int f = fd_.f;
        k %= f;
        if (k < 0) k += f;
        for (i64 i = 0; i < k; ++i) a = sigma(a);
        return a;
    }
    Coeffs trace(const Coeffs& a) const {
        Coeffs s = zero(), x = a;
        for (int i = 0; i < fd_.f; ++i) {
            add_to(s, x);
            x = sigma(x);
        }
        return s;
    }

    Coeffs inv(const Coeffs& a) const {
        if (!is_unit(a)) throw NoSolution("GaloisRing::inv: element is not a unit");
        u64 p = pr_.p;
        fp::Poly A(a.begin(), a.end());
        for (auto& c : A) c %= p;
        fp::trim(A);
        fp::Poly P(fd_.minpoly.begin(), fd_.minpoly.end());
        // extended Euclid over F_p
        fp::Poly r0 = P, r1 = A, s0{}, s1{1};
        while (!r1.empty()) {
            fp::Poly q;
            fp::Poly r = r0;
            u64 li = fp::inv(r1.back(), p);
            q.assign(r.size() >= r1.size() ? r.size() - r1.size() + 1 : 1, 0);
            while (r.size() >= r1.size() && !r.empty()) {
                u64 c = r.back() * li % p;
                size_t sh = r.size() - r1.size();
                q[sh] = c;
                for (size_t i = 0; i < r1.size(); ++i) r[sh + i] = (r[sh + i] + p - c * r1[i] % p) % p;
                fp::trim(r);
            }
            fp::trim(q);
            fp::Poly s = fp::sub(s0, fp::mul(q, s1, p), p);
            r0 = std::move(r1);
            r1 = std::move(r);
            s0 = std::move(s1);
            s1 = std::move(s);
        }
        u64 ci = fp::inv(r0[0], p);
        Coeffs x = zero();
        for (size_t i = 0; i < s0.size(); ++i) x[i] = s0[i] * ci % p;
        // Newton: x <- x(2 - a x)
        for (int k = 1; k < pr_.N; k *= 2) x = mul(x, sub(scalar(2), mul(a, x)));
        return x;
    }

    // Exact division of every coordinate by p^k (representatives divisible).
    Coeffs div_p(const Coeffs& a, int k) const {
        u64 pk = ipow(pr_.p, k);
        Coeffs r(fd_.f);
        for (int i = 0; i < fd_.f; ++i) {
            if (a[i] % pk) throw PrecisionExhausted("exact division by p^k failed");
            r[i] = a[i] / pk;
        }
        return r;
    }
    Coeffs mul_p(const Coeffs& a, int k) const { return scale(a, pr_.ppow(k)); }
    Coeffs reduce(const Coeffs& a) const {
        Coeffs r(a.size());
        for (size_t i = 0; i < a.size(); ++i) r[i] = pr_.red(a[i]);
        return r;
    }

    // Evaluate the lifted minimal polynomial (or its derivative) at x.
    Coeffs eval_minpoly(const Coeffs& x, bool derivative) const {
        Coeffs acc = zero();
        for (int i = fd_.f; i >= (derivative ? 1 : 0); --i) {
            u64 c = derivative ? pr_.mul(fd_.minpoly[i], i) : fd_.minpoly[i];
            acc = add(mul(acc, x), scalar(c));
        }
        return acc;
    }
    // Newton-lift a simple root of the lifted polynomial `poly` (coefficients
    // in this ring, low first) from a mod-p approximation.
    Coeffs hensel_root(const std::vector<Coeffs>& poly, Coeffs r) const {
        auto ev = [&](const Coeffs& x, bool d) {
            Coeffs acc = zero();
            int deg = static_cast<int>(poly.size()) - 1;
            for (int i = deg; i >= (d ? 1 : 0); --i) acc = add(mul(acc, x), d ? scale(poly[i], i) : poly[i]);
            return acc;
        };
        for (int it = 0; it < 2 * pr_.N + 2; ++it) {
            Coeffs v = ev(r, false);
            if (is_zero(v)) return r;
            r = sub(r, mul(v, inv(ev(r, true))));
        }
        if (!is_zero(ev(r, false))) throw PrecisionExhausted("hensel_root did not converge");
        return r;
    }

    std::string to_string(const Coeffs& a) const {
        std::ostringstream os;
        if (fd_.f == 1) {
            os << a[0];
            return os.str();
        }
        os << "[";
        for (int i = 0; i < fd_.f; ++i) os << (i ? "," : "") << a[i];
        os << "]";
        return os.str();
    }

  private:
    GaloisRing(const FieldDesc& fd, int N) : fd_(fd), pr_(fd.p, N) {
        lifted_.assign(fd.minpoly.begin(), fd.minpoly.end() - 1);
        for (auto& c : lifted_) c = pr_.red(c);
    }

    void init_sigma() {
        int f = fd_.f;
        sigma_.assign(f, Coeffs(f, 0));
        sigma_inv_ = sigma_;
        if (f == 1) {
            sigma_[0][0] = sigma_inv_[0][0] = 1 % pr_.mod;
            return;
        }
        // root of P congruent to t^p mod p
        Coeffs r0 = zero();
        {
            fp::Poly P(fd_.minpoly.begin(), fd_.minpoly.end());
            fp::Poly tp = fp::powmod({0, 1}, pr_.p, P, pr_.p);
            for (size_t i = 0; i < tp.size(); ++i) r0[i] = tp[i];
        }
        std::vector<Coeffs> poly;
        for (u64 c : fd_.minpoly) poly.push_back(scalar(c));
        Coeffs s = hensel_root(poly, r0);
        // columns: sigma(t^k) = s^k; stored as rows-of-columns
        Coeffs x = one();
        for (int k = 0; k < f; ++k) {
            sigma_[k] = x;
            x = mul(x, s);
        }
        // sigma^{-1} = sigma^{f-1}
        for (int k = 0; k < f; ++k) {
            Coeffs e = zero();
            e[k] = 1;
            for (int i = 0; i < f - 1; ++i) e = apply_matrix(sigma_, e);
            sigma_inv_[k] = e;
        }
    }

    Coeffs apply_matrix(const std::vector<Coeffs>& cols, const Coeffs& a) const {
        int f = fd_.f;
        if (f == 1) return a;
        std::vector<u128> acc(f, 0);
        for (int k = 0; k < f; ++k) {
            if (!a[k]) continue;
            for (int i = 0; i < f; ++i)
                if (cols[k][i]) acc[i] = (acc[i] + u128(a[k]) * cols[k][i]) % pr_.mod;
        }
        Coeffs r(f);
        for (int i = 0; i < f; ++i) r[i] = static_cast<u64>(acc[i]);
        return r;
    }

    FieldDesc fd_;
    Prec pr_;
    Coeffs lifted_;  // minpoly coefficients below the leading 1, mod p^N
    std::vector<Coeffs> sigma_, sigma_inv_;
};

using RingPtr = std::shared_ptr<const GaloisRing>;

class GaloisRingElem {
  public:
    GaloisRingElem() = default;
    GaloisRingElem(RingPtr R, Coeffs c) : R_(std::move(R)), c_(R_->reduce(c)) {}
    static GaloisRingElem scalar(RingPtr R, u64 c) {
        auto v = R->scalar(c);
        return GaloisRingElem(std::move(R), std::move(v));
    }

    const RingPtr& ring() const { return R_; }
    const FieldDesc& field() const { return R_->field(); }
    const Prec& prec() const { return R_->prec(); }
    const Coeffs& coeffs() const { return c_; }

    GaloisRingElem operator+(const GaloisRingElem& o) const { return {R_, R_->add(c_, check(o).c_)}; }
    GaloisRingElem operator-(const GaloisRingElem& o) const { return {R_, R_->sub(c_, check(o).c_)}; }
    GaloisRingElem operator-() const { return {R_, R_->neg(c_)}; }
    GaloisRingElem operator*(const GaloisRingElem& o) const { return {R_, R_->mul(c_, check(o).c_)}; }
    GaloisRingElem pow(u64 e) const { return {R_, R_->pow(c_, e)}; }
    GaloisRingElem inv() const { return {R_, R_->inv(c_)}; }
    bool is_zero() const { return R_->is_zero(c_); }
    int valuation() const { return R_->val(c_); }
    bool operator==(const GaloisRingElem& o) const { return R_ == o.R_ && c_ == o.c_; }
    bool operator!=(const GaloisRingElem& o) const { return !(*this == o); }
    std::string to_string() const { return R_->to_string(c_); }

  private:
    const GaloisRingElem& check(const GaloisRingElem& o) const {
        if (R_ != o.R_) throw BaseMismatch("Galois ring elements over different rings");
        return o;
    }
    RingPtr R_;
    Coeffs c_;
};

inline GaloisRingElem frobenius_sigma(const GaloisRingElem& x) { return {x.ring(), x.ring()->sigma(x.coeffs())}; }

// Teichmuller representative: lift a^{1/p^N} arbitrarily and raise it to p^N.
inline Coeffs teichmuller_coeffs(const GaloisRing& R, const Coeffs& residue) {
    auto F = R.at_precision(1);
    Coeffs a = F->reduce(residue);
    Coeffs root = F->sigma_pow(a, -static_cast<i64>(R.N()));
    return R.pow_p(R.reduce(root), R.N());
}

inline GaloisRingElem teichmuller(const FieldDesc& fd, int N, const Coeffs& a) {
    auto R = GaloisRing::get(fd, N);
    Coeffs res(fd.f, 0);
    for (size_t i = 0; i < a.size() && i < res.size(); ++i) res[i] = a[i] % fd.p;
    return {R, teichmuller_coeffs(*R, res)};
}

}  // namespace pcris
