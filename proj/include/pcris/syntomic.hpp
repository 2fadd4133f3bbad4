#pragma once

// The sequence 0 -> (1+J)^x -> Nyg Acris -> Acris -> 0 modulo p, and the
// etale variant 0 -> Z_p -> Acris -> Acris -> 0.
//
// Nyg/p*Nyg has the basis {p x^a : floor(a) = 0} u {x^a/(a!)_p : floor(a) >= 1},
// where floor(a) is the sum of the coordinate floors; Acris/p has the basis
// {x^a/(a!)_p}.  A ModpBasisForm stores F_q coefficients on one of the two.

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "acris.hpp"
#include "tower.hpp"

namespace pcris {

inline u64 floor_sum(const ExpVec& a) {
    u64 s = 0;
    for (int i = 0; i < a.n; ++i) s += a[i].floor();
    return s;
}

struct ModpBasisForm {
    enum class Space { Nygaard, Acris };

    RingPtr F;  // residue field, N = 1
    int nvars = 1;
    Space space = Space::Acris;
    std::map<ExpVec, Coeffs> terms;

    ModpBasisForm() = default;
    ModpBasisForm(RingPtr R, int n, Space s) : F(R->at_precision(1)), nvars(n), space(s) {}

    void add_term(const ExpVec& a, const Coeffs& c) {
        Coeffs r = F->reduce(c);
        if (F->is_zero(r)) return;
        auto it = terms.find(a);
        if (it == terms.end()) {
            terms.emplace(a, r);
            return;
        }
        F->add_to(it->second, r);
        if (F->is_zero(it->second)) terms.erase(it);
    }
    bool is_zero() const { return terms.empty(); }
    ModpBasisForm operator+(const ModpBasisForm& o) const {
        ModpBasisForm r = *this;
        for (auto& [a, c] : o.terms) r.add_term(a, c);
        return r;
    }
    ModpBasisForm operator-(const ModpBasisForm& o) const {
        ModpBasisForm r = *this;
        for (auto& [a, c] : o.terms) r.add_term(a, F->neg(c));
        return r;
    }
    ModpBasisForm scaled(u64 k) const {
        ModpBasisForm r(F, nvars, space);
        for (auto& [a, c] : terms) r.add_term(a, F->scale(c, k));
        return r;
    }
    int depth() const {
        int d = 0;
        for (auto& t : terms) d = std::max(d, t.first.depth());
        return d;
    }
    bool operator==(const ModpBasisForm& o) const {
        return F == o.F && nvars == o.nvars && space == o.space && terms == o.terms;
    }
    bool operator!=(const ModpBasisForm& o) const { return !(*this == o); }

    std::string to_string() const {
        if (terms.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto& [a, c] : terms) {
            os << (first ? "" : " + ") << F->to_string(c) << "*";
            os << (space == Space::Nygaard && floor_sum(a) == 0 ? "p*x^" : "e") << a.to_string();
            first = false;
        }
        return os.str();
    }
};

inline std::ostream& operator<<(std::ostream& os, const ModpBasisForm& m) { return os << m.to_string(); }

// Coordinates in Nyg/p*Nyg.  A p-type coefficient b = p*c needs b mod p^2, so
// the input must carry at least two digits of precision.
inline ModpBasisForm modp_normal_form(const PDSeries& a) {
    if (a.N() < 2) throw PrecisionMismatch("modp_normal_form: Nyg/pNyg coordinates need precision >= 2");
    if (a.layout().plain != 0) throw BaseMismatch("modp_normal_form: plain variables not supported");
    const auto& R = *a.ring();
    ModpBasisForm out(a.ring(), a.layout().n(), ModpBasisForm::Space::Nygaard);
    for (auto& [al, b] : a.terms()) {
        if (floor_sum(al) == 0) {
            if (R.val(b) == 0) throw NotNygaard("modp_normal_form: element is not in the Nygaard ideal");
            out.add_term(al, R.div_p(b, 1));
        } else {
            out.add_term(al, b);
        }
    }
    return out;
}

// Image in Acris/p.
inline ModpBasisForm acris_normal_form(const PDSeries& a) {
    ModpBasisForm out(a.ring(), a.layout().n(), ModpBasisForm::Space::Acris);
    for (auto& [al, b] : a.terms()) out.add_term(al, b);
    return out;
}

// A representative PDSeries at precision N (>= 2 for Nygaard forms).
inline PDSeries to_pdseries(const ModpBasisForm& m, int N) {
    auto R = m.F->at_precision(N);
    PDSeries s(R, {0, m.nvars});
    for (auto& [a, c] : m.terms) {
        Coeffs b = R->reduce(c);
        if (m.space == ModpBasisForm::Space::Nygaard && floor_sum(a) == 0) b = R->mul_p(b, 1);
        s.add_term(a, b);
    }
    return s;
}

// Nygaard form -> Acris form:  F/p - 1 reduced mod p.
inline ModpBasisForm map_M(const ModpBasisForm& a) {
    if (a.space != ModpBasisForm::Space::Nygaard) throw BaseMismatch("map_M: argument must be a Nygaard form");
    u64 p = a.F->p();
    ModpBasisForm out(a.F, a.nvars, ModpBasisForm::Space::Acris);
    for (auto& [al, b] : a.terms) {
        u64 fl = floor_sum(al);
        if (fl <= 1) out.add_term(al.times_p(p), a.F->sigma(b));
        if (fl >= 1) out.add_term(al, a.F->neg(b));
    }
    return out;
}

inline ModpBasisForm solve_M_preimage(const ModpBasisForm& target) {
    if (target.space != ModpBasisForm::Space::Acris) throw BaseMismatch("solve_M_preimage: target must be an Acris form");
    const auto& F = *target.F;
    u64 p = F.p();
    ModpBasisForm res(target.F, target.nvars, ModpBasisForm::Space::Nygaard);
    ModpBasisForm todo = target;
    while (!todo.is_zero()) {
        auto it = todo.terms.begin();
        ExpVec a = it->first;
        Coeffs b = it->second;
        u64 fl = floor_sum(a);
        if (fl == 0) {
            res.add_term(a.div_p(p), F.sigma_inv(b));
        } else {
            res.add_term(a, F.neg(b));
            if (fl == 1) todo.add_term(a.times_p(p), F.sigma(b));
        }
        todo.add_term(a, F.neg(b));
    }
    return res;
}

inline ModpBasisForm logbar(const TateUnit& u) {
    if (u.layout.plain != 0) throw BaseMismatch("logbar: plain variables not supported");
    if (u.factors.empty()) return ModpBasisForm(u.residue, u.layout.n(), ModpBasisForm::Space::Nygaard);
    return modp_normal_form(pd_log_unit(u, 2));
}

// Exponents with every coordinate a multiple of 1/p^depth and below `bound`.
inline std::vector<ExpVec> exponent_grid(u64 p, int nvars, int depth, u64 bound) {
    AcrisWindow w;
    w.p = p;
    w.nvars = nvars;
    w.depth = depth;
    w.bound = bound;
    return w.monomials();
}

namespace detail {

// Coordinates of forms over F_p: monomial index * f + residue coordinate.
struct FormIndex {
    int f = 1;
    std::map<ExpVec, int> index;
    std::vector<ExpVec> order;

    int slot(const ExpVec& a) {
        auto it = index.find(a);
        if (it != index.end()) return it->second;
        int k = static_cast<int>(order.size());
        index.emplace(a, k);
        order.push_back(a);
        return k;
    }
    int find(const ExpVec& a) const {
        auto it = index.find(a);
        return it == index.end() ? -1 : it->second;
    }
    int dim() const { return static_cast<int>(order.size()) * f; }

    Vec vec(const ModpBasisForm& m, int dimension) {
        Vec v(dimension, 0);
        for (auto& [a, c] : m.terms) {
            int k = slot(a);
            if ((k + 1) * f > dimension) throw WindowTooSmall("form support leaves the window");
            for (int t = 0; t < f; ++t) v[k * f + t] = c[t];
        }
        return v;
    }
    ModpBasisForm form(const Vec& v, RingPtr F, int nvars, ModpBasisForm::Space s) const {
        ModpBasisForm m(F, nvars, s);
        for (size_t k = 0; k < order.size(); ++k) {
            Coeffs c(v.begin() + k * f, v.begin() + (k + 1) * f);
            m.add_term(order[k], c);
        }
        return m;
    }
};

struct LogGenerators {
    std::vector<TateUnit::Factor> units;
    std::vector<ModpBasisForm> images;
};

// logbar of 1 + e_k x^b, b with coordinates < p, some >= 1, depth <= gen_depth.
inline LogGenerators log_generators(const RingPtr& F, int nvars, int gen_depth) {
    u64 p = F->p();
    LogGenerators g;
    VarLayout L{0, nvars};
    for (auto& b : exponent_grid(p, nvars, gen_depth, p)) {
        if (floor_sum(b) == 0) continue;
        bool some = false;
        for (int i = 0; i < nvars; ++i) some = some || b[i].floor() >= 1;
        if (!some) continue;
        for (int k = 0; k < F->degree(); ++k) {
            Coeffs e = F->zero();
            e[k] = 1;
            TateUnit u(F, L);
            u.times(e, b);
            g.units.push_back(u.factors.front());
            g.images.push_back(logbar(u));
        }
    }
    return g;
}

inline TateUnit solve_log_with(const ModpBasisForm& a, const LogGenerators& gens) {
    FormIndex idx;
    idx.f = a.F->degree();
    for (auto& im : gens.images)
        for (auto& t : im.terms) idx.slot(t.first);
    for (auto& t : a.terms) idx.slot(t.first);
    int dim = idx.dim();
    Prec p1(a.F->p(), 1);
    ZpnMatrix m(p1, dim, static_cast<int>(gens.images.size()));
    for (size_t j = 0; j < gens.images.size(); ++j) {
        Vec v = idx.vec(gens.images[j], dim);
        for (int i = 0; i < dim; ++i) m(i, static_cast<int>(j)) = v[i];
    }
    Vec c;
    try {
        c = preimage(m, idx.vec(a, dim));
    } catch (const NoSolution&) {
        throw NotInKernel("solve_log_preimage: element is not in the image of logbar");
    }
    TateUnit u(a.F, {0, a.nvars});
    for (size_t j = 0; j < c.size(); ++j)
        if (c[j]) u.factors.push_back({gens.units[j].c, gens.units[j].a, c[j]});
    return u;
}

}  // namespace detail

inline TateUnit solve_log_preimage(const ModpBasisForm& a) {
    if (a.space != ModpBasisForm::Space::Nygaard) throw BaseMismatch("solve_log_preimage: argument must be a Nygaard form");
    if (!map_M(a).is_zero()) throw NotInKernel("solve_log_preimage: M(a) != 0");
    if (a.is_zero()) return TateUnit(a.F, {0, a.nvars});
    auto gens = detail::log_generators(a.F, a.nvars, a.depth());
    TateUnit u = detail::solve_log_with(a, gens);
    if (logbar(u) != a) throw PrecisionExhausted("solve_log_preimage: round trip failed");
    return u;
}

struct ExactnessReport {
    u64 p = 2;
    int f = 1, nvars = 1, depth = 1;
    bool left_injective = false;
    bool middle_exact = false;
    bool right_surjective = false;
    std::optional<std::string> counterexample;
    int window_monomials = 0;
    int kernel_dim = 0;
    int generator_count = 0;
    int generator_rank = 0;
    int log_witnesses = 0;
    int leading_term_checks = 0;
    int right_witnesses = 0;

    bool all() const { return left_injective && middle_exact && right_surjective; }
};

struct SyntomicConfig {
    int samples = 100;
    u64 seed = 1;
};

inline ExactnessReport verify_syntomic_exactness(u64 p, int f, int nvars, int depth, const SyntomicConfig& cfg = {}) {
    ExactnessReport rep;
    rep.p = p;
    rep.f = f;
    rep.nvars = nvars;
    rep.depth = depth;
    if (depth < 1) throw BadParameters("verify_syntomic_exactness: depth must be >= 1");
    auto F = GaloisRing::get(p, f, 1);
    Rng rng(cfg.seed);
    auto fail = [&](const std::string& s) {
        if (!rep.counterexample) rep.counterexample = s;
    };

    // Window for Nyg/pNyg: coordinates k/p^depth < 2p.
    auto mons = exponent_grid(p, nvars, depth, 2 * p);
    rep.window_monomials = static_cast<int>(mons.size());
    detail::FormIndex dom;
    dom.f = f;
    for (auto& a : mons) dom.slot(a);
    int D = dom.dim();
    detail::FormIndex cod;
    cod.f = f;
    std::vector<ModpBasisForm> cols;
    for (auto& a : mons)
        for (int k = 0; k < f; ++k) {
            Coeffs e = F->zero();
            e[k] = 1;
            ModpBasisForm x(F, nvars, ModpBasisForm::Space::Nygaard);
            x.add_term(a, e);
            auto img = map_M(x);
            for (auto& t : img.terms) cod.slot(t.first);
            cols.push_back(img);
        }
    Prec p1(p, 1);
    ZpnMatrix Mm(p1, cod.dim(), D);
    for (int j = 0; j < D; ++j) {
        Vec v = cod.vec(cols[j], cod.dim());
        for (int i = 0; i < cod.dim(); ++i) Mm(i, j) = v[i];
    }
    Submodule K = kernel(Mm);
    rep.kernel_dim = static_cast<int>(K.basis().size());

    // logbar generators; p-corrections raise the depth by one.
    auto gens = detail::log_generators(F, nvars, depth - 1);
    rep.generator_count = static_cast<int>(gens.images.size());
    std::vector<Vec> gvecs;
    bool complex_ok = true;
    for (size_t j = 0; j < gens.images.size(); ++j) {
        if (!map_M(gens.images[j]).is_zero()) {
            complex_ok = false;
            fail("M(logbar(u)) != 0 for a generator");
        }
        try {
            gvecs.push_back(dom.vec(gens.images[j], D));
        } catch (const WindowTooSmall&) {
            complex_ok = false;
            fail("logbar image leaves the window");
        }
    }
    Submodule G(p1, D, gvecs);
    rep.generator_rank = static_cast<int>(G.basis().size());

    // middle: ker M = span of logbar images, with explicit unit witnesses
    bool middle = complex_ok;
    for (auto& kv : K.basis()) {
        if (!G.contains(kv)) {
            middle = false;
            fail("kernel element outside the image of logbar");
        }
    }
    for (auto& gv : gvecs)
        if (!K.contains(gv)) middle = false;
    std::vector<Vec> targets = K.basis();
    for (int s = 0; s < cfg.samples && !K.basis().empty(); ++s) {
        Vec v(D, 0);
        while (std::all_of(v.begin(), v.end(), [](u64 x) { return x == 0; }))
            for (auto& kv : K.basis()) {
                u64 c = rng.below(p);
                for (int i = 0; i < D; ++i) v[i] = p1.add(v[i], p1.mul(c, kv[i]));
            }
        targets.push_back(v);
    }
    for (size_t t = 0; t < targets.size() && middle; ++t) {
        auto a = dom.form(targets[t], F, nvars, ModpBasisForm::Space::Nygaard);
        if (a.is_zero()) continue;
        try {
            TateUnit u = detail::solve_log_with(a, gens);
            // direct check on basis targets; additivity covers the random combinations
            ModpBasisForm back(F, nvars, ModpBasisForm::Space::Nygaard);
            if (t < K.basis().size())
                back = logbar(u);
            else
                for (auto& fac : u.factors) {
                    TateUnit one(F, {0, nvars});
                    one.times(fac.c, fac.a);
                    for (size_t j = 0; j < gens.units.size(); ++j)
                        if (gens.units[j].a == fac.a && gens.units[j].c == fac.c) back = back + gens.images[j].scaled(fac.e);
                }
            if (back != a) {
                middle = false;
                fail("logbar(solve_log_preimage(a)) != a for a = " + a.to_string());
            } else {
                ++rep.log_witnesses;
            }
        } catch (const Error& e) {
            middle = false;
            fail(std::string("solve_log_preimage failed: ") + e.what());
        }
    }
    rep.middle_exact = middle;

    // left: logbar is injective on the span of the generators, and the lowest
    // normal-form monomial of a unit survives as the leading Acris coefficient
    bool left = complex_ok && rep.generator_rank == rep.generator_count;
    if (!left) fail("logbar images of the generators are linearly dependent");
    VarLayout L{0, nvars};
    for (int tries = 0; rep.leading_term_checks < cfg.samples && tries < 20 * cfg.samples && left && !gens.units.empty();
         ++tries) {
        TateUnit u(F, L);
        int nf = 1 + static_cast<int>(rng.below(3));
        for (int k = 0; k < nf; ++k) {
            auto& g = gens.units[rng.below(gens.units.size())];
            Coeffs c = F->zero();
            for (auto& x : c) x = rng.below(p);
            if (F->is_zero(c)) c[0] = 1;
            u.times(c, g.a, 1 + rng.below(p - 1 + (p == 2)));
        }
        // normal form of u modulo 1 + phi(J): drop monomials with a coordinate >= p
        SharpSeries sh = u.sharp();
        std::optional<ExpVec> lead;
        Coeffs lc;
        for (auto& [a, c] : sh.terms()) {
            if (a.is_zero()) continue;
            bool big = false;
            for (int i = 0; i < nvars; ++i) big = big || a[i].floor() >= p;
            if (big) continue;
            if (!lead || total_less(a, *lead, p)) {
                lead = a;
                lc = c;
            }
        }
        if (!lead) continue;
        auto lg = logbar(u);
        auto acr = acris_normal_form(to_pdseries(lg, 2));
        auto it = acr.terms.find(*lead);
        Coeffs got = it == acr.terms.end() ? F->zero() : it->second;
        bool ok = got == lc;
        for (auto& [a, c] : acr.terms) {
            bool below = total_less(a, *lead, p);
            bool nf_range = true;
            for (int i = 0; i < nvars; ++i) nf_range = nf_range && a[i].floor() < p;
            if (below && nf_range && floor_sum(a) >= 1) ok = false;
        }
        if (!ok) {
            left = false;
            fail("leading term of logbar(u) differs from the normal form of u");
        } else {
            ++rep.leading_term_checks;
        }
    }
    if (left && !gens.units.empty() && rep.leading_term_checks < cfg.samples) {
        left = false;
        fail("too few units with a nontrivial normal form");
    }
    rep.left_injective = left;

    // right: every window basis element and random combinations have M-preimages
    bool right = true;
    auto check_target = [&](const ModpBasisForm& t) {
        auto x = solve_M_preimage(t);
        if (map_M(x) != t) {
            right = false;
            fail("M(solve_M_preimage(t)) != t for t = " + t.to_string());
        } else {
            ++rep.right_witnesses;
        }
    };
    for (auto& a : mons)
        for (int k = 0; k < f; ++k) {
            ModpBasisForm t(F, nvars, ModpBasisForm::Space::Acris);
            Coeffs e = F->zero();
            e[k] = 1;
            t.add_term(a, e);
            check_target(t);
        }
    for (int s = 0; s < cfg.samples; ++s) {
        ModpBasisForm t(F, nvars, ModpBasisForm::Space::Acris);
        for (int k = 0; k < 5; ++k) {
            Coeffs c = F->zero();
            for (auto& x : c) x = rng.below(p);
            t.add_term(mons[rng.below(mons.size())], c);
        }
        check_target(t);
    }
    rep.right_surjective = right;
    return rep;
}

struct EtaleReport {
    u64 p = 2;
    int f = 1;
    int window_monomials = 0;
    bool kernel_is_constants = false;
    int kernel_dim = 0;
    int preimages_checked = 0;
    bool preimages_ok = false;
    std::optional<std::string> counterexample;
};

// F - 1 on Acris/p over a window with coordinates k/p^depth < bound (n = 1).
inline EtaleReport etale_sequence_check(u64 p, int f, int depth, u64 bound, int samples = 20, u64 seed = 1) {
    if (bound < p || depth < 1) throw WindowTooSmall("etale_sequence_check: window must contain [0,p) at depth >= 1");
    EtaleReport rep;
    rep.p = p;
    rep.f = f;
    auto R = GaloisRing::get(p, f, 1);
    VarLayout L{0, 1};
    auto mons = exponent_grid(p, 1, depth, bound);
    rep.window_monomials = static_cast<int>(mons.size());
    detail::FormIndex idx;
    idx.f = f;
    for (auto& a : mons) idx.slot(a);
    int D = idx.dim();
    std::vector<ModpBasisForm> cols;
    for (auto& a : mons)
        for (int k = 0; k < f; ++k) {
            Coeffs e = R->zero();
            e[k] = 1;
            PDSeries x = PDSeries::basis(R, L, a, e);
            cols.push_back(acris_normal_form(x.frobenius() - x));
        }
    for (auto& c : cols)
        for (auto& t : c.terms) idx.slot(t.first);
    Prec p1(p, 1);
    ZpnMatrix m(p1, idx.dim(), D);
    for (int j = 0; j < D; ++j) {
        Vec v = idx.vec(cols[j], idx.dim());
        for (int i = 0; i < idx.dim(); ++i) m(i, j) = v[i];
    }
    Submodule K = kernel(m);
    rep.kernel_dim = static_cast<int>(K.basis().size());
    Vec one(D, 0);
    one[idx.find(ExpVec::zero(1)) * f] = 1;
    rep.kernel_is_constants = K == Submodule(p1, D, {one});
    if (!rep.kernel_is_constants) rep.counterexample = "ker(F-1) differs from F_p*1";

    Rng rng(seed);
    std::vector<ExpVec> interior;
    for (auto& a : mons)
        if (!a.is_zero() && a[0].times_p(p) < FracExp::integer(bound)) interior.push_back(a);
    bool ok = true;
    for (int s = 0; s < samples; ++s) {
        PDSeries t(R, L);
        for (int k = 0; k < 3; ++k) {
            Coeffs c(f);
            for (auto& x : c) x = rng.below(p);
            t.add_term(interior[rng.below(interior.size())], c);
        }
        Coeffs d(f);
        for (auto& x : d) x = rng.below(p);
        Coeffs c0 = R->sub(R->sigma(d), d);
        PDSeries target = t + PDSeries::constant(R, L, c0);
        // -(t + F t + F^2 t + ...) terminates mod p; constants via Artin-Schreier
        PDSeries x(R, L), term = t;
        for (int guard = 0; !term.is_zero(); ++guard) {
            if (guard > 64) throw WindowTooSmall("etale preimage series did not terminate");
            x -= term;
            term = term.frobenius();
        }
        auto lam = semilinear_solve(0, GaloisRingElem(R, c0), false).lambda;
        x += PDSeries::constant(R, L, lam.coeffs());
        bool in_window = true;
        for (auto& tt : x.terms())
            if (idx.find(tt.first) < 0 || tt.first.depth() > depth) in_window = false;
        if (x.frobenius() - x != target || !in_window) {
            ok = false;
            if (!rep.counterexample) rep.counterexample = "geometric-series preimage failed for " + target.to_string();
        } else {
            ++rep.preimages_checked;
        }
    }
    rep.preimages_ok = ok;
    return rep;
}

}  // namespace pcris
