#pragma once

// The twelve-point self-test.  Each criterion returns one CheckResult whose
// measured values are deterministic; wall-clock times go to the report's
// separate timings block.

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "acris.hpp"
#include "cech.hpp"
#include "io.hpp"
#include "syntomic.hpp"

namespace pcris {

enum class SelftestLevel { Quick, Full };

struct SelftestConfig {
    SelftestLevel level = SelftestLevel::Quick;
    u64 seed = 1;
    std::vector<int> only;  // empty: all criteria
};

namespace selftest_detail {

inline int binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return static_cast<int>(r);
}

inline bool full(const SelftestConfig& c) { return c.level == SelftestLevel::Full; }

// 1. Teichmuller representatives --------------------------------------------

// fixpoint of x -> x^p on plain integers mod p^N, f = 1
inline u64 teich_oracle(u64 p, int N, u64 a) {
    Prec pr(p, N);
    u64 x = a % p;
    for (int k = 0; k <= N; ++k) x = pr.pow(x, p);
    return x;
}

inline CheckResult teichmuller_check(const SelftestConfig& cfg) {
    CheckResult r{"teichmuller", true, json::object()};
    u64 t53 = teichmuller(make_field(5, 1), 3, {2}).coeffs()[0];
    u64 t32 = teichmuller(make_field(3, 1), 2, {2}).coeffs()[0];
    r.measured["teich(5,1,3)(2)"] = t53;
    r.measured["teich(3,1,2)(2)"] = t32;
    bool ok = t53 == 57 && t32 == 8 && teich_oracle(5, 3, 2) == 57 && teich_oracle(3, 2, 2) == 8;
    Rng rng(cfg.seed * 1000 + 1);
    int failures = 0, pairs = 0;
    for (auto [p, f] : std::vector<std::pair<u64, int>>{{2, 2}, {3, 2}, {5, 1}}) {
        int N = 4;
        auto fd = make_field(p, f);
        auto R = GaloisRing::get(fd, N);
        auto F = GaloisRing::get(fd, 1);
        u64 q = ipow(p, f);
        for (int k = 0; k < 100; ++k, ++pairs) {
            Coeffs a(f), b(f);
            for (auto& x : a) x = rng.below(p);
            for (auto& x : b) x = rng.below(p);
            auto ta = teichmuller(fd, N, a), tb = teichmuller(fd, N, b);
            bool good = ta * tb == teichmuller(fd, N, F->mul(a, b));
            good = good && ta.pow(q) == ta;  // fixed by x -> x^q
            if (!F->is_zero(a)) good = good && ta.pow(q - 1) == GaloisRingElem::scalar(R, 1);  // root of unity
            for (int i = 0; i < f; ++i) good = good && ta.coeffs()[i] % p == a[i];
            if (f == 1) good = good && ta.coeffs()[0] == teich_oracle(p, N, a[0]);
            if (!good) ++failures;
        }
    }
    r.measured["random_pairs"] = pairs;
    r.measured["failures"] = failures;
    r.pass = ok && failures == 0;
    return r;
}

// 2. Syntomic exactness -------------------------------------------------------

inline CheckResult syntomic_check(const SelftestConfig& cfg) {
    CheckResult r{"syntomic-exactness", true, json::array()};
    for (auto [p, f, n, depth] : std::vector<std::tuple<u64, int, int, int>>{{2, 1, 1, 3}, {3, 1, 1, 3}, {2, 2, 1, 2}, {5, 1, 1, 2}, {2, 1, 2, 2}}) {
        SyntomicConfig sc;
        sc.samples = 100;
        sc.seed = cfg.seed;
        auto rep = verify_syntomic_exactness(p, f, n, depth, sc);
        json m{{"p", p}, {"f", f}, {"n", n}, {"depth", depth},
               {"left_injective", rep.left_injective}, {"middle_exact", rep.middle_exact}, {"right_surjective", rep.right_surjective},
               {"window_monomials", rep.window_monomials}, {"kernel_dim", rep.kernel_dim}, {"log_witnesses", rep.log_witnesses},
               {"leading_term_checks", rep.leading_term_checks}, {"right_witnesses", rep.right_witnesses}};
        if (rep.counterexample) m["counterexample"] = *rep.counterexample;
        r.measured.push_back(m);
        r.pass = r.pass && rep.all();
    }
    return r;
}

// 3. Nygaard criterion: coefficient test versus Frobenius divisibility ------

inline CheckResult nygaard_check(const SelftestConfig& cfg) {
    CheckResult r{"nygaard-equivalence", true, json::array()};
    Rng rng(cfg.seed * 1000 + 3);
    const int depth = 3;
    VarLayout L{0, 1};
    for (u64 p : {2, 3}) {
        auto R = GaloisRing::get(p, 2, 2);
        u64 den = ipow(p, depth);
        u64 bound = 2 * p;
        int disagreements = 0, monomial_cases = 0, random_cases = 0;
        std::string first;
        auto test = [&](const PDSeries& s) {
            if (s.nygaard_coefficient_test() != s.nygaard_frobenius_test()) {
                if (!disagreements) first = s.to_string();
                ++disagreements;
            }
        };
        // every window monomial times every nonzero coefficient of GR(p^2, 2)
        u64 q = R->prec().mod;
        for (u64 k = 0; k < bound * den; ++k)
            for (u64 c = 1; c < q * q; ++c, ++monomial_cases)
                test(PDSeries::basis(R, L, ExpVec::unit(1, 0, FracExp::make(k, depth, p)), Coeffs{c % q, c / q}));
        for (int i = 0; i < 500; ++i, ++random_cases) {
            PDSeries s(R, L);
            int terms = 1 + static_cast<int>(rng.below(4));
            for (int t = 0; t < terms; ++t)
                s.add_term(ExpVec::unit(1, 0, FracExp::make(rng.below(bound * den), depth, p)), Coeffs{rng.below(q), rng.below(q)});
            test(s);
        }
        json m{{"p", p}, {"window_cases", monomial_cases}, {"random_sums", random_cases}, {"disagreements", disagreements}};
        if (disagreements) m["first_disagreement"] = first;
        r.measured.push_back(m);
        r.pass = r.pass && disagreements == 0;
    }
    return r;
}

// 4. Ordinary abelian varieties ----------------------------------------------

inline CheckResult ordinary_check(const SelftestConfig&) {
    CheckResult r{"ordinary-av-fppf", true, json::array()};
    for (u64 p : {2, 5})
        for (int g = 1; g <= 3; ++g) {
            auto R = GaloisRing::get(p, 1, 3);
            auto ds = fppf_cohomology(ordinary_av(g, R), 3);
            json ranks = json::array(), expect = json::array();
            bool ok = true;
            for (auto& d : ds) {
                int want = g * binom(g, d.degree - 1);
                ranks.push_back(d.free_rank);
                expect.push_back(want);
                ok = ok && d.free_rank == want && d.finite_torsion.empty() && d.unipotent_a == 0 && d.stable;
            }
            r.measured.push_back({{"p", p}, {"g", g}, {"free_ranks", ranks}, {"expected", expect}, {"ok", ok}});
            r.pass = r.pass && ok;
        }
    return r;
}

// 5. Supersingular E x E -------------------------------------------------------

inline CheckResult supersingular_check(const SelftestConfig& cfg) {
    CheckResult r{"supersingular-exe-fppf", true, json::array()};
    std::vector<u64> primes{2, 3};
    if (full(cfg)) primes.push_back(5);
    for (u64 p : primes) {
        auto R = GaloisRing::get(p, 1, 3);
        std::vector<FppfGroups> gs;
        auto ds = fppf_cohomology(supersingular_exe(R), 3, &gs);
        const auto& h3 = ds[3];
        json per_level = json::array();
        for (auto& lv : gs[2].levels) {
            int dim = 0;
            for (int e : lv.coker.torsion) dim += e;
            per_level.push_back({{"fprime", lv.fprime}, {"torsion_length", dim}, {"coker_free", lv.coker.free}});
        }
        bool h1_zero = ds[1].free_rank == 0 && ds[1].finite_torsion.empty() && ds[1].unipotent_a == 0;
        bool ok = h1_zero && h3.unipotent_a == 1 && h3.unipotent_exponent == 1 && gs[2].affine_exact && ds[2].free_rank == 6;
        r.measured.push_back({{"p", p},
                              {"H1_zero", h1_zero},
                              {"H2_free_rank", ds[2].free_rank},
                              {"H2_free_rank_expected", 6},
                              {"H2_free_rank_flagged_alternative", 2},
                              {"H3_a", h3.unipotent_a},
                              {"H3_exponent", h3.unipotent_exponent},
                              {"H3_levels", per_level},
                              {"ok", ok}});
        r.pass = r.pass && ok;
    }
    return r;
}

// 6. Slope-module cokernels -----------------------------------------------------

inline CheckResult coker_check(const SelftestConfig& cfg) {
    CheckResult r{"slope-module-cokernels", true, json::object()};
    Rng rng(cfg.seed * 1000 + 6);
    json certs = json::array();
    for (u64 p : {2, 3}) {
        auto R = GaloisRing::get(p, 2, 4);
        auto m21 = standard_slope_module(1, 2, R), m01 = standard_slope_module(1, 0, R);
        int ok21 = 0, ok01 = 0;
        for (int i = 0; i < 20; ++i) {
            Coeffs c(2);
            for (auto& x : c) x = rng.below(R->prec().mod);
            CVec t{c}, tp{R->mul_p(c, 1)};
            auto w = coker_F_minus_p_witness(m21, tp);
            if (w.certificate && w.method == "series-F" && f_minus_p(m21, w.preimage) == tp) ++ok21;
            auto w0 = coker_F_minus_p_witness(m01, t);
            if (w0.certificate && w0.method == "series-Finv" && f_minus_p(m01, w0.preimage) == t) ++ok01;
        }
        certs.push_back({{"p", p}, {"M_2/1_validated", ok21}, {"M_0/1_validated", ok01}});
        r.pass = r.pass && ok21 == 20 && ok01 == 20;
    }
    r.measured["certificates"] = certs;
    json bounds = json::array();
    for (u64 p : {2, 3}) {
        auto R = GaloisRing::get(p, 1, 4);
        for (auto [rk, s] : std::vector<std::pair<int, int>>{{1, 0}, {1, 1}, {1, 2}, {2, 1}, {3, 1}, {3, 2}}) {
            auto prof = coker_F_minus_p_tower(standard_slope_module(rk, s, R), 3);
            json mx = json::array();
            std::vector<int> v;
            for (auto& m : prof) v.push_back(m.torsion.empty() ? 0 : m.torsion.back());
            for (int e : v) mx.push_back(e);
            bool bounded = true;
            for (size_t j = 1; j < v.size(); ++j) bounded = bounded && v[j] == v[1];
            bounded = bounded && v.back() < 4;
            bounds.push_back({{"p", p}, {"r", rk}, {"s", s}, {"max_exponent_by_level", mx}, {"bounded", bounded}});
            r.pass = r.pass && bounded;
        }
    }
    r.measured["exponent_bounds"] = bounds;
    return r;
}

// 7. Newton polygons -------------------------------------------------------------

// char poly coefficients from sums of principal minors, Leibniz determinants
inline std::vector<int> charpoly_valuations_oracle(const FCrystal& X) {
    const auto& R = *X.ring();
    CMat A = frobenius_power_matrix(X);
    int n = static_cast<int>(A.size());
    std::vector<int> vals(n + 1);
    for (int k = 0; k <= n; ++k) {
        Coeffs sum = k == 0 ? R.one() : R.zero();
        for (auto& S : subsets(n, k)) {
            if (k == 0) break;
            std::vector<int> perm(S.begin(), S.end());
            Coeffs det = R.zero();
            do {
                Coeffs prod = R.one();
                int inv = 0;
                for (int i = 0; i < k; ++i) {
                    prod = R.mul(prod, A[S[i]][perm[i]]);
                    for (int j = i + 1; j < k; ++j) inv += perm[i] > perm[j];
                }
                det = inv % 2 ? R.sub(det, prod) : R.add(det, prod);
            } while (std::next_permutation(perm.begin(), perm.end()));
            sum = R.add(sum, det);
        }
        vals[k] = R.val(sum);
    }
    return vals;
}

// slopes of the lower hull of (k, v(e_k)), e_k the k-th principal-minor sum, divided by f
inline std::vector<std::pair<Slope, int>> hull_oracle(const std::vector<int>& v, int f) {
    std::vector<std::pair<Slope, int>> out;
    int n = static_cast<int>(v.size()) - 1;
    int k = 0;
    while (k < n) {
        // smallest slope from point k; take the farthest point attaining it
        int best = -1;
        i64 bn = 0, bd = 1;
        for (int j = k + 1; j <= n; ++j) {
            i64 num = v[j] - v[k], den = j - k;
            if (best < 0 || num * bd < bn * den || num * bd == bn * den) {
                best = j;
                bn = num;
                bd = den;
            }
        }
        out.push_back({Slope::make(bn, bd * f), best - k});
        k = best;
    }
    return out;
}

inline CheckResult newton_check(const SelftestConfig&) {
    CheckResult r{"newton-polygons", true, json::array()};
    auto one = [&](const std::string& name, const FCrystal& X, NewtonPolygon want) {
        auto np = newton_polygon(X);
        auto o = hull_oracle(charpoly_valuations_oracle(X), X.f());
        bool ok = np == want && o == want.segments;
        r.measured.push_back({{"crystal", name}, {"slopes", to_json(np)}, {"ok", ok}});
        r.pass = r.pass && ok;
    };
    auto R = GaloisRing::get(3, 1, 8);
    for (auto [rk, s] : std::vector<std::pair<int, int>>{{1, 0}, {1, 1}, {1, 2}, {2, 1}, {3, 1}, {3, 2}})
        one("M_" + std::to_string(s) + "/" + std::to_string(rk), standard_slope_module(rk, s, R), NewtonPolygon{{{Slope::make(s, rk), rk}}});
    one("ordinary H1", ordinary_h1(1, R), NewtonPolygon{{{Slope::make(0, 1), 1}, {Slope::make(1, 1), 1}}});
    one("supersingular H1", supersingular_h1(R), NewtonPolygon{{{Slope::make(1, 2), 2}}});
    return r;
}

// 8. Infinitesimal comparison ------------------------------------------------------

inline CheckResult infinitesimal_check(const SelftestConfig&) {
    CheckResult r{"frobenius-intersection", true, json::array()};
    for (u64 p : {2, 3}) {
        AcrisWindow w;
        w.p = p;
        w.depth = 3;
        w.bound = p + 1;
        w.max_depth = 8;
        auto fi = frobenius_intersection(w, 2, 3);
        r.measured.push_back({{"p", p}, {"window_monomials", fi.monomials.size()}, {"intersection_generators", fi.intersection.basis().size()},
                              {"ainf_generators", fi.ainf.basis().size()}, {"equal", fi.equal}});
        r.pass = r.pass && fi.equal;
    }
    return r;
}

// 9. Etale variant -------------------------------------------------------------------

inline CheckResult etale_check(const SelftestConfig& cfg) {
    CheckResult r{"etale-sequence", true, json::array()};
    for (u64 p : {2, 3}) {
        auto e = etale_sequence_check(p, 1, 2, 2 * p, 20, cfg.seed);
        json m{{"p", p}, {"kernel_dim", e.kernel_dim}, {"kernel_is_constants", e.kernel_is_constants}, {"preimages_checked", e.preimages_checked}, {"preimages_ok", e.preimages_ok}};
        if (e.counterexample) m["counterexample"] = *e.counterexample;
        r.measured.push_back(m);
        r.pass = r.pass && e.kernel_is_constants && e.kernel_dim == 1 && e.preimages_ok && e.preimages_checked == 20;
    }
    return r;
}

// 10. Cech descent against de Rham ------------------------------------------------------

// de Rham complex of F_p[x], degrees <= D; x^k dx has degree k+1.  Returns the
// interior degrees carrying H^0 and H^1 by direct kernel/cokernel computation.
inline std::pair<std::vector<u64>, std::vector<u64>> de_rham_oracle(u64 p, int D) {
    std::vector<u64> h0, h1;
    for (u64 k = 0; 2 * k <= static_cast<u64>(D); ++k) {
        // d(x^k) = k x^{k-1} dx, closed iff k = 0 mod p
        if (k % p == 0) h0.push_back(k);
        // x^{k-1} dx (degree k) is hit by d(x^k / k) iff k is a unit
        if (k >= 1 && k % p == 0) h1.push_back(k);
    }
    return {h0, h1};
}

inline CheckResult cech_check(const SelftestConfig& cfg) {
    CheckResult r{"cech-descent", true, json::array()};
    std::vector<int> dens{1};
    if (full(cfg)) dens.push_back(2);
    for (u64 p : {2, 3})
        for (int md : dens) {
            CechWindow w;
            w.p = p;
            w.D = static_cast<int>(p * p);
            w.m_den = md;
            w.t_bound = w.D;
            w.N = 1;
            CechComplex C(w);
            auto h = C.cohomology();
            auto [o0, o1] = de_rham_oracle(p, w.D);
            std::vector<u64> g0, g1;
            json basis = json::array();
            bool ok = true;
            for (auto& d : h.degrees) {
                if (!d.interior) continue;
                if (!d.degree.is_integer() && (d.h0 || d.h1)) ok = false;
                if (!d.degree.is_integer()) continue;
                for (auto& b : d.h0_basis) {
                    basis.push_back(b.to_string());
                    // a single monomial x^k with unit coefficient
                    ok = ok && b.size() == 1 && b.terms().begin()->first[0] == d.degree;
                }
                if (d.h0) g0.push_back(d.degree.floor());
                if (d.h1) g1.push_back(d.degree.floor());
                ok = ok && d.h0 <= 1 && d.h1 <= 1;
            }
            ok = ok && g0 == o0 && g1 == o1;
            r.measured.push_back({{"p", p}, {"D", w.D}, {"m_den", md}, {"H0_degrees", g0}, {"H0_basis", basis}, {"H1_degrees", g1},
                                  {"oracle_H0", o0}, {"oracle_H1", o1}, {"ok", ok}});
            r.pass = r.pass && ok;
        }
    return r;
}

// 11. Isogeny action -------------------------------------------------------------------

inline CheckResult isogeny_check(const SelftestConfig&) {
    CheckResult r{"isogeny-action", true, json::array()};
    auto run = [&](const std::string& name, u64 p, const std::vector<FCrystal>& crystals) {
        int checked = 0, bad = 0;
        for (u64 n : {u64(2), u64(3), p})
            for (size_t i = 0; i < crystals.size(); ++i)
                for (int j = 1; j <= 3; ++j) {
                    auto X = crystals[i].at_level(crystals[i].f() << j);
                    ++checked;
                    if (!isogeny_action_check(X, n, static_cast<int>(i)).ok()) ++bad;
                }
        r.measured.push_back({{"preset", name}, {"p", p}, {"groups_checked", checked}, {"failures", bad}});
        r.pass = r.pass && bad == 0;
    };
    for (u64 p : {2, 5}) run("ordinary-av g=1", p, ordinary_av(1, GaloisRing::get(p, 1, 3)));
    for (u64 p : {2, 3}) run("supersingular-exe", p, supersingular_exe(GaloisRing::get(p, 1, 3)));
    return r;
}

using Criterion = std::function<CheckResult(const SelftestConfig&)>;

inline std::vector<std::pair<int, Criterion>> criteria() {
    return {{1, teichmuller_check}, {2, syntomic_check},       {3, nygaard_check},  {4, ordinary_check},
            {5, supersingular_check}, {6, coker_check},        {7, newton_check},   {8, infinitesimal_check},
            {9, etale_check},         {10, cech_check},        {11, isogeny_check}};
}

}  // namespace selftest_detail

inline bool fault_injected_build() {
#ifdef PCRIS_FAULT_GAMMA_VAL
    return true;
#else
    return false;
#endif
}

inline RunReport run_selftest(const SelftestConfig& cfg) {
    using namespace selftest_detail;
    RunReport rep;
    rep.command = "selftest";
    rep.seed = cfg.seed;
    rep.config = {{"level", full(cfg) ? "full" : "quick"}, {"fault_injected_build", fault_injected_build()}};
    auto wanted = [&](int k) { return cfg.only.empty() || std::find(cfg.only.begin(), cfg.only.end(), k) != cfg.only.end(); };
    auto timed = [&](int k, const Criterion& fn, const SelftestConfig& c) {
        auto t0 = std::chrono::steady_clock::now();
        CheckResult res;
        try {
            res = fn(c);
        } catch (const std::exception& e) {
            res.pass = false;
            res.measured = {{"error", e.what()}};
        }
        res.name = "C" + std::to_string(k) + " " + res.name;
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return std::make_pair(res, dt);
    };
    for (auto& [k, fn] : criteria()) {
        if (!wanted(k)) continue;
        auto [res, dt] = timed(k, fn, cfg);
        if (res.name.find("C0") == 0) res.name = "C" + std::to_string(k);
        rep.checks.push_back(res);
        rep.timings.push_back({rep.checks.back().name, dt});
    }
    if (wanted(12)) {
        // determinism: rerun seeded criteria and compare serialized results.  The
        // fault-injection half needs a second build and lives in the acceptance binary.
        auto t0 = std::chrono::steady_clock::now();
        CheckResult d{"C12 determinism", true, json::array()};
        for (int k : {1, 3, 9, 10}) {
            auto fn = criteria()[k - 1].second;
            auto a = fn(cfg).measured.dump(), b = fn(cfg).measured.dump();
            d.measured.push_back({{"criterion", k}, {"identical", a == b}});
            d.pass = d.pass && a == b;
        }
        rep.checks.push_back(d);
        rep.timings.push_back({d.name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    }
    return rep;
}

}  // namespace pcris
