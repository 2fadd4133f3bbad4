#include <gtest/gtest.h>

#include "pcris/syntomic.hpp"

using namespace pcris;

namespace {

FracExp fe(u64 num, int e, u64 p) { return FracExp::make(num, e, p); }
ExpVec ev1(u64 num, int e, u64 p) { return ExpVec::unit(1, 0, fe(num, e, p)); }
Coeffs c1(u64 x) { return Coeffs{x}; }

using Space = ModpBasisForm::Space;

ModpBasisForm form(const RingPtr& F, Space s, std::initializer_list<std::pair<ExpVec, u64>> ts) {
    ModpBasisForm m(F, 1, s);
    for (auto& [a, c] : ts) m.add_term(a, c1(c));
    return m;
}

}  // namespace

TEST(ModpNormalForm, Examples) {
    auto R = GaloisRing::get(2, 1, 2);
    VarLayout L{0, 1};
    auto zero = ExpVec::zero(1);
    auto pone = PDSeries::constant(R, L, c1(2));
    auto nf = modp_normal_form(pone);
    EXPECT_EQ(nf.terms.size(), 1u);
    EXPECT_EQ(nf.terms.at(zero), c1(1));

    auto x = PDSeries::basis(R, L, ev1(1, 0, 2), c1(1));
    EXPECT_EQ(modp_normal_form(x).terms.at(ev1(1, 0, 2)), c1(1));

    // x^2 + x: x^2 = 2 * e_2, vanishes mod 2
    auto x2 = x * x;
    auto s = modp_normal_form(x2 + x);
    EXPECT_EQ(s.terms.size(), 1u);
    EXPECT_EQ(s.terms.count(ev1(1, 0, 2)), 1u);
}

TEST(ModpNormalForm, RejectsLowPrecisionAndNonNygaard) {
    auto R1 = GaloisRing::get(3, 1, 1);
    VarLayout L{0, 1};
    EXPECT_THROW(modp_normal_form(PDSeries::one(R1, L)), PrecisionMismatch);
    auto R2 = GaloisRing::get(3, 1, 2);
    EXPECT_THROW(modp_normal_form(PDSeries::one(R2, L)), NotNygaard);
}

TEST(ModpNormalForm, RoundTrip) {
    auto F = GaloisRing::get(3, 2, 1);
    Rng rng(7);
    for (int it = 0; it < 100; ++it) {
        ModpBasisForm m(F, 2, Space::Nygaard);
        for (int k = 0; k < 6; ++k) {
            ExpVec a = ExpVec::zero(2);
            for (int i = 0; i < 2; ++i) a[i] = fe(rng.below(6 * 9), 2, 3);
            m.add_term(a, Coeffs{rng.below(3), rng.below(3)});
        }
        EXPECT_EQ(modp_normal_form(to_pdseries(m, 2)), m);
        EXPECT_EQ(modp_normal_form(to_pdseries(m, 4)), m);
    }
}

TEST(MapM, ThreeCases) {
    auto F = GaloisRing::get(3, 2, 1);
    Coeffs b{1, 2};
    auto a0 = ev1(1, 1, 3), a1 = ev1(4, 1, 3), a2 = ev1(7, 1, 3);

    ModpBasisForm x(F, 1, Space::Nygaard);
    x.add_term(a0, b);
    ModpBasisForm want(F, 1, Space::Acris);
    want.add_term(ev1(1, 0, 3), F->pow(b, 3));
    EXPECT_EQ(map_M(x), want);

    ModpBasisForm y(F, 1, Space::Nygaard);
    y.add_term(a2, b);
    ModpBasisForm want2(F, 1, Space::Acris);
    want2.add_term(a2, F->neg(b));
    EXPECT_EQ(map_M(y), want2);

    ModpBasisForm z(F, 1, Space::Nygaard);
    z.add_term(a1, b);
    ModpBasisForm want3(F, 1, Space::Acris);
    want3.add_term(ev1(4, 0, 3), F->pow(b, 3));
    want3.add_term(a1, F->neg(b));
    EXPECT_EQ(map_M(z), want3);
}

// Oracle: F/p - 1 on a lift, then reduce coefficients mod p.
TEST(MapM, AgreesWithDividedFrobenius) {
    for (u64 p : {2, 3, 5}) {
        auto F = GaloisRing::get(p, 2, 1);
        Rng rng(p);
        for (int it = 0; it < 100; ++it) {
            ModpBasisForm m(F, 2, Space::Nygaard);
            for (int k = 0; k < 5; ++k) {
                ExpVec a = ExpVec::zero(2);
                for (int i = 0; i < 2; ++i) a[i] = fe(rng.below(3 * p * p), 2, p);
                m.add_term(a, Coeffs{rng.below(p), rng.below(p)});
            }
            PDSeries lift = to_pdseries(m, 2);
            PDSeries fp = lift.frobenius().divided_by_p(1) - lift.reduced(1);
            EXPECT_EQ(acris_normal_form(fp), map_M(m)) << m;
        }
    }
}

TEST(Logbar, Examples) {
    auto F = GaloisRing::get(2, 1, 1);
    VarLayout L{0, 1};
    TateUnit one(F, L);
    EXPECT_TRUE(logbar(one).is_zero());

    // log[1+x] with [1+x] = 1 + x + 2 x^{1/2}: the p-type correction survives
    TateUnit u(F, L);
    u.times(c1(1), ev1(1, 0, 2));
    auto want = form(F, Space::Nygaard, {{ev1(1, 0, 2), 1}, {ev1(2, 0, 2), 1}, {ev1(1, 1, 2), 1}});
    EXPECT_EQ(logbar(u), want);
    EXPECT_TRUE(map_M(want).is_zero());

    // the two-term truncation is not in ker M
    auto two_term = form(F, Space::Nygaard, {{ev1(1, 0, 2), 1}, {ev1(2, 0, 2), 1}});
    EXPECT_FALSE(map_M(two_term).is_zero());
    EXPECT_THROW(solve_log_preimage(two_term), NotInKernel);
}

// Oracle: sum_d (-1)^{d-1} Y^d/d on the Teichmuller lift, Y = [1-x] - 1.
TEST(Logbar, MinusXAtThree) {
    auto F = GaloisRing::get(3, 1, 1);
    VarLayout L{0, 1};
    TateUnit u(F, L);
    u.times(c1(2), ev1(1, 0, 3));
    auto R = GaloisRing::get(3, 1, 3);
    PDSeries Y = teichmuller_of_unit(u, 3) - PDSeries::one(R, L);
    auto R2 = R->at_precision(2);
    PDSeries acc(R2, L), pw = PDSeries::one(R, L);
    for (u64 d = 1; d <= 6; ++d) {
        pw = pw * Y;
        PDSeries t = pw;
        u64 dd = d;
        int k = 0;
        while (dd % 3 == 0) {
            dd /= 3;
            ++k;
        }
        t = t.divided_by_p(k).reduced(2);
        t = t * PDSeries::constant(R2, L, R2->inv(R2->scalar(dd)));
        if (d % 2 == 0) t = PDSeries(R2, L) - t;
        acc += t;
    }
    auto want = modp_normal_form(acc);
    auto got = logbar(u);
    EXPECT_EQ(got, want);
    // leading Acris coefficient at x is -1
    EXPECT_EQ(acris_normal_form(to_pdseries(got, 2)).terms.at(ev1(1, 0, 3)), c1(2));
    EXPECT_TRUE(map_M(got).is_zero());
}

TEST(SolveMPreimage, Cases) {
    auto F = GaloisRing::get(2, 2, 1);
    Coeffs b{1, 1};
    auto t2 = ModpBasisForm(F, 1, Space::Acris);
    t2.add_term(ev1(5, 1, 2), b);
    ModpBasisForm want(F, 1, Space::Nygaard);
    want.add_term(ev1(5, 1, 2), F->neg(b));
    EXPECT_EQ(solve_M_preimage(t2), want);

    auto t0 = ModpBasisForm(F, 1, Space::Acris);
    t0.add_term(ev1(1, 1, 2), b);
    ModpBasisForm want0(F, 1, Space::Nygaard);
    want0.add_term(ev1(1, 2, 2), F->sigma_inv(b));
    EXPECT_EQ(solve_M_preimage(t0), want0);

    auto t1 = ModpBasisForm(F, 1, Space::Acris);
    t1.add_term(ev1(1, 0, 2), b);
    auto x = solve_M_preimage(t1);
    EXPECT_EQ(map_M(x), t1);
    EXPECT_EQ(x.terms.size(), 2u);
    EXPECT_GE(floor_sum(x.terms.rbegin()->first), 2u);
}

TEST(SolveMPreimage, RandomTargets) {
    for (u64 p : {2, 3, 5}) {
        auto F = GaloisRing::get(p, 2, 1);
        Rng rng(11 * p);
        for (int it = 0; it < 100; ++it) {
            ModpBasisForm t(F, 2, Space::Acris);
            for (int k = 0; k < 6; ++k) {
                ExpVec a = ExpVec::zero(2);
                for (int i = 0; i < 2; ++i) a[i] = fe(rng.below(3 * p * p), 2, p);
                t.add_term(a, Coeffs{rng.below(p), rng.below(p)});
            }
            EXPECT_EQ(map_M(solve_M_preimage(t)), t);
        }
    }
}

TEST(SolveLogPreimage, Examples) {
    auto F = GaloisRing::get(2, 1, 1);
    ModpBasisForm z(F, 1, Space::Nygaard);
    EXPECT_TRUE(solve_log_preimage(z).factors.empty());

    auto a = form(F, Space::Nygaard, {{ev1(1, 0, 2), 1}, {ev1(2, 0, 2), 1}, {ev1(1, 1, 2), 1}});
    TateUnit u = solve_log_preimage(a);
    ASSERT_EQ(u.factors.size(), 1u);
    EXPECT_EQ(u.factors[0].a, ev1(1, 0, 2));
    EXPECT_EQ(logbar(u), a);
}

TEST(SolveLogPreimage, RandomKernelElementsAtThree) {
    auto F = GaloisRing::get(3, 1, 1);
    VarLayout L{0, 1};
    Rng rng(3);
    for (int it = 0; it < 10; ++it) {
        TateUnit u(F, L);
        for (int k = 0; k < 2; ++k) u.times(c1(1 + rng.below(2)), ev1(3 * 3 + rng.below(2 * 3 * 3), 2, 3));
        auto a = logbar(u);
        ASSERT_TRUE(map_M(a).is_zero());
        EXPECT_EQ(logbar(solve_log_preimage(a)), a);
    }
}

TEST(Exactness, SmallInstances) {
    struct Case {
        u64 p;
        int f, n, depth;
    };
    for (auto c : {Case{2, 1, 1, 3}, Case{3, 2, 1, 2}, Case{2, 1, 2, 2}}) {
        auto r = verify_syntomic_exactness(c.p, c.f, c.n, c.depth);
        EXPECT_TRUE(r.left_injective) << c.p << " " << r.counterexample.value_or("");
        EXPECT_TRUE(r.middle_exact) << c.p << " " << r.counterexample.value_or("");
        EXPECT_TRUE(r.right_surjective) << c.p << " " << r.counterexample.value_or("");
        EXPECT_GT(r.kernel_dim, 0);
        EXPECT_EQ(r.kernel_dim, r.generator_rank);
        EXPECT_GE(r.right_witnesses, r.window_monomials * c.f + 100);
    }
}

TEST(Etale, KernelAndPreimages) {
    for (u64 p : {2, 3}) {
        auto r = etale_sequence_check(p, 2, 2, 2 * p);
        EXPECT_TRUE(r.kernel_is_constants) << r.counterexample.value_or("");
        EXPECT_EQ(r.kernel_dim, 1);
        EXPECT_TRUE(r.preimages_ok) << r.counterexample.value_or("");
        EXPECT_EQ(r.preimages_checked, 20);
    }
    EXPECT_THROW(etale_sequence_check(3, 1, 2, 1), WindowTooSmall);
}

TEST(Etale, NonconstantNotFixed) {
    auto R = GaloisRing::get(3, 1, 1);
    VarLayout L{0, 1};
    auto x = PDSeries::basis(R, L, ev1(1, 0, 3), c1(1));
    EXPECT_FALSE((x.frobenius() - x).is_zero());
    auto one = PDSeries::one(R, L);
    EXPECT_TRUE((one.frobenius() - one).is_zero());
}
