#include <gtest/gtest.h>

#include "pcris/cech.hpp"

using namespace pcris;

namespace {

CechWindow make_window(u64 p, int D, int m_den, int N) {
    CechWindow w;
    w.p = p;
    w.D = D;
    w.m_den = m_den;
    w.t_bound = D;
    w.N = N;
    return w;
}

ExpVec mono(std::initializer_list<FracExp> xs) {
    ExpVec a = ExpVec::zero(static_cast<int>(xs.size()));
    int i = 0;
    for (auto& x : xs) a[i++] = x;
    return a;
}

PDSeries basis(const CechComplex& C, int m, const ExpVec& a, u64 c = 1) {
    return PDSeries::basis(C.ring(), C.layout(m), a, C.ring()->scalar(c));
}

// random sum of monomials at level m with total degree <= dmax
PDSeries random_element(const CechComplex& C, int m, int dmax, Rng& rng, int terms = 4) {
    u64 p = C.window().p;
    int den = C.window().m_den;
    u64 scale = ipow(p, den);
    PDSeries s(C.ring(), C.layout(m));
    for (int k = 0; k < terms; ++k) {
        u64 deg = rng.below(static_cast<u64>(dmax) * scale + 1);
        ExpVec a = ExpVec::zero(m + 1);
        u64 rem = deg;
        for (int i = 0; i < m; ++i) {
            u64 part = rng.below(rem + 1);
            a[i] = FracExp::make(part, den, p);
            rem -= part;
        }
        a[m] = FracExp::make(rem, den, p);
        s += basis(C, m, a, 1 + rng.below(C.ring()->prec().mod - 1));
    }
    return s;
}

// de Rham complex of F_p[x] truncated at degree D: d(x^k) = k x^{k-1} dx.
// Graded by the total degree where dx has degree 1, so x^k dx sits in degree k+1.
struct DeRham {
    std::vector<u64> h0_degrees, h1_degrees;
};

DeRham de_rham_oracle(u64 p, int D) {
    DeRham r;
    for (u64 k = 0; k <= static_cast<u64>(D); ++k) {
        if (2 * k > static_cast<u64>(D)) break;
        if (k % p == 0) r.h0_degrees.push_back(k);
        // x^{k-1} dx is exact iff k is prime to p
        if (k >= 1 && k % p == 0) r.h1_degrees.push_back(k);
    }
    return r;
}

}  // namespace

TEST(CechLevel, Layouts) {
    auto w = make_window(2, 4, 1, 1);
    auto L0 = build_level(0, w);
    EXPECT_EQ(L0.layout.plain, 1);
    EXPECT_EQ(L0.layout.pd, 0);
    EXPECT_EQ(build_level(1, w).layout.pd, 1);
    EXPECT_EQ(build_level(2, w).layout.pd, 2);
    w.t_bound = 3;
    EXPECT_THROW(CechComplex{w}, WindowTooSmall);
}

TEST(CechCoface, Examples) {
    for (u64 p : {2, 3, 5})
        for (int N : {1, 2, 3}) {
            CechComplex C(make_window(p, p * p, 1, N));
            auto one = FracExp::integer(1), zero = FracExp::integer(0);
            auto x = basis(C, 0, mono({one}));
            auto t = basis(C, 1, mono({zero, one}));
            // exact mod p; integrally [x + t] - x - t is a multiple of p
            auto diff = C.coface(0, 0, x) - C.coface(1, 0, x);
            EXPECT_EQ(diff.reduced(1), (-t).reduced(1)) << p << " " << N;
            auto corr = diff + t;
            for (auto& [a, c] : corr.terms()) EXPECT_GE(C.ring()->val(c), 1) << corr;
            auto c = PDSeries::one(C.ring(), C.layout(0));
            EXPECT_EQ(C.coface(0, 0, c), PDSeries::one(C.ring(), C.layout(1)));
            EXPECT_TRUE(C.differential(0, c).is_zero());

            // x^{1/p} -> x^{1/p} + t^{1/p} modulo p
            auto r = FracExp::make(1, 1, p);
            auto xr = basis(C, 0, mono({r}));
            auto img = C.coface(1, 0, xr).reduced(1);
            auto R1 = C.ring()->at_precision(1);
            PDSeries want(R1, C.layout(1));
            want.add_term(mono({r, zero}), R1->one());
            want.add_term(mono({zero, r}), R1->one());
            EXPECT_EQ(img, want);
        }
}

TEST(CechCoface, SquareDiesModTwo) {
    CechComplex C(make_window(2, 4, 1, 1));
    auto x2 = basis(C, 0, mono({FracExp::integer(2)}));
    EXPECT_TRUE(C.differential(0, x2).is_zero());
    // but not integrally: t^2 = 2 t^{[2]}
    CechComplex C2(make_window(2, 4, 1, 2));
    EXPECT_FALSE(C2.differential(0, basis(C2, 0, mono({FracExp::integer(2)}))).is_zero());
}

TEST(CechCoface, RingHomomorphism) {
    for (u64 p : {2, 3})
        for (int N : {1, 2}) {
            CechComplex C(make_window(p, p * p, 1, N));
            Rng rng(100 + p * 10 + N);
            for (int m : {0, 1})
                for (int trial = 0; trial < 6; ++trial) {
                    auto a = random_element(C, m, 2, rng, 2);
                    auto b = random_element(C, m, 2, rng, 2);
                    for (int j = 0; j <= m + 1; ++j)
                        EXPECT_EQ(C.coface(j, m, a * b), C.coface(j, m, a) * C.coface(j, m, b))
                            << "p=" << p << " N=" << N << " m=" << m << " j=" << j;
                }
        }
}

TEST(CechCoface, CosimplicialIdentities) {
    for (u64 p : {2, 3})
        for (int N : {1, 2}) {
            CechComplex C(make_window(p, p * p, 1, N));
            Rng rng(7 + p + N);
            for (int m : {0, 1})
                for (int trial = 0; trial < 5; ++trial) {
                    auto a = random_element(C, m, 2, rng, 3);
                    for (int k = 1; k <= m + 2; ++k)
                        for (int j = 0; j < k; ++j)
                            EXPECT_EQ(C.coface(k, m + 1, C.coface(j, m, a)), C.coface(j, m + 1, C.coface(k - 1, m, a)))
                                << "p=" << p << " N=" << N << " m=" << m << " j=" << j << " k=" << k;
                }
        }
}

TEST(CechCoface, FrobeniusNaturality) {
    for (u64 p : {2, 3})
        for (int N : {1, 2}) {
            CechComplex C(make_window(p, p * p, 2, N));
            Rng rng(31 + p + N);
            for (int m : {0, 1})
                for (int trial = 0; trial < 5; ++trial) {
                    auto a = random_element(C, m, 1, rng, 2);
                    for (int j = 0; j <= m + 1; ++j)
                        EXPECT_EQ(C.coface(j, m, a).frobenius(), C.coface(j, m, a.frobenius()));
                }
        }
}

TEST(CechDifferential, SquaresToZero) {
    for (u64 p : {2, 3})
        for (int N : {1, 2}) {
            CechComplex C(make_window(p, p * p, 1, N));
            Rng rng(5 + p * N);
            for (int m : {0, 1})
                for (int trial = 0; trial < 20; ++trial) {
                    auto a = random_element(C, m, (p * p) / 2, rng);
                    EXPECT_TRUE(C.differential(m + 1, C.differential(m, a)).is_zero());
                }
        }
}

TEST(CechDifferential, BlockMatchesElementwise) {
    CechComplex C(make_window(3, 9, 1, 2));
    auto d = FracExp::make(7, 1, 3);
    auto b = C.block(0, d);
    ASSERT_EQ(b.source.size(), 1u);
    auto img = C.differential(0, basis(C, 0, b.source[0]));
    for (int i = 0; i < b.matrix.rows(); ++i) EXPECT_EQ(b.matrix(i, 0), img.coeff(b.target[i])[0]);
}

TEST(CechCohomology, InteriorBasis) {
    {
        CechComplex C(make_window(2, 4, 1, 1));
        auto h = C.cohomology();
        std::vector<u64> got;
        for (auto& g : h.degrees)
            if (g.interior)
                for (auto& b : g.h0_basis) {
                    ASSERT_EQ(b.size(), 1u);
                    got.push_back(b.terms().begin()->first[0].floor());
                }
        EXPECT_EQ(got, (std::vector<u64>{0, 2}));
    }
    {
        CechComplex C(make_window(3, 9, 1, 1));
        auto h = C.cohomology();
        std::vector<u64> got;
        for (auto& g : h.degrees)
            if (g.interior)
                for (auto& b : g.h0_basis) got.push_back(b.terms().begin()->first[0].floor());
        EXPECT_EQ(got, (std::vector<u64>{0, 3}));
    }
}

TEST(CechCohomology, MatchesDeRham) {
    for (u64 p : {2, 3})
        for (int md : {0, 1, 2}) {
            int D = static_cast<int>(p * p);
            CechComplex C(make_window(p, D, md, 1));
            auto h = C.cohomology();
            auto dr = de_rham_oracle(p, D);
            std::vector<u64> h0, h1;
            for (auto& g : h.degrees) {
                if (!g.interior) continue;
                // fractional degrees carry no cohomology
                if (!g.degree.is_integer()) {
                    EXPECT_EQ(g.h0, 0);
                    EXPECT_EQ(g.h1, 0);
                    continue;
                }
                ASSERT_LE(g.h0, 1);
                ASSERT_LE(g.h1, 1);
                if (g.h0) h0.push_back(g.degree.floor());
                if (g.h1) h1.push_back(g.degree.floor());
            }
            EXPECT_EQ(h0, dr.h0_degrees) << "p=" << p << " m_den=" << md;
            // H^1 in degree k is x^{k-1}dx; degree 0 never contributes
            EXPECT_EQ(h1, dr.h1_degrees) << "p=" << p << " m_den=" << md;
            EXPECT_EQ(h.h0_interior, static_cast<int>(dr.h0_degrees.size()));
            EXPECT_EQ(h.h1_interior, static_cast<int>(dr.h1_degrees.size()));
        }
}

TEST(CechCohomology, IntegralReport) {
    CechComplex C(make_window(2, 4, 1, 2));
    auto h = C.cohomology();
    ASSERT_FALSE(h.degrees.empty());
    EXPECT_EQ(h.degrees[0].h0, 1);
}
