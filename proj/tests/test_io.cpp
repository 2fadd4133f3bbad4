#include <gtest/gtest.h>

#include "pcris/io.hpp"

using namespace pcris;

namespace {

FCrystal random_crystal(Rng& rng) {
    static const u64 primes[] = {2, 3, 5, 7, 11};
    u64 p = primes[rng.below(5)];
    int f = 1 + static_cast<int>(rng.below(3));
    int N = 1 + static_cast<int>(rng.below(5));
    int r = static_cast<int>(rng.below(5));
    auto Rg = GaloisRing::get(p, f, N + 1);
    CMat phi(r, CVec(r));
    for (auto& row : phi)
        for (auto& c : row) {
            c = Rg->zero();
            for (auto& x : c) x = rng.below(Rg->prec().mod);
        }
    std::string label = "doc-" + std::to_string(rng.below(1000));
    if (rng.below(4) == 0) label += " \"quoted\" \\ path";
    return FCrystal::guarded(Rg, phi, label);
}

json valid_doc() {
    return json::parse(R"({"format":"pcris-crystal","version":1,"p":3,"f":2,"N":2,"rank":2,"label":"x",
        "phi":[["0,0","-3,0"],["1,0","0,1"]]})");
}

}  // namespace

TEST(CrystalDoc, RoundTripRandom) {
    Rng rng(2024);
    for (int i = 0; i < 100; ++i) {
        auto X = random_crystal(rng);
        std::string s = write_crystal(X);
        auto Y = read_crystal(s);
        EXPECT_EQ(X, Y) << s;
        EXPECT_EQ(write_crystal(Y), s);
        EXPECT_EQ(to_doc(Y), to_doc(X));
    }
}

TEST(CrystalDoc, GuardDigitSurvives) {
    // -p over Z/p^N is canonically p^N - p, which is not -p mod p^{N+1}
    auto R = GaloisRing::get(3, 1, 2);
    auto X = supersingular_h1(R);
    auto Y = read_crystal(write_crystal(X));
    EXPECT_EQ(X.guard_phi(), Y.guard_phi());
    EXPECT_EQ(fppf_groups(X).free_rank, fppf_groups(Y).free_rank);
}

TEST(CrystalDoc, SignedAndBareEntries) {
    auto X = from_doc(doc_from_json(valid_doc()));
    EXPECT_EQ(X.guard_phi()[0][1], (Coeffs{24, 0}));  // -3 mod 27
    auto j = json::parse(R"({"format":"pcris-crystal","version":1,"p":5,"f":1,"N":1,"rank":1,"phi":[[-5]]})");
    auto Y = from_doc(doc_from_json(j));
    EXPECT_EQ(Y.guard_phi()[0][0], (Coeffs{20}));
    EXPECT_EQ(Y.label(), "");
}

TEST(CrystalDoc, SchemaErrors) {
    auto bad = [](auto mutate) {
        json j = valid_doc();
        mutate(j);
        return j;
    };
    std::vector<json> cases = {
        bad([](json& j) { j.erase("p"); }),
        bad([](json& j) { j["p"] = 4; }),
        bad([](json& j) { j["p"] = "3"; }),
        bad([](json& j) { j["f"] = 0; }),
        bad([](json& j) { j["N"] = 0; }),
        bad([](json& j) { j["N"] = 40; }),
        bad([](json& j) { j["rank"] = 3; }),
        bad([](json& j) { j["phi"][0][0] = "1"; }),
        bad([](json& j) { j["phi"][0][0] = "1,x"; }),
        bad([](json& j) { j["phi"][0][0] = "1,,2"; }),
        bad([](json& j) { j["phi"][1] = json::array({"1,0"}); }),
        bad([](json& j) { j["phi"][1][1] = 1.5; }),
        bad([](json& j) { j["format"] = "other"; }),
        bad([](json& j) { j["version"] = 2; }),
        bad([](json& j) { j["extra"] = 1; }),
        bad([](json& j) { j["label"] = 7; }),
        json::array(),
    };
    for (auto& j : cases) EXPECT_THROW(doc_from_json(j), SchemaError) << j.dump();
    EXPECT_THROW(read_crystal("{not json"), SchemaError);
}

TEST(RunReport, StatusAndTimings) {
    RunReport r;
    r.command = "demo";
    r.check("a", true, {{"x", 1}});
    r.timings.push_back({"a", 0.123456});
    EXPECT_TRUE(r.ok());
    auto j = r.to_json();
    EXPECT_EQ(j["status"], "pass");
    EXPECT_TRUE(j.contains("timings_s"));
    EXPECT_FALSE(r.to_json(false).contains("timings_s"));
    r.check("b", false);
    EXPECT_EQ(r.to_json()["status"], "fail");
    EXPECT_EQ(r.to_json()["checks"][1]["status"], "fail");
}
