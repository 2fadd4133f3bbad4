#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>

#include "pcris/io.hpp"

using namespace pcris;

namespace {

struct Proc {
    std::string out;
    int status = -1;
};

Proc run(const std::string& args, const std::string& env = "") {
    Proc p;
    std::string cmd = env + (env.empty() ? "" : " ") + PCRIS_CLI_PATH + " " + args + " 2>/dev/null";
    FILE* f = popen(cmd.c_str(), "r");
    if (!f) return p;
    std::array<char, 4096> buf;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) p.out.append(buf.data(), n);
    int st = pclose(f);
    p.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return p;
}

json run_json(const std::string& args, int expect_status = 0, const std::string& env = "") {
    auto p = run(args, env);
    EXPECT_EQ(p.status, expect_status) << args << "\n" << p.out;
    return json::parse(p.out);
}

}  // namespace

TEST(Cli, Teich) {
    auto j = run_json("teich --p 5 --N 3 --a 2");
    EXPECT_EQ(j["witnesses"]["value"], 57);
    EXPECT_EQ(j["status"], "pass");
    EXPECT_EQ(run_json("teich --p 3 --N 2 --a 2")["witnesses"]["value"], 8);
}

TEST(Cli, PrecisionFromEnvironment) {
    auto j = run_json("teich --p 5 --a 2", 0, "PCRIS_DEFAULT_N=3");
    EXPECT_EQ(j["config"]["N"], 3);
    EXPECT_EQ(j["witnesses"]["value"], 57);
    EXPECT_EQ(run_json("teich --p 5 --a 2", 0, "PCRIS_DEFAULT_N=1")["witnesses"]["value"], 2);
    // an explicit flag wins over the environment
    EXPECT_EQ(run_json("teich --p 5 --N 3 --a 2", 0, "PCRIS_DEFAULT_N=1")["witnesses"]["value"], 57);
    EXPECT_EQ(run("teich --p 5 --a 2", "PCRIS_DEFAULT_N=zero").status, 2);
}

TEST(Cli, AcrisExact) {
    auto j = run_json("acris-exact --p 2 --f 1 --vars 1 --depth 3");
    EXPECT_EQ(j["status"], "pass");
    EXPECT_EQ(j["checks"].size(), 3u);
}

TEST(Cli, AcrisLogAndInf) {
    EXPECT_EQ(run_json("acris-log --p 3 --N 2 --unit 1:1 --unit 2:4/3")["status"], "pass");
    EXPECT_EQ(run_json("acris-inf --p 2 --N 2 --depth 2")["status"], "pass");
    EXPECT_EQ(run("acris-log --p 3 --unit 1:1/3").status, 2);
    EXPECT_EQ(run("acris-log --p 3 --unit 1:1/2").status, 2);
}

TEST(Cli, OrdinaryFppfRanks) {
    auto j = run_json("fcrystal-fppf --preset ordinary-av --g 2");
    std::vector<int> ranks;
    for (auto& d : j["witnesses"]["degrees"]) ranks.push_back(d["free_rank"]);
    EXPECT_EQ(ranks, (std::vector<int>{0, 2, 4, 2, 0, 0}));
    EXPECT_EQ(j["status"], "pass");
}

TEST(Cli, SupersingularAndBrauer) {
    auto j = run_json("fcrystal-fppf --preset supersingular-exe --p 3");
    EXPECT_EQ(j["witnesses"]["degrees"][2]["free_rank"], 6);
    EXPECT_EQ(j["witnesses"]["degrees"][3]["unipotent_a"], 1);
    auto b = run_json("fcrystal-brauer --preset supersingular-exe --p 3");
    EXPECT_EQ(b["witnesses"]["a"], 0);
    EXPECT_EQ(run("fcrystal-brauer --preset ordinary-av --g 2").status, 2);
    EXPECT_EQ(run_json("fcrystal-brauer --preset ordinary-av --g 2 --ns 1")["witnesses"]["a"], 3);
}

TEST(Cli, SlopeModulePreset) {
    auto j = run_json("fcrystal-slopes --preset slope-module 3 2 --p 3");
    EXPECT_EQ(j["witnesses"]["newton_polygons"][0]["slopes"][0]["slope"], "2/3");
    auto k = run_json("fcrystal-slopes --preset slope-module --r 2 --s 1 --p 2");
    EXPECT_EQ(k["witnesses"]["newton_polygons"][0]["slopes"][0]["slope"], "1/2");
}

TEST(Cli, DocumentPipeline) {
    std::string path = ::testing::TempDir() + "pcris_h1.json";
    ASSERT_EQ(run("fcrystal-new --preset supersingular-exe --p 5 --degree 1 --out " + path).status, 0);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    auto X = read_crystal(text);
    EXPECT_EQ(X.rank(), 4);
    auto j = run_json("fcrystal-slopes --in " + path);
    EXPECT_EQ(j["witnesses"]["newton_polygons"][0]["slopes"][0]["slope"], "1/2");
    auto f = run_json("fcrystal-fppf --in " + path + " --degree 1");
    EXPECT_EQ(f["witnesses"]["degrees"][1]["free_rank"], 0);
}

TEST(Cli, CechH) {
    auto j = run_json("cech-h --p 2 --D 4");
    EXPECT_EQ(j["witnesses"]["H0_interior_basis"], json::parse(R"j(["1*e(0)", "1*e(2)"])j"));
    EXPECT_EQ(j["witnesses"]["H1_interior_dim"], 1);
    EXPECT_EQ(run("cech-h --p 2 --D 4 --t-bound 3").status, 2);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("").status, 2);
    EXPECT_EQ(run("nonsense").status, 2);
    EXPECT_EQ(run("teich --p 4").status, 2);
    EXPECT_EQ(run("teich --q 5").status, 2);
    EXPECT_EQ(run("fcrystal-slopes").status, 2);
    EXPECT_EQ(run("fcrystal-slopes --preset nothing").status, 2);
    EXPECT_EQ(run("selftest --level medium").status, 2);
    EXPECT_EQ(run("--help").status, 0);
}

TEST(Cli, MalformedDocument) {
    std::string path = ::testing::TempDir() + "pcris_bad.json";
    std::ofstream(path) << R"({"format":"pcris-crystal","version":1,"p":3,"f":1,"N":2,"rank":2,"phi":[["1","0"]]})";
    auto p = run("fcrystal-slopes --in " + path);
    EXPECT_EQ(p.status, 2);
    EXPECT_TRUE(p.out.empty());
}

TEST(Cli, SelftestSubset) {
    auto a = run("selftest --only 1 7 --no-timings");
    auto b = run("selftest --only 1 7 --no-timings");
    EXPECT_EQ(a.status, 0);
    EXPECT_EQ(a.out, b.out);
    auto j = json::parse(a.out);
    EXPECT_EQ(j["checks"].size(), 2u);
    EXPECT_FALSE(j.contains("timings_s"));
}
