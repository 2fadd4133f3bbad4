// pcris: command-line front end.  Every command prints one JSON report on
// stdout; exit status is 0 on success, 1 when a check fails, 2 on bad usage.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "pcris/selftest.hpp"

using namespace pcris;

namespace {

constexpr int kExitOk = 0, kExitCheck = 1, kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int default_precision() {
    const char* env = std::getenv("PCRIS_DEFAULT_N");
    if (!env || !*env) return 3;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (*end || v < 1 || v > 60) throw UsageError(std::string("PCRIS_DEFAULT_N must be an integer in [1, 60], got \"") + env + "\"");
    return static_cast<int>(v);
}

Coeffs parse_coeffs(const GaloisRing& R, const std::string& s) {
    std::vector<i64> xs;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            size_t used = 0;
            xs.push_back(std::stoll(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError("\"" + s + "\" is not a comma-separated list of integers");
        }
    }
    if (static_cast<int>(xs.size()) > R.degree() || xs.empty()) throw UsageError("expected at most " + std::to_string(R.degree()) + " coefficients in \"" + s + "\"");
    Coeffs c = R.zero();
    for (size_t i = 0; i < xs.size(); ++i) c[i] = R.prec().from_signed(xs[i]);
    return c;
}

// "k" or "k/d" with d a power of p
FracExp parse_exponent(const std::string& s, u64 p) {
    auto slash = s.find('/');
    try {
        u64 num = std::stoull(s.substr(0, slash));
        if (slash == std::string::npos) return FracExp::integer(num);
        u64 den = std::stoull(s.substr(slash + 1));
        int e = 0;
        u64 d = den;
        while (d % p == 0) d /= p, ++e;
        if (d != 1 || den == 0) throw UsageError("exponent denominator " + std::to_string(den) + " is not a power of p");
        return FracExp::make(num, e, p);
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("bad exponent \"" + s + "\"");
    }
}

std::string read_input(const std::string& path) {
    if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct Common {
    u64 p = 2;
    int f = 1;
    int N = 3;
    u64 seed = 1;
    bool no_timings = false;
};

struct CrystalSource {
    std::vector<std::string> preset;  // name, then optional r s for slope-module
    int g = 1, r = 1, s = 0;
    std::string in;
    int degree = -1;
    int levels = 3;
    int ns = -1;
};

struct Crystals {
    std::string name;
    std::vector<FCrystal> by_degree;  // index = degree when from a preset
    int first_degree = 0;
};

Crystals load_crystals(const Common& c, const CrystalSource& src) {
    Crystals out;
    if (!src.in.empty()) {
        if (!src.preset.empty()) throw UsageError("give either --in or --preset, not both");
        out.name = "document";
        out.by_degree.push_back(read_crystal(read_input(src.in)));
        out.first_degree = src.degree < 0 ? 1 : src.degree;
        return out;
    }
    if (src.preset.empty()) throw UsageError("a crystal is required: --preset NAME or --in FILE");
    auto R = GaloisRing::get(c.p, c.f, c.N);
    const std::string& name = src.preset[0];
    out.name = name;
    if (name == "ordinary-av") {
        if (src.preset.size() > 1) throw UsageError("ordinary-av takes its dimension from --g");
        if (src.g < 1 || src.g > 4) throw UsageError("--g must lie in [1, 4]");
        out.by_degree = ordinary_av(src.g, R);
    } else if (name == "supersingular-exe") {
        if (src.preset.size() > 1) throw UsageError("supersingular-exe takes no arguments");
        out.by_degree = supersingular_exe(R);
    } else if (name == "slope-module") {
        int r = src.r, s = src.s;
        if (src.preset.size() == 3) {
            try {
                r = std::stoi(src.preset[1]);
                s = std::stoi(src.preset[2]);
            } catch (const std::exception&) {
                throw UsageError("slope-module expects two integers r s");
            }
        } else if (src.preset.size() != 1) {
            throw UsageError("slope-module expects two integers r s");
        }
        out.name = "slope-module " + std::to_string(r) + " " + std::to_string(s);
        out.by_degree = {standard_slope_module(r, s, R)};
        out.first_degree = 1;
    } else {
        throw UsageError("unknown preset \"" + name + "\" (ordinary-av, supersingular-exe, slope-module)");
    }
    return out;
}

const FCrystal& pick_degree(const Crystals& cs, int degree) {
    if (cs.by_degree.size() == 1 && degree < 0) return cs.by_degree[0];
    int d = degree < 0 ? 1 : degree;
    int idx = d - cs.first_degree;
    if (idx < 0 || idx >= static_cast<int>(cs.by_degree.size()))
        throw UsageError("degree " + std::to_string(d) + " is not available for " + cs.name);
    return cs.by_degree[idx];
}

json crystal_config(const Common& c, const CrystalSource& src, const Crystals& cs) {
    json j{{"crystal", cs.name}};
    if (src.in.empty()) j.update({{"p", c.p}, {"f", c.f}, {"N", c.N}});
    if (cs.name == "ordinary-av") j["g"] = src.g;
    return j;
}

void add_common(CLI::App* sub, Common& c, bool with_field = true) {
    if (with_field) {
        sub->add_option("--p", c.p, "prime")->capture_default_str();
        sub->add_option("--f", c.f, "residue degree")->capture_default_str();
        sub->add_option("--N", c.N, "precision (default from PCRIS_DEFAULT_N, else 3)")->capture_default_str();
    }
    sub->add_option("--seed", c.seed, "seed for sampled checks")->capture_default_str();
    sub->add_flag("--no-timings", c.no_timings, "omit the timings block");
}

void add_crystal_source(CLI::App* sub, CrystalSource& s) {
    sub->add_option("--preset", s.preset, "ordinary-av | supersingular-exe | slope-module r s")->expected(1, 3);
    sub->add_option("--g", s.g, "dimension for ordinary-av")->capture_default_str();
    sub->add_option("--r", s.r, "rank for slope-module")->capture_default_str();
    sub->add_option("--s", s.s, "Frobenius exponent for slope-module")->capture_default_str();
    sub->add_option("--in", s.in, "crystal document (JSON), '-' for stdin");
    sub->add_option("--degree", s.degree, "cohomological degree of the crystal");
}

// -- commands ---------------------------------------------------------------

RunReport cmd_field(const Common& c) {
    RunReport rep;
    auto fd = make_field(c.p, c.f);
    auto R = GaloisRing::get(fd, c.N);
    rep.config = {{"p", c.p}, {"f", c.f}, {"N", c.N}};
    rep.witnesses["modulus"] = fd.minpoly_string();
    rep.witnesses["modulus_coeffs"] = fd.minpoly;
    rep.witnesses["order"] = std::to_string(ipow(c.p, c.f));
    // sigma has order f and reduces to x -> x^p
    Coeffs t = R->zero();
    if (c.f > 1) t[1] = 1; else t[0] = 2 % R->prec().mod;
    Coeffs s = t;
    for (int i = 0; i < c.f; ++i) s = R->sigma(s);
    auto F = R->at_precision(1);
    rep.check("sigma^f = id", s == t);
    rep.check("sigma lifts x^p", F->reduce(R->sigma(t)) == F->pow(F->reduce(t), c.p));
    return rep;
}

RunReport cmd_teich(const Common& c, const std::string& a) {
    RunReport rep;
    auto fd = make_field(c.p, c.f);
    auto F = GaloisRing::get(fd, 1);
    Coeffs res = parse_coeffs(*F, a);
    auto t = teichmuller(fd, c.N, res);
    auto R = t.ring();
    rep.config = {{"p", c.p}, {"f", c.f}, {"N", c.N}, {"a", a}};
    if (c.f == 1)
        rep.witnesses["value"] = t.coeffs()[0];
    else
        rep.witnesses["value"] = t.to_string();
    rep.witnesses["coeffs"] = t.coeffs();
    u64 q = ipow(c.p, c.f);
    rep.check("fixed by x^q", t.pow(q) == t);
    rep.check("reduces to a", F->reduce(t.coeffs()) == res);
    return rep;
}

RunReport cmd_acris_exact(const Common& c, int vars, int depth, int samples) {
    RunReport rep;
    SyntomicConfig sc;
    sc.samples = samples;
    sc.seed = c.seed;
    auto r = verify_syntomic_exactness(c.p, c.f, vars, depth, sc);
    rep.config = {{"p", c.p}, {"f", c.f}, {"vars", vars}, {"depth", depth}, {"samples", samples}};
    rep.check("left injective", r.left_injective, {{"leading_term_checks", r.leading_term_checks}});
    rep.check("middle exact", r.middle_exact, {{"kernel_dim", r.kernel_dim}, {"generator_rank", r.generator_rank}, {"log_witnesses", r.log_witnesses}});
    rep.check("right surjective", r.right_surjective, {{"right_witnesses", r.right_witnesses}});
    rep.witnesses["window_monomials"] = r.window_monomials;
    rep.witnesses["generator_count"] = r.generator_count;
    if (r.counterexample) rep.witnesses["counterexample"] = *r.counterexample;
    return rep;
}

RunReport cmd_acris_log(const Common& c, const std::vector<std::string>& units) {
    RunReport rep;
    auto R = GaloisRing::get(c.p, c.f, c.N);
    VarLayout L{0, 1};
    TateUnit u(R, L);
    json fs = json::array();
    for (auto& factor : units) {
        auto colon = factor.find(':');
        if (colon == std::string::npos) throw UsageError("unit factor \"" + factor + "\" must look like c:exponent");
        Coeffs cf = parse_coeffs(*R->at_precision(1), factor.substr(0, colon));
        FracExp e = parse_exponent(factor.substr(colon + 1), c.p);
        if (e.floor() < 1) throw UsageError("factor 1 + c x^a needs a >= 1 to lie in 1 + J");
        u.times(cf, ExpVec::unit(1, 0, e));
        fs.push_back(factor);
    }
    rep.config = {{"p", c.p}, {"f", c.f}, {"N", c.N}, {"unit", fs}};
    // one extra digit so the divided Frobenius is exact mod p^N
    auto lg = pd_log_unit(u, c.N + 1);
    auto l = lg.reduced(c.N);
    rep.witnesses["log"] = l.to_string();
    rep.witnesses["terms"] = l.size();
    rep.check("in Nygaard ideal", l.nygaard_coefficient_test());
    rep.check("F/p - 1 kills log", f_over_p_minus_1(lg).reduced(c.N).is_zero());
    return rep;
}

RunReport cmd_acris_inf(const Common& c, int depth, u64 bound, int nmax) {
    RunReport rep;
    AcrisWindow w;
    w.p = c.p;
    w.f = c.f;
    w.depth = depth;
    w.bound = bound;
    w.max_depth = std::max(8, depth + nmax);
    auto fi = frobenius_intersection(w, c.N, nmax);
    rep.config = {{"p", c.p}, {"f", c.f}, {"N", c.N}, {"depth", depth}, {"bound", bound}, {"n_max", nmax}};
    rep.witnesses["window_monomials"] = fi.monomials.size();
    rep.witnesses["intersection_generators"] = fi.intersection.basis().size();
    rep.witnesses["ainf_generators"] = fi.ainf.basis().size();
    rep.check("intersection equals Ainf", fi.equal);
    return rep;
}

RunReport cmd_fcrystal_slopes(const Common& c, const CrystalSource& src) {
    RunReport rep;
    auto cs = load_crystals(c, src);
    rep.config = crystal_config(c, src, cs);
    json per = json::array();
    bool determined = true;
    for (size_t i = 0; i < cs.by_degree.size(); ++i) {
        int degree = static_cast<int>(i) + cs.first_degree;
        if (src.degree >= 0 && degree != src.degree) continue;
        json d{{"degree", degree}, {"rank", cs.by_degree[i].rank()}};
        if (cs.by_degree[i].rank() > 0) {
            // presets have exact integer entries and can be rebuilt at higher precision;
            // a document is only known to its stated precision
            std::optional<NewtonPolygon> np;
            int used = c.N;
            for (int N2 = c.N; !np && Prec::fits(c.p, N2 + 1) && N2 <= c.N + 12; ++N2) {
                try {
                    if (N2 == c.N) {
                        np = newton_polygon(cs.by_degree[i]);
                    } else {
                        Common c2 = c;
                        c2.N = N2;
                        np = newton_polygon(load_crystals(c2, src).by_degree[i]);
                    }
                    used = N2;
                } catch (const PrecisionInsufficient& e) {
                    if (!src.in.empty()) {
                        d["error"] = e.what();
                        break;
                    }
                }
            }
            if (np) {
                d["slopes"] = to_json(*np);
                d["precision_used"] = used;
            } else {
                determined = false;
            }
        }
        per.push_back(d);
    }
    rep.witnesses["newton_polygons"] = per;
    rep.check("polygons determined", determined);
    return rep;
}

RunReport cmd_fcrystal_fppf(const Common& c, const CrystalSource& src) {
    RunReport rep;
    auto cs = load_crystals(c, src);
    rep.config = crystal_config(c, src, cs);
    rep.config["tower_levels"] = src.levels;
    std::vector<FCrystal> degs = cs.by_degree;
    int shift = cs.first_degree;
    if (shift > 0) {
        // a lone crystal is padded with zero crystals below it
        auto R = degs[0].ring();
        std::vector<FCrystal> padded;
        for (int i = 0; i < shift; ++i) padded.push_back(FCrystal(R, {}));
        for (auto& x : degs) padded.push_back(x);
        degs = padded;
    }
    auto ds = fppf_cohomology(degs, src.levels);
    json out = json::array();
    bool stable = true;
    for (auto& d : ds) {
        out.push_back(to_json(d));
        stable = stable && d.stable;
    }
    rep.witnesses["degrees"] = out;
    rep.check("tower stabilized", stable);
    if (cs.name == "ordinary-av") {
        bool ok = true;
        json ranks = json::array();
        for (auto& d : ds) {
            int want = src.g * selftest_detail::binom(src.g, d.degree - 1);
            ranks.push_back(d.free_rank);
            ok = ok && d.free_rank == want && d.finite_torsion.empty() && d.unipotent_a == 0;
        }
        rep.check("free rank g*binom(g,i-1), no torsion", ok, {{"free_ranks", ranks}});
    } else if (cs.name == "supersingular-exe") {
        rep.check("H1 vanishes", ds[1].free_rank == 0 && ds[1].finite_torsion.empty() && ds[1].unipotent_a == 0);
        rep.check("H2 free rank 6", ds[2].free_rank == 6, {{"free_rank", ds[2].free_rank}, {"flagged_alternative", 2}});
        rep.check("H3 unipotent G_a", ds[3].unipotent_a == 1 && ds[3].unipotent_exponent == 1,
                  {{"a", ds[3].unipotent_a}, {"exponent", ds[3].unipotent_exponent}});
    }
    return rep;
}

RunReport cmd_fcrystal_brauer(const Common& c, const CrystalSource& src) {
    RunReport rep;
    auto cs = load_crystals(c, src);
    if (cs.by_degree.size() < 3) throw UsageError("fcrystal-brauer needs a preset with crystals in degrees 0..2 at least");
    int ns = src.ns;
    if (ns < 0) {
        if (cs.name != "supersingular-exe") throw UsageError("--ns (Neron-Severi rank) is required for this preset");
        ns = 6;
    }
    rep.config = crystal_config(c, src, cs);
    rep.config["ns_rank"] = ns;
    auto ds = fppf_cohomology(cs.by_degree, src.levels);
    auto b = brauer_profile(ds[2], ds[3], ns);
    rep.witnesses["H2_free_rank"] = ds[2].free_rank;
    rep.witnesses["a"] = b.a;
    rep.witnesses["exponent_bound"] = b.exponent_bound;
    rep.witnesses["H3_unipotent_a"] = ds[3].unipotent_a;
    rep.check("corank nonnegative", !b.negative_divisible_rank, {{"a", b.a}});
    return rep;
}

RunReport cmd_cech_h(const Common& c, int D, int m_den, int t_bound, int N) {
    RunReport rep;
    CechWindow w;
    w.p = c.p;
    w.D = D;
    w.m_den = m_den;
    w.t_bound = t_bound < 0 ? D : t_bound;
    w.N = N;
    CechComplex C(w);
    auto h = C.cohomology();
    rep.config = {{"p", c.p}, {"D", D}, {"m_den", m_den}, {"t_bound", w.t_bound}, {"N", N}};
    json degs = json::array();
    json h0 = json::array();
    for (auto& d : h.degrees) {
        if (!d.h0 && !d.h1) continue;
        json j{{"degree", d.degree.to_string()}, {"interior", d.interior}, {"H0", d.h0}};
        if (N == 1) j["H1"] = d.h1;
        json b = json::array();
        for (auto& s : d.h0_basis) b.push_back(s.to_string());
        j["H0_basis"] = b;
        degs.push_back(j);
        if (d.interior)
            for (auto& s : d.h0_basis) h0.push_back(s.to_string());
    }
    rep.witnesses["degrees"] = degs;
    rep.witnesses["H0_interior_basis"] = h0;
    rep.witnesses["H0_interior_dim"] = h.h0_interior;
    if (N == 1) rep.witnesses["H1_interior_dim"] = h.h1_interior;
    // d o d on the basis of each interior degree
    bool dd = true;
    for (auto& d : C.degrees()) {
        if (!w.interior(d)) continue;
        for (auto& a : graded_monomials(c.p, 0, m_den, d)) {
            auto x = PDSeries::basis(C.ring(), C.layout(0), a, C.ring()->one());
            dd = dd && C.differential(1, C.differential(0, x)).is_zero();
        }
    }
    rep.check("d o d = 0 on interior", dd);
    return rep;
}

int emit(RunReport rep, const std::string& command, const Common& c, std::chrono::steady_clock::time_point t0) {
    rep.command = command;
    rep.seed = c.seed;
    rep.timings.push_back({"total", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    std::cout << rep.to_json(!c.no_timings).dump(2) << "\n";
    return rep.ok() ? kExitOk : kExitCheck;
}

int usage_failure(const std::string& msg) {
    std::cerr << json{{"error", "usage"}, {"message", msg}}.dump() << "\n";
    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-adic crystalline toolkit: Galois rings, Acris, F-crystals, fppf cohomology"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    int defN = 3;
    try {
        defN = default_precision();
    } catch (const UsageError& e) {
        return usage_failure(e.what());
    }

    Common c;
    c.N = defN;
    std::string teich_a = "1";
    int vars = 1, depth = 3, samples = 100;
    std::vector<std::string> units{"1:1"};
    int inf_depth = 3, nmax = 3;
    u64 bound = 0;
    CrystalSource src;
    int cech_D = 4, cech_den = 1, cech_t = -1, cech_N = 1;
    std::string level = "quick";
    std::vector<int> only;
    std::string out_path;

    auto* field = app.add_subcommand("field", "residue field, modulus and sigma of GR(p^N, f)");
    add_common(field, c);
    auto* teich = app.add_subcommand("teich", "Teichmuller representative of a residue-field element");
    add_common(teich, c);
    teich->add_option("--a", teich_a, "residue coefficients c0,c1,...")->capture_default_str();
    auto* exact = app.add_subcommand("acris-exact", "exactness of the syntomic sequence on a window");
    add_common(exact, c);
    exact->add_option("--vars", vars, "number of variables")->capture_default_str();
    exact->add_option("--depth", depth, "denominator depth")->capture_default_str();
    exact->add_option("--samples", samples, "random elements per check")->capture_default_str();
    auto* alog = app.add_subcommand("acris-log", "logarithm of a Tate unit in Acris");
    add_common(alog, c);
    alog->add_option("--unit", units, "factors c:a of the unit prod (1 + c x^a)");
    auto* ainf = app.add_subcommand("acris-inf", "intersection of Frobenius images against Ainf");
    add_common(ainf, c);
    ainf->add_option("--depth", inf_depth, "window depth")->capture_default_str();
    ainf->add_option("--bound", bound, "window bound (default p+1)");
    ainf->add_option("--nmax", nmax, "number of Frobenius images")->capture_default_str();

    auto* fnew = app.add_subcommand("fcrystal-new", "write a crystal document");
    add_common(fnew, c);
    add_crystal_source(fnew, src);
    fnew->add_option("--out", out_path, "write to a file instead of stdout");
    auto* fslopes = app.add_subcommand("fcrystal-slopes", "Newton polygon");
    add_common(fslopes, c);
    add_crystal_source(fslopes, src);
    auto* ffppf = app.add_subcommand("fcrystal-fppf", "fppf cohomology with Z_p(1) coefficients along a field tower");
    add_common(ffppf, c);
    add_crystal_source(ffppf, src);
    ffppf->add_option("--levels", src.levels, "tower levels")->capture_default_str();
    auto* fbr = app.add_subcommand("fcrystal-brauer", "Brauer group profile");
    add_common(fbr, c);
    add_crystal_source(fbr, src);
    fbr->add_option("--levels", src.levels, "tower levels")->capture_default_str();
    fbr->add_option("--ns", src.ns, "Neron-Severi rank");

    auto* cech = app.add_subcommand("cech-h", "Cech-Alexander cohomology of the affine line");
    add_common(cech, c, false);
    cech->add_option("--p", c.p, "prime")->capture_default_str();
    cech->add_option("--D", cech_D, "total degree bound")->capture_default_str();
    cech->add_option("--m-den", cech_den, "exponent denominator depth")->capture_default_str();
    cech->add_option("--t-bound", cech_t, "t-degree bound (default D)");
    // mod-p cohomology is the default here, so PCRIS_DEFAULT_N does not apply
    cech->add_option("--N", cech_N, "precision; 1 gives mod-p cohomology, higher N only reports H^0")->capture_default_str();

    auto* st = app.add_subcommand("selftest", "acceptance battery");
    st->add_option("--level", level, "quick | full")->check(CLI::IsMember({"quick", "full"}))->capture_default_str();
    st->add_option("--seed", c.seed, "seed")->capture_default_str();
    st->add_option("--only", only, "criterion numbers to run");
    st->add_flag("--no-timings", c.no_timings, "omit the timings block");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    auto t0 = std::chrono::steady_clock::now();
    try {
        if (*field) return emit(cmd_field(c), "field", c, t0);
        if (*teich) return emit(cmd_teich(c, teich_a), "teich", c, t0);
        if (*exact) return emit(cmd_acris_exact(c, vars, depth, samples), "acris-exact", c, t0);
        if (*alog) return emit(cmd_acris_log(c, units), "acris-log", c, t0);
        if (*ainf) return emit(cmd_acris_inf(c, inf_depth, bound ? bound : c.p + 1, nmax), "acris-inf", c, t0);
        if (*fnew) {
            auto cs = load_crystals(c, src);
            std::string doc = doc_to_json(to_doc(pick_degree(cs, src.degree))).dump(2);
            if (out_path.empty()) {
                std::cout << doc << "\n";
            } else {
                std::ofstream o(out_path);
                if (!o) throw UsageError("cannot write " + out_path);
                o << doc << "\n";
            }
            return kExitOk;
        }
        if (*fslopes) return emit(cmd_fcrystal_slopes(c, src), "fcrystal-slopes", c, t0);
        if (*ffppf) return emit(cmd_fcrystal_fppf(c, src), "fcrystal-fppf", c, t0);
        if (*fbr) return emit(cmd_fcrystal_brauer(c, src), "fcrystal-brauer", c, t0);
        if (*cech) return emit(cmd_cech_h(c, cech_D, cech_den, cech_t, cech_N), "cech-h", c, t0);
        if (*st) {
            SelftestConfig cfg;
            cfg.level = level == "full" ? SelftestLevel::Full : SelftestLevel::Quick;
            cfg.seed = c.seed;
            cfg.only = only;
            auto rep = run_selftest(cfg);
            std::cout << rep.to_json(!c.no_timings).dump(2) << "\n";
            return rep.ok() ? kExitOk : kExitCheck;
        }
    } catch (const UsageError& e) {
        return usage_failure(e.what());
    } catch (const SchemaError& e) {
        std::cerr << json{{"error", "schema"}, {"message", e.what()}}.dump() << "\n";
        return kExitUsage;
    } catch (const BadParameters& e) {
        return usage_failure(e.what());
    } catch (const CompositeModulus& e) {
        return usage_failure(e.what());
    } catch (const WindowTooSmall& e) {
        return usage_failure(std::string("window too small: ") + e.what());
    } catch (const NotASubfield& e) {
        return usage_failure(e.what());
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "failure"}, {"message", e.what()}}.dump() << "\n";
        return kExitCheck;
    }
    return kExitUsage;
}
