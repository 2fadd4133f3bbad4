#pragma once

// Structured documents: crystals in and out, and the run report every CLI
// command prints.  Crystal entries are written mod p^{N+1} (the guard digit)
// as signed representatives, so serialize/parse is lossless.

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fcrystal.hpp"

namespace pcris {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kCrystalFormat = "pcris-crystal";
inline constexpr int kCrystalFormatVersion = 1;
inline constexpr int kMaxDocRank = 64;

struct CrystalDoc {
    u64 p = 2;
    int f = 1;
    int N = 1;
    int rank = 0;
    std::vector<std::vector<std::string>> entries;  // "c0,c1,...,c_{f-1}" mod p^{N+1}
    std::string label;

    bool operator==(const CrystalDoc&) const = default;
};

namespace io_detail {

inline std::string coeffs_to_string(const Prec& pr, const Coeffs& c) {
    std::string s;
    for (size_t i = 0; i < c.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(pr.to_signed(c[i]));
    }
    return s;
}

inline Coeffs coeffs_from_string(const Prec& pr, int f, const std::string& s, const std::string& where) {
    Coeffs out;
    size_t pos = 0;
    while (true) {
        size_t end = s.find(',', pos);
        std::string tok = s.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        size_t a = tok.find_first_not_of(' '), b = tok.find_last_not_of(' ');
        if (a == std::string::npos) throw SchemaError(where + ": empty coefficient in \"" + s + "\"");
        tok = tok.substr(a, b - a + 1);
        i64 v = 0;
        const char* first = tok.data();
        if (*first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            throw SchemaError(where + ": \"" + tok + "\" is not an integer");
        out.push_back(pr.from_signed(v));
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    if (static_cast<int>(out.size()) != f)
        throw SchemaError(where + ": expected " + std::to_string(f) + " comma-separated coefficients, got " + std::to_string(out.size()));
    return out;
}

inline const json& require(const json& j, const char* key) {
    if (!j.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

inline i64 require_int(const json& j, const char* key, i64 lo, i64 hi) {
    const json& v = require(j, key);
    if (!v.is_number_integer()) throw SchemaError(std::string("field \"") + key + "\" must be an integer");
    i64 x = v.get<i64>();
    if (x < lo || x > hi)
        throw SchemaError(std::string("field \"") + key + "\" = " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
}

}  // namespace io_detail

inline CrystalDoc to_doc(const FCrystal& X) {
    CrystalDoc d;
    d.p = X.p();
    d.f = X.f();
    d.N = X.N();
    d.rank = X.rank();
    d.label = X.label();
    const Prec& pg = X.guard_ring()->prec();
    for (auto& row : X.guard_phi()) {
        std::vector<std::string> r;
        for (auto& c : row) r.push_back(io_detail::coeffs_to_string(pg, c));
        d.entries.push_back(std::move(r));
    }
    return d;
}

inline FCrystal from_doc(const CrystalDoc& d) {
    if (!is_prime(d.p)) throw SchemaError("p = " + std::to_string(d.p) + " is not prime");
    if (d.f < 1 || d.f > 16) throw SchemaError("f must lie in [1, 16]");
    if (d.N < 1) throw SchemaError("N must be >= 1");
    if (!Prec::fits(d.p, d.N + 1)) throw SchemaError("p^(N+1) does not fit in a machine word");
    if (d.rank < 0 || d.rank > kMaxDocRank) throw SchemaError("rank out of range");
    if (static_cast<int>(d.entries.size()) != d.rank)
        throw SchemaError("phi has " + std::to_string(d.entries.size()) + " rows, rank is " + std::to_string(d.rank));
    auto Rg = GaloisRing::get(make_field(d.p, d.f), d.N + 1);
    CMat phi;
    for (int i = 0; i < d.rank; ++i) {
        if (static_cast<int>(d.entries[i].size()) != d.rank)
            throw SchemaError("phi[" + std::to_string(i) + "] has " + std::to_string(d.entries[i].size()) + " entries, rank is " + std::to_string(d.rank));
        CVec row;
        for (int j = 0; j < d.rank; ++j)
            row.push_back(io_detail::coeffs_from_string(Rg->prec(), d.f, d.entries[i][j], "phi[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
        phi.push_back(std::move(row));
    }
    return FCrystal::guarded(Rg, std::move(phi), d.label);
}

inline json doc_to_json(const CrystalDoc& d) {
    json j;
    j["format"] = kCrystalFormat;
    j["version"] = kCrystalFormatVersion;
    j["p"] = d.p;
    j["f"] = d.f;
    j["N"] = d.N;
    j["rank"] = d.rank;
    j["label"] = d.label;
    j["phi"] = d.entries;
    return j;
}

inline CrystalDoc doc_from_json(const json& j) {
    using namespace io_detail;
    if (!j.is_object()) throw SchemaError("crystal document must be an object");
    static const std::set<std::string> known{"format", "version", "p", "f", "N", "rank", "label", "phi"};
    for (auto& [k, v] : j.items())
        if (!known.count(k)) throw SchemaError("unknown field \"" + k + "\"");
    const json& fmt = require(j, "format");
    if (!fmt.is_string() || fmt.get<std::string>() != kCrystalFormat) throw SchemaError(std::string("field \"format\" must be \"") + kCrystalFormat + "\"");
    if (require_int(j, "version", 0, 1 << 20) != kCrystalFormatVersion) throw SchemaError("unsupported document version");
    CrystalDoc d;
    d.p = static_cast<u64>(require_int(j, "p", 2, 1 << 30));
    d.f = static_cast<int>(require_int(j, "f", 1, 16));
    d.N = static_cast<int>(require_int(j, "N", 1, 61));
    d.rank = static_cast<int>(require_int(j, "rank", 0, kMaxDocRank));
    if (j.contains("label")) {
        if (!j["label"].is_string()) throw SchemaError("field \"label\" must be a string");
        d.label = j["label"].get<std::string>();
    }
    const json& phi = require(j, "phi");
    if (!phi.is_array()) throw SchemaError("field \"phi\" must be an array of rows");
    for (size_t i = 0; i < phi.size(); ++i) {
        if (!phi[i].is_array()) throw SchemaError("phi[" + std::to_string(i) + "] must be an array");
        std::vector<std::string> row;
        for (size_t k = 0; k < phi[i].size(); ++k) {
            const json& e = phi[i][k];
            if (e.is_string())
                row.push_back(e.get<std::string>());
            else if (e.is_number_integer())
                row.push_back(std::to_string(e.get<i64>()));  // bare integers are accepted for f = 1
            else
                throw SchemaError("phi[" + std::to_string(i) + "][" + std::to_string(k) + "] must be a string");
        }
        d.entries.push_back(std::move(row));
    }
    from_doc(d);  // full validation of the entries
    return d;
}

inline std::string write_crystal(const FCrystal& X) { return doc_to_json(to_doc(X)).dump(); }

inline FCrystal read_crystal(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("not valid JSON: ") + e.what());
    }
    return from_doc(doc_from_json(j));
}

struct CheckResult {
    std::string name;
    bool pass = false;
    json measured = json::object();
};

// Everything in a report is deterministic except the timings block.
struct RunReport {
    std::string command;
    json config = json::object();
    u64 seed = 1;
    std::vector<CheckResult> checks;
    json witnesses = json::object();
    std::vector<std::pair<std::string, double>> timings;

    bool ok() const {
        for (auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    CheckResult& check(std::string name, bool pass, json measured = json::object()) {
        checks.push_back({std::move(name), pass, std::move(measured)});
        return checks.back();
    }

    json to_json(bool with_timings = true) const {
        json j;
        j["command"] = command;
        j["version"] = kToolVersion;
        j["seed"] = seed;
        j["config"] = config;
        json cs = json::array();
        for (auto& c : checks) cs.push_back({{"name", c.name}, {"status", c.pass ? "pass" : "fail"}, {"measured", c.measured}});
        j["checks"] = cs;
        j["witnesses"] = witnesses;
        j["status"] = ok() ? "pass" : "fail";
        if (with_timings) {
            json t = json::object();
            for (auto& [k, v] : timings) t[k] = std::round(v * 1000.0) / 1000.0;
            j["timings_s"] = t;
        }
        return j;
    }
};

// Serializing helpers shared by the CLI and the self-test.
inline json to_json(const ModuleStructure& m) {
    return {{"free", m.free}, {"torsion", m.torsion}};
}

inline json to_json(const NewtonPolygon& np) {
    json a = json::array();
    for (auto& [s, k] : np.segments) a.push_back({{"slope", s.to_string()}, {"multiplicity", k}});
    return a;
}

inline json to_json(const FppfDegree& d) {
    return {{"degree", d.degree},
            {"free_rank", d.free_rank},
            {"finite_torsion", d.finite_torsion},
            {"unipotent_a", d.unipotent_a},
            {"unipotent_exponent", d.unipotent_exponent},
            {"stable", d.stable}};
}

}  // namespace pcris
