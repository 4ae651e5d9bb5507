#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace qpspec::cli {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
    throw ConfigError("field '" + field + "': " + msg);
}

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

void known_keys(const json& j, const std::string& path, const std::set<std::string>& keys) {
    if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!keys.count(it.key())) fail(join(path, it.key()), "unknown key");
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

double positive(const json& j, const std::string& path) {
    double v = number(j, path);
    if (!(v > 0.0)) fail(path, "must be positive");
    return v;
}

long integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long>();
}

int sign(const json& j, const std::string& path) {
    long v = integer(j, path);
    if (v != 1 && v != -1) fail(path, "must be +1 or -1");
    return static_cast<int>(v);
}

std::vector<double> numbers(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

template <std::size_t N>
std::array<double, N> fixed(const json& j, const std::string& path) {
    auto v = numbers(j, path);
    if (v.size() != N) fail(path, "expected " + std::to_string(N) + " numbers");
    std::array<double, N> a{};
    for (std::size_t i = 0; i < N; ++i) a[i] = v[i];
    return a;
}

// A scalar, or {min, max, count}.
Range range(const json& j, const std::string& path) {
    Range r;
    if (j.is_number()) {
        r.min = r.max = number(j, path);
        r.count = 1;
        return r;
    }
    known_keys(j, path, {"min", "max", "count"});
    for (const char* k : {"min", "max", "count"})
        if (!j.contains(k)) fail(join(path, k), "missing");
    r.min = number(j["min"], join(path, "min"));
    r.max = number(j["max"], join(path, "max"));
    long c = integer(j["count"], join(path, "count"));
    // An empty grid parses; the command that sweeps it reports InvalidRange.
    if (c < 0) fail(join(path, "count"), "must be nonnegative");
    if (r.max < r.min) fail(join(path, "max"), "must not be below min");
    r.count = static_cast<int>(c);
    return r;
}

json range_json(const Range& r) { return {{"min", r.min}, {"max", r.max}, {"count", r.count}}; }

void increasing(const std::vector<double>& v, const std::string& path) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) fail(path, "must be strictly increasing");
}

SyntheticProfile profile(const json& j, const std::string& path) {
    known_keys(j, path, {"phi0", "phipi", "dphi0", "dphipi", "sv0", "svpi", "sh0", "shpi"});
    SyntheticProfile p;
    auto rd = [&](const char* k, double& dst) {
        if (j.contains(k)) dst = number(j[k], join(path, k));
    };
    rd("phi0", p.phi0);
    rd("phipi", p.phipi);
    rd("dphi0", p.dphi0);
    rd("dphipi", p.dphipi);
    rd("sv0", p.sv0);
    rd("svpi", p.svpi);
    rd("sh0", p.sh0);
    rd("shpi", p.shpi);
    if (!(p.dphi0 < 0.0)) fail(join(path, "dphi0"), "must be negative");
    if (!(p.dphipi > 0.0)) fail(join(path, "dphipi"), "must be positive");
    for (double s : {p.sv0, p.svpi, p.sh0, p.shpi})
        if (!(s > 0.0)) fail(path, "actions must be positive");
    return p;
}

}  // namespace

std::vector<double> Range::values() const {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i)
        v[i] = count == 1 ? min : min + (max - min) * i / (count - 1);
    return v;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError("line " + std::to_string(line) + ": " + e.what());
    }
    known_keys(j, "", {"edges", "alpha", "energy", "epsilon", "n", "J", "margins", "predict", "cocycle",
                       "lambdan", "output"});
    RunConfig c;
    if (j.contains("edges")) {
        c.edges = numbers(j["edges"], "edges");
        if (c.edges.size() < 3 || c.edges.size() % 2 == 0)
            fail("edges", "needs an odd count of at least 3");
        increasing(c.edges, "edges");
    }
    if (j.contains("alpha")) c.alpha = range(j["alpha"], "alpha");
    if (!(c.alpha.min > 0.0)) fail("alpha", "must be positive");
    if (j.contains("energy")) c.energy = range(j["energy"], "energy");
    if (j.contains("epsilon")) {
        c.epsilon = j["epsilon"].is_array() ? numbers(j["epsilon"], "epsilon")
                                           : std::vector<double>{number(j["epsilon"], "epsilon")};
        if (c.epsilon.empty()) fail("epsilon", "must not be empty");
        for (double e : c.epsilon)
            if (!(e > 0.0)) fail("epsilon", "must be positive");
    }
    if (j.contains("n")) {
        long n = integer(j["n"], "n");
        if (n < 1) fail("n", "must be at least 1");
        if (!c.edges.empty() && 2 * n + 1 > static_cast<long>(c.edges.size()))
            fail("n", "exceeds the number of gaps");
        c.n = static_cast<int>(n);
    }
    if (j.contains("J")) {
        c.J = fixed<2>(j["J"], "J");
        if (c.J[1] < c.J[0]) fail("J", "upper bound below lower bound");
    }
    if (j.contains("margins")) {
        const json& m = j["margins"];
        known_keys(m, "margins", {"delta_tau", "delta_rho"});
        if (m.contains("delta_tau")) c.margins.delta_tau = number(m["delta_tau"], "margins.delta_tau");
        if (m.contains("delta_rho")) c.margins.delta_rho = number(m["delta_rho"], "margins.delta_rho");
    }
    if (j.contains("predict")) {
        const json& p = j["predict"];
        known_keys(p, "predict", {"Lambda", "samples", "force"});
        if (p.contains("Lambda")) c.predict.Lambda = number(p["Lambda"], "predict.Lambda");
        if (c.predict.Lambda < 1.0) fail("predict.Lambda", "must be at least 1");
        if (p.contains("samples")) {
            long s = integer(p["samples"], "predict.samples");
            if (s < 3) fail("predict.samples", "must be at least 3");
            c.predict.samples = static_cast<int>(s);
        }
        if (p.contains("force")) {
            const json& f = p["force"];
            known_keys(f, "predict.force", {"E0", "Epi", "profile"});
            if (!f.contains("E0") || !f.contains("Epi")) fail("predict.force", "needs E0 and Epi");
            ForcedPair fp;
            fp.E0 = number(f["E0"], "predict.force.E0");
            fp.Epi = number(f["Epi"], "predict.force.Epi");
            if (f.contains("profile")) fp.profile = profile(f["profile"], "predict.force.profile");
            c.predict.force = fp;
        }
    }
    if (j.contains("cocycle")) {
        const json& m = j["cocycle"];
        const std::string b = "cocycle";
        known_keys(m, b, {"sigma", "z0", "zpi", "h", "iterations", "seed", "tau", "theta", "gamma0", "E0",
                          "gammapi", "Epi", "scan", "grid"});
        auto& k = c.cocycle;
        if (m.contains("sigma")) k.sigma = sign(m["sigma"], b + ".sigma");
        if (m.contains("z0")) k.z0 = number(m["z0"], b + ".z0");
        if (m.contains("zpi")) k.zpi = number(m["zpi"], b + ".zpi");
        if (m.contains("h")) {
            double h = number(m["h"], b + ".h");
            if (h < 0.0 || h >= 1.0) fail(b + ".h", "must lie in [0, 1)");
            k.h = h;
        }
        if (m.contains("iterations")) {
            k.iterations = integer(m["iterations"], b + ".iterations");
            if (k.iterations < 1000) fail(b + ".iterations", "must be at least 1000");
        }
        if (m.contains("seed")) {
            long s = integer(m["seed"], b + ".seed");
            if (s < 0) fail(b + ".seed", "must be nonnegative");
            k.seed = static_cast<std::uint64_t>(s);
        }
        if (m.contains("tau")) k.tau = number(m["tau"], b + ".tau");
        if (k.tau < 0.0) fail(b + ".tau", "must be nonnegative");
        if (m.contains("theta")) k.theta = number(m["theta"], b + ".theta");
        if (k.theta < 1.0) fail(b + ".theta", "must be at least 1");
        if (m.contains("gamma0")) k.gamma0 = number(m["gamma0"], b + ".gamma0");
        if (m.contains("E0")) k.E0 = number(m["E0"], b + ".E0");
        if (m.contains("gammapi")) k.gammapi = number(m["gammapi"], b + ".gammapi");
        if (m.contains("Epi")) k.Epi = number(m["Epi"], b + ".Epi");
        if (m.contains("scan")) k.scan = range(m["scan"], b + ".scan");
        if (m.contains("grid")) {
            long g = integer(m["grid"], b + ".grid");
            if (g < 16) fail(b + ".grid", "must be at least 16");
            k.grid = static_cast<int>(g);
        }
    }
    if (j.contains("lambdan")) {
        const json& m = j["lambdan"];
        const std::string b = "lambdan";
        known_keys(m, b, {"seed", "poles", "deltas", "probe_scale", "n"});
        auto& L = c.lambdan;
        if (m.contains("seed")) {
            L.seed = fixed<5>(m["seed"], b + ".seed");
            increasing(std::vector<double>(L.seed.begin(), L.seed.end()), b + ".seed");
        }
        if (m.contains("poles")) {
            if (!m["poles"].is_array()) fail(b + ".poles", "expected an array");
            for (std::size_t i = 0; i < m["poles"].size(); ++i) {
                const json& q = m["poles"][i];
                const std::string qp = b + ".poles[" + std::to_string(i) + "]";
                known_keys(q, qp, {"P", "s", "t"});
                PoleSpec ps;
                if (q.contains("P")) ps.P = fixed<2>(q["P"], qp + ".P");
                if (q.contains("t")) ps.t = fixed<2>(q["t"], qp + ".t");
                if (ps.P.has_value() == ps.t.has_value()) fail(qp, "give exactly one of P or t");
                if (q.contains("s")) {
                    if (!q["s"].is_array() || q["s"].size() != 2) fail(qp + ".s", "expected two signs");
                    ps.s = {sign(q["s"][0], qp + ".s[0]"), sign(q["s"][1], qp + ".s[1]")};
                }
                L.poles.push_back(ps);
            }
        }
        if (m.contains("deltas")) {
            L.deltas = numbers(m["deltas"], b + ".deltas");
            for (std::size_t i = 0; i < L.deltas.size(); ++i)
                if (!(L.deltas[i] > 0.0) || (i > 0 && !(L.deltas[i] < L.deltas[i - 1])))
                    fail(b + ".deltas", "must be positive and decreasing");
        }
        if (m.contains("probe_scale")) L.probe_scale = positive(m["probe_scale"], b + ".probe_scale");
        if (m.contains("n")) {
            long n = integer(m["n"], b + ".n");
            if (n < 1) fail(b + ".n", "must be at least 1");
            L.n = static_cast<int>(n);
        }
    }
    if (j.contains("output")) {
        if (!j["output"].is_string() || j["output"].get<std::string>().empty())
            fail("output", "expected a nonempty string");
        c.output = j["output"].get<std::string>();
    }

    json r;
    r["edges"] = c.edges;
    r["alpha"] = range_json(c.alpha);
    r["energy"] = range_json(c.energy);
    r["epsilon"] = c.epsilon;
    r["n"] = c.n;
    r["J"] = c.J;
    r["margins"] = {{"delta_tau", c.margins.delta_tau}, {"delta_rho", c.margins.delta_rho}};
    json pr = {{"Lambda", c.predict.Lambda}, {"samples", c.predict.samples}};
    if (c.predict.force) {
        const auto& f = *c.predict.force;
        pr["force"] = {{"E0", f.E0}, {"Epi", f.Epi}};
        if (f.profile) {
            const auto& p = *f.profile;
            pr["force"]["profile"] = {{"phi0", p.phi0}, {"phipi", p.phipi}, {"dphi0", p.dphi0},
                                      {"dphipi", p.dphipi}, {"sv0", p.sv0}, {"svpi", p.svpi},
                                      {"sh0", p.sh0}, {"shpi", p.shpi}};
        }
    }
    r["predict"] = pr;
    const auto& k = c.cocycle;
    r["cocycle"] = {{"sigma", k.sigma}, {"z0", k.z0}, {"zpi", k.zpi}, {"iterations", k.iterations},
                    {"seed", k.seed}, {"tau", k.tau}, {"theta", k.theta}, {"gamma0", k.gamma0},
                    {"E0", k.E0}, {"gammapi", k.gammapi}, {"Epi", k.Epi},
                    {"scan", range_json(k.scan)}, {"grid", k.grid}};
    r["cocycle"]["h"] = k.h ? json(*k.h) : json(nullptr);
    json poles = json::array();
    for (const auto& p : c.lambdan.poles) {
        json q = {{"s", p.s}};
        if (p.P) q["P"] = *p.P;
        if (p.t) q["t"] = *p.t;
        poles.push_back(q);
    }
    r["lambdan"] = {{"seed", c.lambdan.seed}, {"poles", poles}, {"deltas", c.lambdan.deltas},
                    {"probe_scale", c.lambdan.probe_scale}, {"n", c.lambdan.n}};
    r["output"] = c.output;
    c.resolved = r;
    c.hash = fnv1a_hex(r.dump());
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace qpspec::cli
