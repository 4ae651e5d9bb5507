#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "qpspec/bloch.hpp"
#include "qpspec/cocycle.hpp"
#include "qpspec/errors.hpp"
#include "qpspec/lambdan.hpp"
#include "qpspec/ladder.hpp"
#include "qpspec/parallel.hpp"
#include "qpspec/predictor.hpp"
#include "qpspec/regimes.hpp"

namespace qpspec::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (v == 0.0) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Raised to stop a command with a specific exit code.
struct Stop {
    int code;
    std::string kind, message;
};

class Run {
public:
    Run(const RunConfig& cfg, std::string command)
        : cfg_(cfg), command_(std::move(command)), out_(cfg.output),
          staging_(out_ / (".staging-" + command_)) {
        fs::create_directories(out_);
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(staging_ / name, std::ios::binary);
        f << content;
        if (!f) throw std::runtime_error("cannot write " + name);
        files_.push_back(name);
    }

    // CSV with the config hash on the first line.
    void write_csv(const std::string& name, const std::string& header,
                   const std::vector<std::string>& rows) {
        std::string s = "# config_hash=" + cfg_.hash + "\n" + header + "\n";
        for (const auto& r : rows) s += r + "\n";
        write(name, s);
    }

    void write_json(const std::string& name, json j) {
        j["config_hash"] = cfg_.hash;
        write(name, j.dump(2) + "\n");
    }

    int commit(const json& summary) {
        write_manifest(summary);
        for (const auto& f : files_) fs::rename(staging_ / f, out_ / f);
        fs::rename(staging_ / "manifest.json", out_ / "manifest.json");
        fs::remove_all(staging_);
        return kOk;
    }

    int quarantine(int code, const std::string& kind, const std::string& message) {
        fs::path dir = out_ / "quarantine" / (command_ + "-" + cfg_.hash);
        fs::remove_all(dir);
        fs::create_directories(dir.parent_path());
        fs::rename(staging_, dir);
        json e = {{"command", command_}, {"config_hash", cfg_.hash}, {"exit_code", code},
                  {"error", kind}, {"message", message}, {"config", cfg_.resolved}};
        std::ofstream(dir / "error.json") << e.dump(2) << "\n";
        std::cerr << "qpspec " << command_ << ": " << message << "\n"
                  << "partial outputs in " << dir.string() << "\n";
        return code;
    }

    json derived = json::object();

private:
    void write_manifest(const json& summary) {
        json m = {{"command", command_},     {"config_hash", cfg_.hash}, {"config", cfg_.resolved},
                  {"files", files_},          {"summary", summary},       {"derived", derived},
                  {"version", "0.1.0"}};
        std::ofstream f(staging_ / "manifest.json", std::ios::binary);
        f << m.dump(2) << "\n";
    }

    const RunConfig& cfg_;
    std::string command_;
    fs::path out_, staging_;
    std::vector<std::string> files_;
};

template <class Body>
int guarded(const RunConfig& cfg, const std::string& command, Body body) {
    std::optional<Run> run;
    try {
        run.emplace(cfg, command);
        return body(*run);
    } catch (const Stop& s) {
        return run->quarantine(s.code, s.kind, s.message);
    } catch (const ConfigError& e) {
        if (!run) throw;
        return run->quarantine(kConfigError, "ConfigError", e.what());
    } catch (const Error& e) {
        if (!run) throw;
        int code = e.code() == Errc::NoResonance ? kNoResonance : kFailure;
        return run->quarantine(code, errc_name(e.code()), e.what());
    } catch (const std::exception& e) {
        if (!run) throw;
        return run->quarantine(kFailure, "Exception", e.what());
    }
}

void need_edges(const RunConfig& cfg, const std::string& command) {
    if (cfg.edges.empty()) throw ConfigError("field 'edges': required by " + command);
}

void need_J(const RunConfig& cfg) {
    if (!(cfg.J[1] > cfg.J[0])) throw ConfigError("field 'J': a nonempty interval is required");
}

AdiabaticProblem problem(const RunConfig& cfg, double eps) {
    AdiabaticProblem p;
    p.spectrum = build_spectrum(cfg.edges);
    p.alpha = cfg.alpha.min;
    p.n = cfg.n;
    p.epsilon = eps;
    return p;
}

std::string indexed(const std::string& stem, std::size_t i, std::size_t count) {
    return count == 1 ? stem + ".csv" : stem + "_e" + std::to_string(i) + ".csv";
}

struct PairSet {
    std::vector<ResonantPair> pairs;
    std::vector<LadderEntry> l0, lpi;
    double delta0 = 0.0;
};

PairSet find_pairs(const RunConfig& cfg, double eps) {
    AdiabaticProblem p = problem(cfg, eps);
    Interval J{cfg.J[0], cfg.J[1]};
    PairSet out;
    out.delta0 = compute_delta0(p, J);
    QuantizedLadder a = quantize(p, J, Nu::Zero);
    QuantizedLadder b = quantize(p, J, Nu::Pi);
    out.l0 = a.entries;
    out.lpi = b.entries;
    out.pairs = find_resonances(a, b, out.delta0, eps);
    for (auto& pr : out.pairs) pr.epsilon = eps;
    parallel_for(out.pairs.size(), [&](std::size_t i) { complete_pair(p, out.pairs[i]); });
    for (auto& pr : out.pairs) pr.delta0 = out.delta0;
    return out;
}

json prediction_json(const ResonantPair& pair, const SpectralPrediction& sp) {
    json iv = json::array();
    for (const auto& i : sp.intervals)
        iv.push_back({{"lo", i.lo}, {"hi", i.hi}, {"label", label_name(i.label)},
                      {"dos_weight", i.dos_weight}});
    json samples = json::array();
    for (const auto& s : sp.samples)
        samples.push_back({{"E", s.E}, {"Theta", jnum(s.Theta)}, {"lambda", jnum(s.lambda)},
                           {"class", class_name(s.cls)}});
    json diag = json::object();
    for (const auto& [k, v] : sp.diagnostics) diag[k] = jnum(v);
    json j = {{"E0", pair.E0},
              {"Epi", pair.Epi},
              {"Ebar", pair.Ebar},
              {"Delta", pair.Delta},
              {"tau", tau_of(pair.profile)},
              {"rho", rho_of(pair.profile)},
              {"log_tau", log_tau(pair.profile)},
              {"log_rho", log_rho(pair.profile)},
              {"regime", regime_name(sp.regime)},
              {"scenario", sp.scenario},
              {"intervals", iv},
              {"samples", samples},
              {"diagnostics", diag}};
    j["gap"] = sp.gap ? json{{"lo", sp.gap->lo}, {"hi", sp.gap->hi}} : json(nullptr);
    return j;
}

}  // namespace

int cmd_regions(const RunConfig& cfg) {
    return guarded(cfg, "regions", [&](Run& run) {
        need_edges(cfg, "regions");
        AdiabaticProblem p = problem(cfg, cfg.epsilon.front());
        auto cells = region_map(p, cfg.alpha.values(), cfg.energy.values(), cfg.margins.delta_tau,
                                cfg.margins.delta_rho);
        std::vector<std::string> rows;
        std::map<std::string, int> counts;
        for (const auto& c : cells) {
            const auto& r = c.report;
            rows.push_back(num(c.alpha) + "," + num(c.E) + "," + num(r.tau_exp) + "," +
                           num(r.rho_exp) + "," + regime_name(r.regime));
            ++counts[regime_name(r.regime)];
        }
        run.write_csv("regions.csv", "alpha,E,tau_exp,rho_exp,regime", rows);
        json poly = json::array();
        for (const auto& v : tibm_polygon(p.spectrum, cfg.n)) poly.push_back({v[0], v[1]});
        json summary = {{"cells", cells.size()}, {"counts", counts}, {"window_polygon", poly}};
        for (const auto& [k, v] : counts) std::cout << k << " " << v << "\n";
        return run.commit(summary);
    });
}

int cmd_quantize(const RunConfig& cfg) {
    return guarded(cfg, "quantize", [&](Run& run) {
        need_edges(cfg, "quantize");
        need_J(cfg);
        json per_eps = json::array();
        const std::size_t ne = cfg.epsilon.size();
        for (std::size_t i = 0; i < ne; ++i) {
            const double eps = cfg.epsilon[i];
            PairSet ps = find_pairs(cfg, eps);
            std::vector<std::string> ladder, pairs;
            for (const auto& e : ps.l0) ladder.push_back("0," + std::to_string(e.l) + "," + num(e.E));
            for (const auto& e : ps.lpi) ladder.push_back("pi," + std::to_string(e.l) + "," + num(e.E));
            for (const auto& pr : ps.pairs)
                pairs.push_back(num(pr.E0) + "," + num(pr.Epi) + "," + num(pr.Ebar) + "," +
                                num(pr.Delta) + "," + num(tau_of(pr.profile)) + "," +
                                num(rho_of(pr.profile)));
            run.write_csv(indexed("ladder", i, ne), "nu,l,E", ladder);
            run.write_csv(indexed("pairs", i, ne), "E0,Epi,Ebar,Delta,tau,rho", pairs);
            per_eps.push_back({{"epsilon", eps},
                               {"delta0", ps.delta0},
                               {"levels_0", ps.l0.size()},
                               {"levels_pi", ps.lpi.size()},
                               {"pairs", ps.pairs.size()}});
            std::cout << "epsilon " << eps << ": " << ps.l0.size() << " + " << ps.lpi.size()
                      << " levels, " << ps.pairs.size() << " resonant pairs\n";
        }
        return run.commit({{"per_epsilon", per_eps}});
    });
}

int cmd_predict(const RunConfig& cfg) {
    return guarded(cfg, "predict", [&](Run& run) {
        const double eps = cfg.epsilon.front();
        std::vector<ResonantPair> pairs;
        if (cfg.predict.force) {
            const auto& f = *cfg.predict.force;
            if (f.profile) {
                const auto& q = *f.profile;
                ActionProfile prof = make_profile(0.5 * (f.E0 + f.Epi), eps, q.phi0, q.phipi, q.dphi0,
                                                  q.dphipi, q.sv0, q.svpi, q.sh0, q.shpi);
                pairs.push_back(make_pair(f.E0, f.Epi, prof));
            } else {
                need_edges(cfg, "predict");
                ResonantPair pr;
                pr.E0 = f.E0;
                pr.Epi = f.Epi;
                pr.Ebar = 0.5 * (f.E0 + f.Epi);
                pr.Delta = 0.5 * (f.E0 - f.Epi);
                complete_pair(problem(cfg, eps), pr);
                pairs.push_back(pr);
            }
        } else {
            need_edges(cfg, "predict");
            need_J(cfg);
            pairs = find_pairs(cfg, eps).pairs;
            if (pairs.empty())
                throw Error(Errc::NoResonance,
                            "no resonant pair in J; set predict.force to supply E0 and Epi");
        }
        json out = json::array();
        for (const auto& pr : pairs) {
            Regime r = pair_regime(pr, cfg.margins.delta_tau, cfg.margins.delta_rho);
            if (r == Regime::Borderline) {
                std::ostringstream os;
                os << "pair E0=" << num(pr.E0) << " Epi=" << num(pr.Epi)
                   << " is Borderline; no prediction is made";
                throw Stop{kRefused, "Refused", os.str()};
            }
        }
        std::vector<json> slots(pairs.size());
        parallel_for(pairs.size(), [&](std::size_t i) {
            slots[i] = prediction_json(pairs[i], predict(pairs[i], cfg.predict.Lambda, cfg.predict.samples));
        });
        for (auto& s : slots) out.push_back(s);
        run.write_json("predict.json", {{"epsilon", eps}, {"Lambda", cfg.predict.Lambda}, {"pairs", out}});
        std::cout << pairs.size() << " pair(s) predicted\n";
        return run.commit({{"pairs", pairs.size()}});
    });
}

int cmd_cocycle(const RunConfig& cfg) {
    return guarded(cfg, "cocycle", [&](Run& run) {
        const auto& k = cfg.cocycle;
        ModelCocycle mc;
        mc.sigma = k.sigma;
        mc.tau = k.tau;
        mc.theta = k.theta;
        mc.gamma0 = k.gamma0;
        mc.E0 = k.E0;
        mc.gammapi = k.gammapi;
        mc.Epi = k.Epi;
        mc.z0 = k.z0;
        mc.zpi = k.zpi;
        mc.epsilon = cfg.epsilon.front();
        mc.h = k.h ? *k.h : h_from_epsilon(mc.epsilon);
        std::mt19937_64 rng(k.seed);
        const double z_init = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        run.derived = {{"h", num(mc.h)}, {"z_init", num(z_init)}};

        const auto E = k.scan.values();
        const std::size_t n = E.size();
        if (n == 0) throw Error(Errc::InvalidRange, "cocycle.scan is an empty grid");
        std::vector<CocycleVerdict> verdicts(n);
        std::vector<LyapunovResult> lyap(n);
        parallel_for(n, [&](std::size_t i) {
            verdicts[i] = resolvent_test(mc, cplx(E[i], 0.0), k.grid);
            lyap[i] = lyapunov(mc, E[i], k.iterations, z_init);
        });
        // Counting from the first scan energy, only between points where v has no zeros.
        std::vector<double> ids(n, std::nan(""));
        const bool base_ok = verdicts[0].kind == VerdictKind::Resolvent;
        if (base_ok) ids[0] = 0.0;
        parallel_for(n, [&](std::size_t i) {
            if (i == 0 || !base_ok || verdicts[i].kind != VerdictKind::Resolvent) return;
            try {
                ids[i] = ids_increment(mc, semicircle(E[0], E[i]), k.grid);
            } catch (const Error&) {
            }
        });
        std::vector<std::string> rows;
        std::map<std::string, int> counts;
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back(num(E[i]) + "," + verdict_name(verdicts[i].kind) + "," +
                           num(lyap[i].theta_cocycle) + "," + num(lyap[i].Theta_operator) + "," +
                           num(ids[i]));
            ++counts[verdict_name(verdicts[i].kind)];
        }
        run.write_csv("cocycle.csv", "E,verdict,theta_cocycle,Theta_operator,ids_cumulative", rows);
        for (const auto& [name, c] : counts) std::cout << name << " " << c << "\n";
        return run.commit({{"points", n}, {"counts", counts}});
    });
}

int cmd_lambdan(const RunConfig& cfg) {
    return guarded(cfg, "lambdan", [&](Run& run) {
        const auto& L = cfg.lambdan;
        Calibration cal = calibrate(L.seed);
        const TwoGapSurface& s = cal.surface;
        std::vector<PoleConfig> poles;
        for (const auto& ps : L.poles) {
            if (ps.P)
                poles.push_back({(*ps.P)[0], (*ps.P)[1], ps.s[0], ps.s[1]});
            else
                poles.push_back(poles_from_times(s, (*ps.t)[0], (*ps.t)[1]));
        }
        if (poles.empty()) {
            poles.push_back(poles_from_times(s, 0.0, 0.0));
            poles.push_back(poles_from_times(s, 0.3 * s.Xi1, 0.7 * s.Xi2));
        }
        std::vector<json> slots(poles.size());
        parallel_for(poles.size(), [&](std::size_t i) {
            const PoleConfig& p = poles[i];
            L1Result r = l1(s, p);
            LnResult ln = ln_rescaled(s, p, L.n);
            ThetaLambda tl = theta_lambda(ln.ln);
            OmegaAsymptotics oa = omega_asymptotics(s, p);
            PoleFlow pf = flow(s, p, 256);
            PotentialSamples pot = reconstruct_potential(s, p, 256);
            auto cj = [](cplx z) { return json{z.real(), z.imag()}; };
            slots[i] = {
                {"P1", p.P1},
                {"P2", p.P2},
                {"s1", p.s1},
                {"s2", p.s2},
                {"abel_times", {abel_time(s, 1, p.P1, p.s1), abel_time(s, 2, p.P2, p.s2)}},
                {"C1_imag", r.c.C1.imag()},
                {"C2_imag", r.c.C2.imag()},
                {"loops",
                 {{"omega1", cj(r.loops.omega1)},
                  {"omega2", cj(r.loops.omega2)},
                  {"pole1", cj(r.loops.pole1)},
                  {"pole2", cj(r.loops.pole2)}}},
                {"l1", r.l1},
                {"n", L.n},
                {"ln", ln.ln},
                {"theta_n", tl.theta},
                {"Lambda_n", tl.Lambda},
                {"diagnostics",
                 {{"imag_residue", r.imag_residue},
                  {"offset_deviation", r.loops.offset_deviation},
                  {"gld2_residual", pot.gld2_residual},
                  {"periodicity_residual", pf.periodicity_residual},
                  {"omega_rel3", oa.rel3},
                  {"omega_rel5", oa.rel5}}}};
        });
        json report = {{"edges", s.edges},
                       {"Xi1", s.Xi1},
                       {"Xi2", s.Xi2},
                       {"calibration",
                        {{"period_residual", cal.period_residual},
                         {"x_residual", cal.x_residual},
                         {"iterations", cal.iterations}}},
                       {"configurations", slots}};
        if (!L.deltas.empty()) {
            std::array<double, 5> e{};
            for (int i = 0; i < 5; ++i) e[i] = s.edges[i] * L.probe_scale;
            ProbeResult pr = degenerate_scaling_probe(make_surface(e), L.deltas);
            report["probe"] = {{"edges", e},
                               {"delta", pr.delta},
                               {"d2F", pr.d2F},
                               {"d2F_integral", pr.d2F_int},
                               {"d2G", pr.d2G},
                               {"slope", pr.slope},
                               {"slope_G", pr.slope_G},
                               {"G_scaled_max", pr.G_scaled_max},
                               {"prefactor", pr.prefactor},
                               {"F0_abs", pr.F0_abs},
                               {"fit_residual", pr.fit_residual}};
        }
        run.write_json("lambdan.json", report);
        for (const auto& c : slots)
            std::cout << "P1=" << num(c["P1"].get<double>()) << " P2=" << num(c["P2"].get<double>())
                      << " l1=" << num(c["l1"].get<double>()) << "\n";
        return run.commit({{"configurations", slots.size()}});
    });
}

int run_command(const std::string& name, const RunConfig& cfg) {
    if (name == "regions") return cmd_regions(cfg);
    if (name == "quantize") return cmd_quantize(cfg);
    if (name == "predict") return cmd_predict(cfg);
    if (name == "cocycle") return cmd_cocycle(cfg);
    if (name == "lambdan") return cmd_lambdan(cfg);
    throw ConfigError("unknown command " + name);
}

}  // namespace qpspec::cli
