#include "qpspec/ladder.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qpspec/errors.hpp"

namespace qpspec {

namespace {
constexpr double kPi = std::numbers::pi;
}

QuantizedLadder quantize_phase(const std::function<double(double)>& phi, Interval J,
                               double epsilon, Nu nu) {
    if (!(J.hi > J.lo) || !(epsilon > 0.0)) throw Error(Errc::InvalidRange, "bad interval or epsilon");
    QuantizedLadder out;
    out.nu = nu;
    out.J = J;
    const double fa = phi(J.lo), fb = phi(J.hi);
    const double lo = std::min(fa, fb), hi = std::max(fa, fb);
    const long l_first = static_cast<long>(std::ceil((lo / epsilon - kPi / 2) / kPi));
    const long l_last = static_cast<long>(std::floor((hi / epsilon - kPi / 2) / kPi));
    if (l_last < l_first) throw Error(Errc::NoRoots, "no quantized level in J");
    for (long l = l_first; l <= l_last; ++l) {
        const double target = epsilon * (kPi / 2 + kPi * l);
        auto f = [&](double E) { return phi(E) - target; };
        double a = J.lo, b = J.hi, ya = fa - target, yb = fb - target;
        double E;
        if (ya == 0.0) {
            E = a;
        } else if (yb == 0.0) {
            E = b;
        } else {
            std::uintmax_t it = 200;
            auto r = boost::math::tools::toms748_solve(
                f, a, b, ya, yb, boost::math::tools::eps_tolerance<double>(52), it);
            E = 0.5 * (r.first + r.second);
        }
        out.entries.push_back({static_cast<int>(l), E});
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const LadderEntry& x, const LadderEntry& y) { return x.E < y.E; });
    return out;
}

QuantizedLadder quantize(const AdiabaticProblem& p, Interval J, Nu nu) {
    for (double E : {J.lo, J.hi})
        if (!tibm_holds(p, E)) throw Error(Errc::WindowViolation, "window condition fails on J");
    return quantize_phase([&](double E) { return phase_integral(p, E, nu); }, J, p.epsilon, nu);
}

std::vector<ResonantPair> find_resonances(const QuantizedLadder& a, const QuantizedLadder& b,
                                          double delta0, double epsilon) {
    const bool a_zero = a.nu == Nu::Zero;
    const QuantizedLadder& z = a_zero ? a : b;
    const QuantizedLadder& p = a_zero ? b : a;
    const double bound = 2.0 * std::exp(-delta0 / epsilon);
    struct Cand {
        double d;
        std::size_t i, j;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < z.entries.size(); ++i) {
        // Ladders are sorted: only a window of the other ladder can be close.
        auto it = std::lower_bound(p.entries.begin(), p.entries.end(), z.entries[i].E - bound,
                                   [](const LadderEntry& e, double v) { return e.E < v; });
        for (; it != p.entries.end() && it->E <= z.entries[i].E + bound; ++it)
            cands.push_back({std::abs(it->E - z.entries[i].E), i,
                             static_cast<std::size_t>(it - p.entries.begin())});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        if (x.d != y.d) return x.d < y.d;
        return x.i != y.i ? x.i < y.i : x.j < y.j;
    });
    std::vector<char> used_z(z.entries.size(), 0), used_p(p.entries.size(), 0);
    std::vector<ResonantPair> out;
    for (const auto& c : cands) {
        if (used_z[c.i] || used_p[c.j]) continue;
        used_z[c.i] = used_p[c.j] = 1;
        ResonantPair r;
        r.E0 = z.entries[c.i].E;
        r.Epi = p.entries[c.j].E;
        r.l0 = z.entries[c.i].l;
        r.lpi = p.entries[c.j].l;
        r.Ebar = 0.5 * (r.E0 + r.Epi);
        r.Delta = 0.5 * (r.E0 - r.Epi);
        r.delta0 = delta0;
        r.epsilon = epsilon;
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(),
              [](const ResonantPair& x, const ResonantPair& y) { return x.Ebar < y.Ebar; });
    return out;
}

ResonantPair make_pair(double E0, double Epi, const ActionProfile& prof, double delta0, double z0,
                       double zpi, int sigma) {
    ResonantPair r;
    r.E0 = E0;
    r.Epi = Epi;
    r.Ebar = 0.5 * (E0 + Epi);
    r.Delta = 0.5 * (E0 - Epi);
    r.profile = prof;
    r.epsilon = prof.epsilon;
    r.delta0 = delta0;
    r.z0 = z0;
    r.zpi = zpi;
    r.sigma = sigma;
    r.gamma0 = prof.dphi0 / (prof.epsilon * prof.tv0);
    r.gammapi = prof.dphipi / (prof.epsilon * prof.tvpi);
    return r;
}

void complete_pair(const AdiabaticProblem& p, ResonantPair& pair) {
    ActionProfile prof = tunneling_profile(p, pair.Ebar);
    ResonantPair full = make_pair(pair.E0, pair.Epi, prof, pair.delta0, pair.z0, pair.zpi,
                                  pair.sigma);
    full.l0 = pair.l0;
    full.lpi = pair.lpi;
    pair = full;
}

LocalVars local_variables(const ResonantPair& pair, double E) {
    if (pair.delta0 > 0.0 && pair.epsilon > 0.0) {
        const double r = 4.0 * std::exp(-pair.delta0 / pair.epsilon);
        if (std::abs(E - pair.Ebar) > r) {
            std::ostringstream os;
            os << "E=" << E << " is outside the pair neighborhood of radius " << r;
            throw Error(Errc::OutOfNeighborhood, os.str());
        }
    }
    return {pair.gamma0 * (E - pair.E0), pair.gammapi * (E - pair.Epi)};
}

}  // namespace qpspec
