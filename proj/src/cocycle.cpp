#include "qpspec/cocycle.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qpspec/errors.hpp"
#include "qpspec/regimes.hpp"

namespace qpspec {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap01(double z) {
    z -= std::floor(z);
    return z >= 1.0 ? 0.0 : z;
}

struct Entries {
    cplx g0, gpi;
};

Entries gs(const ModelCocycle& mc, double z, cplx E) {
    return {mc.xi0(E) + std::sin(kTwoPi * (z - mc.z0)), mc.xipi(E) + std::sin(kTwoPi * (z - mc.zpi))};
}

// Minimum of f near grid point i by Brent on the two neighbouring cells.
template <class F>
double refine_min(F f, double zi, double dz, double fi) {
    auto r = boost::math::tools::brent_find_minima(f, zi - dz, zi + dz, 50);
    return std::min(fi, r.second);
}

template <class F>
int winding(F f, int n) {
    for (int level = 0; level < 6; ++level, n *= 4) {
        double total = 0.0;
        bool smooth = true;
        cplx prev = f(0.0);
        for (int i = 1; i <= n; ++i) {
            cplx cur = f(static_cast<double>(i) / n);
            double d = std::arg(cur / prev);
            if (std::abs(d) > kPi / 2) {
                smooth = false;
                break;
            }
            total += d;
            prev = cur;
        }
        if (smooth) return static_cast<int>(std::lround(total / kTwoPi));
    }
    // Grid never resolved the phase: a zero sits on or next to the circle.
    return std::numeric_limits<int>::max();
}

double conj_of(double x) { return x; }
cplx conj_of(cplx x) { return std::conj(x); }
double det2(const Eigen::Matrix2d& m) { return det_kahan(m); }
cplx det2(const Eigen::Matrix2cd& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

template <class Mat>
LyapunovResult run_lyapunov(const std::function<Mat(double)>& fam, double h, double eps, long n,
                            double z0) {
    if (n < 1000) throw Error(Errc::InvalidRange, "lyapunov needs at least 1000 iterations");
    Mat Q = Mat::Identity();
    double z = wrap01(z0), s1 = 0.0, s2 = 0.0;
    double at_half = 0.0, at_nine = 0.0;
    const long half = n / 2, nine = n - n / 10;
    for (long k = 0; k < n; ++k) {
        const Mat M = fam(z);
        const Mat B = M * Q;
        // Second column is the unit complement of the first, so det Q = 1 and
        // r11 * r22 = det M without any cancellation in the product.
        const double r11 = B.col(0).norm();
        Q.col(0) = B.col(0) / r11;
        Q(0, 1) = -conj_of(Q(1, 0));
        Q(1, 1) = conj_of(Q(0, 0));
        const double r22 = std::abs(det2(M)) / r11;
        s1 += std::log(r11);
        s2 += std::log(r22);
        if (k + 1 == half) at_half = s1;
        if (k + 1 == nine) at_nine = s1;
        z = wrap01(z + h);
    }
    LyapunovResult r;
    r.first_half_slope = at_half / half;
    r.second_half_slope = (s1 - at_half) / (n - half);
    r.last_decade = (s1 - at_nine) / (n - nine);
    r.theta_cocycle = std::max(0.0, r.second_half_slope);
    r.Theta_operator = eps / kTwoPi * r.theta_cocycle;
    const double diff = std::abs(r.second_half_slope - r.first_half_slope);
    r.drift = diff / std::max(std::abs(r.second_half_slope), 1e-300);
    r.converged = diff <= 0.05 * std::abs(r.second_half_slope) + 1e-4;
    r.log_det = s1 + s2;
    return r;
}

}  // namespace

double h_from_epsilon(double eps) {
    if (!(eps > 0.0)) throw Error(Errc::InvalidRange, "epsilon must be positive");
    const double x = kTwoPi / eps;
    return x - std::floor(x);
}

double theta_from_lambda(double L) {
    if (!(L >= 1.0)) throw Error(Errc::InvalidRange, "LambdaN must be at least 1");
    return L + std::sqrt((L - 1.0) * (L + 1.0));
}

ModelCocycle cocycle_from_pair(const ResonantPair& p, double LambdaN) {
    ModelCocycle mc;
    mc.sigma = p.sigma;
    mc.tau = std::exp(log_tau(p.profile));
    mc.theta = theta_from_lambda(LambdaN);
    mc.gamma0 = p.gamma0;
    mc.gammapi = p.gammapi;
    mc.E0 = p.E0;
    mc.Epi = p.Epi;
    mc.z0 = p.z0;
    mc.zpi = p.zpi;
    mc.epsilon = p.epsilon;
    mc.h = h_from_epsilon(p.epsilon);
    return mc;
}

Eigen::Matrix2d model_matrix(const ModelCocycle& mc, double z, double E) {
    const double g0 = mc.gamma0 * (E - mc.E0) + std::sin(kTwoPi * (z - mc.z0));
    const double gp = mc.gammapi * (E - mc.Epi) + std::sin(kTwoPi * (z - mc.zpi));
    const double t = mc.tau, th = mc.theta;
    Eigen::Matrix2d m;
    m << t * t * g0 * gp + 1.0 / th, t * g0, th * t * gp, th;
    return mc.sigma * m;
}

Eigen::Matrix2cd model_matrix(const ModelCocycle& mc, double z, cplx E) {
    const Entries e = gs(mc, z, E);
    const double t = mc.tau, th = mc.theta;
    Eigen::Matrix2cd m;
    m << t * t * e.g0 * e.gpi + 1.0 / th, t * e.g0, th * t * e.gpi, th;
    return static_cast<double>(mc.sigma) * m;
}

double det_kahan(const Eigen::Matrix2d& m) {
    const double w = m(0, 1) * m(1, 0);
    const double e = std::fma(-m(0, 1), m(1, 0), w);
    const double f = std::fma(m(0, 0), m(1, 1), -w);
    return f + e;
}

LyapunovResult lyapunov_family(const MatrixFamily& m, double h, double eps, long n, double z0) {
    return run_lyapunov<Eigen::Matrix2cd>(m, h, eps, n, z0);
}

LyapunovResult lyapunov(const ModelCocycle& mc, double E, long n, double z0) {
    std::function<Eigen::Matrix2d(double)> f = [&](double z) { return model_matrix(mc, z, E); };
    return run_lyapunov<Eigen::Matrix2d>(f, mc.h, mc.epsilon, n, z0);
}

const char* verdict_name(VerdictKind k) {
    switch (k) {
    case VerdictKind::Resolvent: return "Resolvent";
    case VerdictKind::PossibleSpectrum: return "PossibleSpectrum";
    case VerdictKind::NotApplicable: return "NotApplicable";
    }
    return "?";
}

namespace {

// rho and v with the tau factors of M12 cancelled in the ratio.
struct RhoV {
    cplx g0, rho, v;
};

RhoV rho_v(const ModelCocycle& mc, double z, cplx E) {
    const Entries e = gs(mc, z, E);
    const cplx g0m = mc.xi0(E) + std::sin(kTwoPi * (z - mc.h - mc.z0));
    const cplx rho = e.g0 / g0m;
    const double t = mc.tau, th = mc.theta;
    const cplx v = static_cast<double>(mc.sigma) * (t * t * e.g0 * e.gpi + 1.0 / th + rho * th);
    return {e.g0, rho, v};
}

double m12_tol(const ModelCocycle& mc, cplx E) { return 1e-12 * (1.0 + std::abs(mc.xi0(E))); }

}  // namespace

CocycleVerdict resolvent_test(const ModelCocycle& mc, cplx E, int grid) {
    CocycleVerdict out;
    std::vector<RhoV> vals(grid);
    for (int i = 0; i < grid; ++i) vals[i] = rho_v(mc, static_cast<double>(i) / grid, E);
    auto idx_min = [&](auto key) {
        int best = 0;
        for (int i = 1; i < grid; ++i)
            if (key(vals[i]) < key(vals[best])) best = i;
        return best;
    };
    const double dz = 1.0 / grid;
    int i = idx_min([](const RhoV& r) { return std::abs(r.g0); });
    double min_g0 = refine_min([&](double z) { return std::abs(rho_v(mc, z, E).g0); },
                               i * dz, dz, std::abs(vals[i].g0));
    out.min_abs_m12 = mc.tau * min_g0;
    if (min_g0 <= m12_tol(mc, E)) {
        out.kind = VerdictKind::NotApplicable;
        return out;
    }
    i = idx_min([](const RhoV& r) { return std::abs(r.v); });
    out.min_abs_v = refine_min([&](double z) { return std::abs(rho_v(mc, z, E).v); }, i * dz, dz,
                               std::abs(vals[i].v));
    i = idx_min([](const RhoV& r) { return -std::abs(r.rho); });
    out.max_abs_rho = -refine_min([&](double z) { return -std::abs(rho_v(mc, z, E).rho); }, i * dz,
                                  dz, -std::abs(vals[i].rho));
    out.ind_rho = winding([&](double z) { return rho_v(mc, z, E).rho; }, grid);
    out.ind_v = winding([&](double z) { return rho_v(mc, z, E).v; }, grid);
    const double bound = 0.25 * out.min_abs_v * out.min_abs_v;
    const bool ok = out.max_abs_rho < (1.0 - 1e-9) * bound && out.ind_rho == 0 && out.ind_v == 0;
    out.kind = ok ? VerdictKind::Resolvent : VerdictKind::PossibleSpectrum;
    return out;
}

std::vector<cplx> semicircle(double a, double b, int n) {
    if (!(b > a) || n < 2) throw Error(Errc::InvalidRange, "semicircle needs a < b and n >= 2");
    const double c = 0.5 * (a + b), R = 0.5 * (b - a);
    std::vector<cplx> path(n + 1);
    for (int k = 0; k <= n; ++k) {
        const double phi = kPi * k / n;
        path[k] = cplx(c - R * std::cos(phi), R * std::sin(phi));
    }
    path.front() = a;
    path.back() = b;
    return path;
}

namespace {

// arg v on the z-grid, or false when the resolvent conditions fail.
bool arg_v(const ModelCocycle& mc, cplx E, int grid, std::vector<double>& out) {
    out.resize(grid);
    double min_g0 = std::numeric_limits<double>::infinity(), min_v = min_g0, max_rho = 0.0;
    double wind = 0.0;
    cplx prev;
    for (int i = 0; i < grid; ++i) {
        RhoV r = rho_v(mc, static_cast<double>(i) / grid, E);
        min_g0 = std::min(min_g0, std::abs(r.g0));
        min_v = std::min(min_v, std::abs(r.v));
        max_rho = std::max(max_rho, std::abs(r.rho));
        out[i] = std::arg(r.v);
        if (i > 0) wind += std::arg(r.v / prev);
        prev = r.v;
    }
    wind += std::arg(rho_v(mc, 0.0, E).v / prev);
    return min_g0 > m12_tol(mc, E) && max_rho < 0.25 * min_v * min_v &&
           std::abs(wind) < kPi;
}

struct IdsTracker {
    const ModelCocycle& mc;
    int grid;
    std::vector<double> cur;  // continuous arg v at the current path point
    std::vector<double> raw;

    void fail(cplx E) const {
        std::ostringstream os;
        os << "resolvent conditions fail on the path at E=" << E.real() << "+" << E.imag() << "i";
        throw Error(Errc::PathThroughSpectrum, os.str());
    }

    void step(cplx a, cplx b, int depth) {
        if (!arg_v(mc, b, grid, raw)) fail(b);
        double jump = 0.0;
        std::vector<double> next(grid);
        for (int i = 0; i < grid; ++i) {
            next[i] = raw[i] + kTwoPi * std::round((cur[i] - raw[i]) / kTwoPi);
            jump = std::max(jump, std::abs(next[i] - cur[i]));
        }
        if (jump > kPi / 2 && depth < 40) {
            const cplx mid = 0.5 * (a + b);
            step(a, mid, depth + 1);
            step(mid, b, depth + 1);
            return;
        }
        cur = std::move(next);
    }
};

}  // namespace

double ids_increment(const ModelCocycle& mc, const std::vector<cplx>& path, int grid) {
    if (path.size() < 2) throw Error(Errc::InvalidRange, "path needs two vertices");
    IdsTracker t{mc, grid, {}, {}};
    if (!arg_v(mc, path.front(), grid, t.cur)) t.fail(path.front());
    double start = 0.0;
    for (double x : t.cur) start += x;
    for (std::size_t k = 1; k < path.size(); ++k) t.step(path[k - 1], path[k], 0);
    double end = 0.0;
    for (double x : t.cur) end += x;
    const double incr = (end - start) / grid;
    return -mc.epsilon / (2.0 * kPi * kPi) * incr;
}

DecayingSolutions decaying_solutions(const ModelCocycle& mc, double E, int nz) {
    const double t = mc.tau, th = mc.theta, h = mc.h;
    const double x0 = mc.gamma0 * (E - mc.E0), xp = mc.gammapi * (E - mc.Epi);
    auto g0 = [&](double z) { return x0 + std::sin(kTwoPi * (z - mc.z0)); };
    auto gp = [&](double z) { return xp + std::sin(kTwoPi * (z - mc.zpi)); };
    // sigma M = diag(1/theta, theta) + perturbation; the global sign does not
    // change decay.
    auto pert = [&](double z) {
        const double a = g0(z), b = gp(z);
        return std::max({std::abs(t * t * a * b), std::abs(t * a), std::abs(th * t * b)});
    };
    const int ng = 8192;
    double m = 0.0;
    int imax = 0;
    for (int i = 0; i < ng; ++i) {
        const double v = pert(static_cast<double>(i) / ng);
        if (v > m) m = v, imax = i;
    }
    {
        const double dz = 1.0 / ng;
        auto r = boost::math::tools::brent_find_minima([&](double z) { return -pert(z); },
                                                       imax * dz - dz, imax * dz + dz, 50);
        m = std::max(m, -r.second);
    }
    if (!(th + 1.0 / th > 2.0) || th - 1.0 / th < 4.0 * m) {
        std::ostringstream os;
        os << "need theta - 1/theta >= 4 sup|perturbation|: theta=" << th << ", sup=" << m;
        throw Error(Errc::HypothesisFailed, os.str());
    }
    DecayingSolutions out;
    out.m = m;
    if (m == 0.0) {
        out.q = 0.0;
    } else {
        const double r = (th - 1.0 / th) / (2.0 * m) - 1.0;
        out.q = r - std::sqrt((r - 1.0) * (r + 1.0));
    }
    out.p = th - m * (out.q + 1.0);

    struct Mob {
        double a, b, c, d;
    };
    auto M = [&](double w) -> Mob {
        const double a = g0(w), b = gp(w);
        return {t * t * a * b + 1.0 / th, t * a, th * t * b, th};
    };
    // Conjugated inverse family: swap * M^{-1}(-w-h) * swap.
    auto Mt = [&](double w) -> Mob {
        Mob k = M(-w - h);
        return {k.a, -k.c, -k.b, k.d};
    };
    auto apply = [](const Mob& k, double G) { return (k.a * G + k.b) / (k.c * G + k.d); };
    auto G_k = [&](auto fam, double z, int k) {
        double G = 0.0;
        for (int j = k; j >= 1; --j) G = apply(fam(z - j * h), G);
        return G;
    };

    out.z.resize(nz);
    for (int i = 0; i < nz; ++i) out.z[i] = h * i / nz;
    std::vector<double> G(nz, 0.0), Gt(nz, 0.0);
    const int kmax = 200;
    int k = 0;
    for (; k < kmax; ++k) {
        double diff = 0.0, scale = 0.0;
        for (int i = 0; i < nz; ++i) {
            const double a = G_k(M, out.z[i], k + 1), b = G_k(Mt, -out.z[i], k + 1);
            diff = std::max({diff, std::abs(a - G[i]), std::abs(b - Gt[i])});
            scale = std::max({scale, std::abs(a), std::abs(b)});
            G[i] = a;
            Gt[i] = b;
        }
        const double bound = m == 0.0 ? 0.0 : m / std::pow(out.p, 2 * k + 1);
        out.step_diff.push_back(diff);
        out.step_bound.push_back(bound);
        if (diff > bound * (1.0 + 1e-9) + 1e-15 * std::max(1.0, scale)) out.contraction_ok = false;
        if (diff <= 1e-16 * std::max(1.0, scale)) {
            ++k;
            break;
        }
    }
    out.iterations = k;
    out.rate_minus = out.rate_plus = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nz; ++i) {
        out.psi_minus.emplace_back(G[i], 1.0);
        out.psi_plus.emplace_back(1.0, Gt[i]);
        const double det = 1.0 - G[i] * Gt[i];
        out.det.push_back(det);
        out.max_det_dev = std::max(out.max_det_dev, std::abs(det - 1.0));
        Mob a = M(out.z[i]);
        out.rate_minus = std::min(out.rate_minus, std::log(std::abs(a.c * G[i] + a.d)));
        Mob b = Mt(-out.z[i]);
        out.rate_plus = std::min(out.rate_plus, std::log(std::abs(b.c * Gt[i] + b.d)));
    }
    return out;
}

MatrixFamily n_transform(const ModelCocycle& mc, cplx E, int grid) {
    double min_g0 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i)
        min_g0 = std::min(min_g0, std::abs(rho_v(mc, static_cast<double>(i) / grid, E).g0));
    if (mc.tau == 0.0 || min_g0 <= m12_tol(mc, E))
        throw Error(Errc::M12Vanishes, "M12 vanishes on the z-circle");
    return [mc, E](double z) {
        RhoV r = rho_v(mc, z, E);
        const cplx s = std::sqrt(r.rho);
        Eigen::Matrix2cd n;
        n << r.v / s, -s, 1.0 / s, 0.0;
        return n;
    };
}

}  // namespace qpspec
