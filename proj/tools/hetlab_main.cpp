// Command-line laboratory for the forced heteroclinic network: equilibria
// and saddle rates, trajectory/strobe integration, attractor diagnostics,
// the closed-form annulus return map with its horseshoe verification, and
// parameter sweeps with CSV/SVG artifacts.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure,
// 3 verification failed.  Options can come from a sectioned key = value
// config file (--config); explicit command-line flags win.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetlab/classify.hpp"
#include "hetlab/csv.hpp"
#include "hetlab/equilibria.hpp"
#include "hetlab/horseshoe.hpp"
#include "hetlab/route.hpp"
#include "hetlab/sweep.hpp"

using namespace hetlab;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_numerical = 2;
constexpr int exit_verification = 3;

// ---------------------------------------------------------------- helpers

void add_system_flags(CLI::App* c, SystemParams& p) {
    c->add_option("--alpha", p.alpha, "rotation/instability rate a")->capture_default_str();
    c->add_option("--beta", p.beta, "radial coupling b (negative)")->capture_default_str();
    c->add_option("--nu", p.nu, "constant tilt of the in-plane connection")
        ->capture_default_str();
    c->add_option("--mu", p.mu, "periodic drive amplitude")->capture_default_str();
    c->add_option("--omega", p.omega, "drive rate (theta' = 2 omega)")->capture_default_str();
}

void add_ic_flags(CLI::App* c, State4& s) {
    c->add_option("--x1", s.x1, "initial x1")->capture_default_str();
    c->add_option("--x2", s.x2, "initial x2")->capture_default_str();
    c->add_option("--x3", s.x3, "initial x3")->capture_default_str();
    c->add_option("--theta", s.theta, "initial drive phase")->capture_default_str();
}

void add_integ_flags(CLI::App* c, IntegratorConfig& cfg) {
    c->add_option("--rtol", cfg.rtol, "relative step tolerance")->capture_default_str();
    c->add_option("--atol", cfg.atol, "absolute step tolerance")->capture_default_str();
}

struct ModelFlags {
    ReturnMapModel m{};
    bool from_system = false;
    SystemParams p{};
};

void add_model_flags(CLI::App* c, ModelFlags& f) {
    c->add_option("--c-v", f.m.c_v, "contraction rate at v")->capture_default_str();
    c->add_option("--e-v", f.m.e_v, "expansion rate at v")->capture_default_str();
    c->add_option("--c-w", f.m.c_w, "contraction rate at w")->capture_default_str();
    c->add_option("--e-w", f.m.e_w, "expansion rate at w")->capture_default_str();
    c->add_option("--eps-v", f.m.eps_v, "outgoing annulus width at v")->capture_default_str();
    c->add_option("--eps-w", f.m.eps_w, "entry wall height at w")->capture_default_str();
    c->add_option("--omega", f.m.omega, "drive rate")->capture_default_str();
    c->add_option("--nu", f.m.xi.nu, "xi profile offset scale")->capture_default_str();
    c->add_option("--mu", f.m.xi.mu, "xi profile modulation amplitude")->capture_default_str();
    c->add_flag("--from-system", f.from_system,
                "derive the saddle rates from the flow linearization (uses --alpha/--beta)");
    c->add_option("--alpha", f.p.alpha, "flow parameter used with --from-system")
        ->capture_default_str();
    c->add_option("--beta", f.p.beta, "flow parameter used with --from-system")
        ->capture_default_str();
}

ReturnMapModel resolve_model(const ModelFlags& f) {
    if (!f.from_system) {
        f.m.validate();
        return f.m;
    }
    SystemParams p = f.p;
    p.nu = 0.0;   // rates are read off the unperturbed saddles
    p.mu = 0.0;
    p.omega = f.m.omega;
    ReturnMapModel m = ReturnMapModel::from_system(p, f.m.eps_v, f.m.eps_w);
    m.omega = f.m.omega;
    m.xi.nu = f.m.xi.nu;
    m.xi.mu = f.m.xi.mu;
    m.validate();
    return m;
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string tok = text.substr(pos, comma - pos);
        if (tok.empty())
            throw std::invalid_argument(std::string(what) + ": empty entry in list '" + text + "'");
        char* end = nullptr;
        out.push_back(std::strtod(tok.c_str(), &end));
        if (end == tok.c_str() || *end != '\0')
            throw std::invalid_argument(std::string(what) + ": bad number '" + tok + "'");
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

SweepAxis parse_axis(const std::string& text) {
    // name=lo:hi:count
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("--axis expects name=lo:hi:count, got '" + text + "'");
    SweepAxis ax;
    ax.name = text.substr(0, eq);
    const std::string rest = text.substr(eq + 1);
    const auto c1 = rest.find(':');
    const auto c2 = rest.find(':', c1 == std::string::npos ? rest.size() : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("--axis expects name=lo:hi:count, got '" + text + "'");
    try {
        ax.lo = std::stod(rest.substr(0, c1));
        ax.hi = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
        ax.count = std::stoi(rest.substr(c2 + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("--axis expects numeric lo:hi:count, got '" + text + "'");
    }
    return ax;
}

void print_complex_triple(const std::array<std::complex<double>, 3>& ev) {
    for (const auto& z : ev) {
        if (std::fabs(z.imag()) < 1e-14) std::printf("  %.12g", z.real());
        else std::printf("  %.12g%+.12gi", z.real(), z.imag());
    }
}

// --------------------------------------------------------------- commands

struct Cli {
    // equilibria
    struct {
        SystemParams p;
        bool rates = false;
        std::string out;
    } eq;

    // integrate
    struct {
        SystemParams p;
        State4 s0{0.1, 0.1, 0.5, 0.0};
        IntegratorConfig integ;
        double t_end = 100.0;
        double dt = 0.0;   // 0: t_end / 1000
        std::string out;
    } in;

    // strobe
    struct {
        SystemParams p;
        State4 s0{0.1, 0.1, 0.5, 0.0};
        IntegratorConfig integ;
        double theta_star = 0.0;
        int count = 100;
        int q = 1;
        std::string out;
    } st;

    // classify / lyapunov / rotation share the budget block
    struct {
        SystemParams p;
        State4 s0{0.05, 0.05, 0.3, 0.0};
        ClassifyOptions opt;
        std::string samples_out;
    } cl;

    struct {
        SystemParams p;
        State4 s0{0.05, 0.05, 0.3, 0.0};
        IntegratorConfig integ;
        double t_transient = 200.0;
        double t_total = 2000.0;
        int blocks = 20;
    } ly;

    struct {
        SystemParams p;
        State4 s0{0.05, 0.05, 0.3, 0.0};
        IntegratorConfig integ;
        int transient = 1000;
        int samples = 4096;
    } ro;

    // model-return-map
    struct {
        ModelFlags mf;
        double phi = 0.0;
        double r = 0.0;
        bool lifted = true;
    } rm;

    // omega0
    struct {
        ModelFlags mf;
        double phi_left = 0.0, phi_right = 0.0;
        bool explicit_window = false;
    } om;

    // horseshoe-verify
    struct {
        ModelFlags mf;
        int grid = 400;
        std::string strips_out;
        std::vector<std::string> itineraries;
        double r0 = 0.0;
    } hs;

    // sweep
    struct {
        SystemParams p;
        std::vector<std::string> axes;
        std::string task = "classify";
        std::uint64_t seed = 1;
        ClassifyOptions opt;
        int horseshoe_grid = 120;
        int workers = -1;
        std::string out;
        std::string manifest;
    } sw;

    // route-report
    struct {
        SystemParams p;
        std::string omegas;
        RouteOptions opt;
        std::string out;
        std::string panels_dir;
    } rt;
};

int cmd_equilibria(const Cli& cli) {
    const auto eqs = find_equilibria(cli.eq.p);
    std::printf("# %zu equilibria (alpha=%g beta=%g nu=%g)\n", eqs.size(), cli.eq.p.alpha,
                cli.eq.p.beta, cli.eq.p.nu);
    std::printf("%-26s %-8s %-12s eigenvalues\n", "location (x1,x2,x3)", "class", "residual");
    for (const auto& e : eqs) {
        std::printf("(%8.5f,%8.5f,%8.5f) %-8s %-12.3e", e.x1, e.x2, e.x3,
                    to_string(e.stability), e.residual);
        print_complex_triple(e.eigenvalues);
        std::printf("\n");
    }
    if (cli.eq.rates) {
        const NetworkRates nr = network_node_rates(cli.eq.p);
        std::printf("saddle rates: c_v=%.12g e_v=%.12g c_w=%.12g e_w=%.12g\n", nr.v.c, nr.v.e,
                    nr.w.c, nr.w.e);
    }
    if (!cli.eq.out.empty()) {
        CsvTable t({"x1", "x2", "x3", "class", "residual", "re_ev1", "im_ev1", "re_ev2", "im_ev2",
                    "re_ev3", "im_ev3"});
        for (const auto& e : eqs)
            t.add_row({e.x1, e.x2, e.x3, to_string(e.stability), e.residual,
                       e.eigenvalues[0].real(), e.eigenvalues[0].imag(), e.eigenvalues[1].real(),
                       e.eigenvalues[1].imag(), e.eigenvalues[2].real(), e.eigenvalues[2].imag()});
        t.save(cli.eq.out);
        std::printf("wrote %s\n", cli.eq.out.c_str());
    }
    return exit_ok;
}

int cmd_integrate(const Cli& cli) {
    const auto& a = cli.in;
    if (!(a.t_end > 0)) throw std::invalid_argument("--t-end must be positive");
    const double dt = a.dt > 0 ? a.dt : a.t_end / 1000.0;
    if (dt > a.t_end) throw std::invalid_argument("--dt exceeds --t-end");
    const Trajectory traj = integrate(a.p, a.s0, a.t_end, a.integ);
    const State4 fin = traj.at(a.t_end);
    std::printf("t=%.12g  x=(%.12g, %.12g, %.12g)  theta=%.12g  |x|=%.12g\n", a.t_end, fin.x1,
                fin.x2, fin.x3, fin.theta, fin.norm());
    if (!a.out.empty()) {
        CsvTable t({"t", "x1", "x2", "x3", "theta"});
        for (double tt = 0.0; tt <= a.t_end * (1 + 1e-12); tt += dt) {
            const State4 s = traj.at(std::min(tt, a.t_end));
            t.add_row({std::min(tt, a.t_end), s.x1, s.x2, s.x3, s.theta});
        }
        t.save(a.out);
        std::printf("wrote %s (%zu samples)\n", a.out.c_str(), t.n_rows());
    }
    return exit_ok;
}

int cmd_strobe(const Cli& cli) {
    const auto& a = cli.st;
    if (a.count < 1) throw std::invalid_argument("--count must be >= 1");
    if (a.q < 1) throw std::invalid_argument("--q must be >= 1");
    StrobeMap S(a.p, a.theta_star, a.integ);
    std::printf("# strobe period pi/omega = %.12g, reporting every %d period(s)\n", S.period(),
                a.q);
    CsvTable t({"n", "x1", "x2", "x3"});
    Eigen::Vector3d x(a.s0.x1, a.s0.x2, a.s0.x3);
    t.add_row({0, x[0], x[1], x[2]});
    for (int n = 1; n <= a.count; ++n) {
        x = S.apply(x, a.q);
        t.add_row({n, x[0], x[1], x[2]});
    }
    if (!a.out.empty()) {
        t.save(a.out);
        std::printf("wrote %s\n", a.out.c_str());
    } else {
        std::fputs(t.str().c_str(), stdout);
    }
    return exit_ok;
}

int cmd_classify(const Cli& cli) {
    const auto& a = cli.cl;
    const Classification c = classify_attractor(a.p, a.s0, 0.0, a.opt);
    std::printf("class: %s\n", to_string(c.type));
    if (c.q > 0) std::printf("locking: q = %d strobe periods\n", c.q);
    std::printf("lyapunov: %.6g +/- %.2g, %.6g +/- %.2g, %.6g +/- %.2g%s\n", c.lyap.exponents[0],
                c.lyap.std_errors[0], c.lyap.exponents[1], c.lyap.std_errors[1],
                c.lyap.exponents[2], c.lyap.std_errors[2], c.lyap.chaotic ? "  [chaotic]" : "");
    if (c.rotation.error > 0 || c.rotation.value != 0)
        std::printf("rotation number: %.9g (error est %.2g)\n", c.rotation.value,
                    c.rotation.error);
    if (c.circle.ok)
        std::printf("invariant circle: %d modes, residual %.3e, max gap %.3g\n", c.circle.n_modes,
                    c.circle.max_residual, c.circle.max_gap);
    if (!a.samples_out.empty()) {
        CsvTable t({"n", "x1", "x2", "x3"});
        for (std::size_t k = 0; k < c.samples.size(); ++k)
            t.add_row({long(k), c.samples[k][0], c.samples[k][1], c.samples[k][2]});
        t.save(a.samples_out);
        std::printf("wrote %s\n", a.samples_out.c_str());
    }
    return exit_ok;
}

int cmd_lyapunov(const Cli& cli) {
    const auto& a = cli.ly;
    const LyapunovResult l =
        lyapunov_spectrum(a.p, a.s0, a.t_transient, a.t_total, a.integ, a.blocks);
    for (int k = 0; k < 3; ++k)
        std::printf("lambda%d = %.9g +/- %.3g\n", k + 1, l.exponents[k], l.std_errors[k]);
    std::printf("t_total = %.6g, renormalizations = %d, chaotic = %s\n", l.t_total, l.n_renorm,
                l.chaotic ? "yes" : "no");
    return exit_ok;
}

int cmd_rotation(const Cli& cli) {
    const auto& a = cli.ro;
    if (a.samples < 64) throw std::invalid_argument("--samples must be >= 64");
    StrobeMap S(a.p, 0.0, a.integ);
    Eigen::Vector3d x(a.s0.x1, a.s0.x2, a.s0.x3);
    for (int i = 0; i < a.transient; ++i) x = S.apply(x);
    std::vector<Eigen::Vector3d> xs(std::size_t(a.samples));
    for (auto& v : xs) {
        x = S.apply(x);
        if (!(x.norm() < 5.0)) throw Divergence("orbit escaped during rotation sampling");
        v = x;
    }
    const RotationNumber rho = rotation_number(xs);
    std::printf("rho = %.12g  (short-way rate %.12g, error est %.3g)\n", rho.value,
                rho.winding_rate, rho.error);
    return exit_ok;
}

int cmd_model_return_map(const Cli& cli) {
    const ReturnMapModel m = resolve_model(cli.rm.mf);
    const double phi = cli.rm.phi, r = cli.rm.r;
    const AnnulusPoint<double> img = return_map(m, AnnulusPoint<double>{phi, r}, cli.rm.lifted);
    const Mat2 J = d_return_map(m, phi, r);
    std::printf("model: delta=%.12g  K=%.12g  k_eps=%.12g  C=%.12g\n", m.delta(), m.K(),
                m.k_eps(), m.radial_coeff());
    std::printf("s(phi, r) = %.17g\n", (r - 1.0) + m.xi.eval(phi));
    std::printf("R(phi, r) = (%.17g, %.17g)%s\n", img.phi, img.r,
                cli.rm.lifted ? "  [lifted phase]" : "");
    std::printf("DR = [ %.17g  %.17g ]\n     [ %.17g  %.17g ]\n", J.a11, J.a12, J.a21, J.a22);
    return exit_ok;
}

int cmd_omega0(const Cli& cli) {
    const ReturnMapModel m = resolve_model(cli.om.mf);
    AngleWindow win{};
    if (cli.om.explicit_window) {
        win = {cli.om.phi_left, cli.om.phi_right};
        if (!(win.phi_left < win.phi_right))
            throw std::invalid_argument("--phi-left must be below --phi-right");
    } else {
        try {
            win = build_domain(m).window;   // same window horseshoe-verify uses
        } catch (const NoWindow&) {
            win = m.xi.decreasing_arc();
            std::printf("note: no admissible verification window; using full decreasing arc\n");
        }
    }
    const double w0 = omega0(m, win);
    std::printf("window: [%.12g, %.12g]  xi: %.12g -> %.12g\n", win.phi_left, win.phi_right,
                m.xi.eval(win.phi_left), m.xi.eval(win.phi_right));
    std::printf("K = %.17g\n", m.K());
    std::printf("omega0 = %.17g\n", w0);
    std::printf("model omega = %.12g  (%s omega0)\n", m.omega, m.omega >= w0 ? ">=" : "<");
    return exit_ok;
}

void print_strip_csv(const ConleyMoserReport& rep, const std::string& path) {
    CsvTable t({"strip", "symbol", "kind", "winding", "sample", "param", "lower", "upper"});
    auto emit = [&](const StripSpec& sp, const std::string& name) {
        for (std::size_t k = 0; k < sp.lower.size(); ++k) {
            const double u =
                sp.param_lo + (sp.param_hi - sp.param_lo) * double(k) / double(sp.lower.size() - 1);
            t.add_row({name, sp.symbol, sp.kind == StripSpec::Kind::vertical ? "V" : "H",
                       sp.winding, long(k), u, sp.lower[k], sp.upper[k]});
        }
    };
    emit(rep.V1, "V1");
    emit(rep.V2, "V2");
    for (std::size_t i = 0; i < rep.H1.size(); ++i)
        emit(rep.H1[i], "H1." + std::to_string(rep.H1[i].winding));
    for (std::size_t i = 0; i < rep.H2.size(); ++i)
        emit(rep.H2[i], "H2." + std::to_string(rep.H2[i].winding));
    t.save(path);
    std::printf("wrote %s (%zu rows)\n", path.c_str(), t.n_rows());
}

int cmd_horseshoe_verify(const Cli& cli) {
    const ReturnMapModel m = resolve_model(cli.hs.mf);
    HorseshoeDomain dom{};
    try {
        dom = build_domain(m);
    } catch (const NoWindow& e) {
        std::printf("no construction window: %s\n", e.what());
        throw VerificationFailed(e.what());
    }
    const ConleyMoserReport rep = verify_conley_moser(m, dom, cli.hs.grid);

    std::printf("window  [%.12g, %.12g]   I1 [%.12g, %.12g]   I2 [%.12g, %.12g]\n",
                dom.window.phi_left, dom.window.phi_right, dom.I1.phi_left, dom.I1.phi_right,
                dom.I2.phi_left, dom.I2.phi_right);
    std::printf("omega   %.12g   threshold omega0 = %.12g\n", m.omega, dom.omega_min);
    std::printf("ladders H1: %zu full rungs (windings %ld..%ld, %d partial)\n", rep.H1.size(),
                rep.H1.empty() ? 0 : rep.H1.front().winding,
                rep.H1.empty() ? 0 : rep.H1.back().winding, rep.partial1);
    std::printf("        H2: %zu full rungs (windings %ld..%ld, %d partial)\n", rep.H2.size(),
                rep.H2.empty() ? 0 : rep.H2.front().winding,
                rep.H2.empty() ? 0 : rep.H2.back().winding, rep.partial2);
    std::printf("P1 full crossing      %s   (min %d full copies per fiber)\n",
                rep.p1_ok ? "PASS" : "FAIL", rep.fiber_min_copies);
    std::printf("P2 phase expansion    %s   (min dR1/dphi = %.9g)\n", rep.p2_ok ? "PASS" : "FAIL",
                rep.expansion_min);
    std::printf("P3 radial contraction %s   (max dR2/dr = %.9g, min rung gap = %.3e)\n",
                rep.p3_ok ? "PASS" : "FAIL", rep.lambda_h, rep.min_gap);
    std::printf("grid stability        %s   (grid %d vs %d)\n", rep.stable ? "PASS" : "FAIL",
                rep.grid_n, 2 * rep.grid_n);
    if (rep.pass()) {
        std::printf("winding vectors: v1 = %ld, v2 = %ld\n", rep.v1, rep.v2);
        std::printf("fixed points: sym1 (%.12g, %.12g) multipliers %.9g / %.9g\n", rep.fix1_phi,
                    rep.fix1_r, rep.fix1_mult_u, rep.fix1_mult_s);
        std::printf("              sym2 (%.12g, %.12g) multipliers %.9g / %.9g\n", rep.fix2_phi,
                    rep.fix2_r, rep.fix2_mult_u, rep.fix2_mult_s);
        std::printf("entropy lower bound: log 2 = %.12g\n", entropy_lower_bound(rep));
    } else {
        std::printf("first violation: %s\n", rep.first_violation.c_str());
    }
    if (!cli.hs.strips_out.empty()) print_strip_csv(rep, cli.hs.strips_out);

    if (!cli.hs.itineraries.empty() && rep.pass()) {
        for (const std::string& w : cli.hs.itineraries) {
            const ItineraryResult it = itinerary_shadow(m, rep, w, cli.hs.r0);
            std::printf("shadow '%s': phi0 = %.17g, r0 = %.17g\n", w.c_str(), it.phi0, it.r0);
            std::printf("  windings:");
            for (long n : it.windings) std::printf(" %ld", n);
            std::printf("  (deviation %+ld)\n", it.deviation);
            std::printf("  pin width %.3e, residual %.3e\n", it.pin_width, it.residual);
        }
    }
    if (!rep.pass()) throw VerificationFailed("horseshoe-verify: " + rep.first_violation);
    return exit_ok;
}

int cmd_sweep(const Cli& cli) {
    const auto& a = cli.sw;
    SweepSpec spec;
    spec.base = a.p;
    for (const auto& s : a.axes) spec.axes.push_back(parse_axis(s));
    spec.task = sweep_task_from(a.task);
    spec.seed = a.seed;
    spec.cls = a.opt;
    spec.horseshoe_grid = a.horseshoe_grid;
    spec.validate();

    // effective settings snapshot: hashed into the manifest, saved alongside
    Config eff;
    eff.set("system", "alpha", spec.base.alpha);
    eff.set("system", "beta", spec.base.beta);
    eff.set("system", "nu", spec.base.nu);
    eff.set("system", "mu", spec.base.mu);
    eff.set("system", "omega", spec.base.omega);
    for (std::size_t k = 0; k < spec.axes.size(); ++k) {
        const std::string key = "axis" + std::to_string(k + 1);
        eff.set("sweep", key,
                spec.axes[k].name + "=" + format_double(spec.axes[k].lo) + ":" +
                    format_double(spec.axes[k].hi) + ":" + std::to_string(spec.axes[k].count));
    }
    eff.set("sweep", "task", to_string(spec.task));
    eff.set("sweep", "seed", std::to_string(spec.seed));
    eff.set("sweep", "transient", std::to_string(spec.cls.n_transient));
    eff.set("sweep", "samples", std::to_string(spec.cls.n_samples));
    eff.set("sweep", "t_lyapunov", format_double(spec.cls.t_lyapunov));

    const int workers = a.workers > 0 ? a.workers : sweep_worker_count();
    std::printf("sweep: %zu grid points, task %s, %d worker(s)\n", spec.grid_size(),
                to_string(spec.task), workers);
    SweepResult res = run_sweep(spec, a.out, eff.hash(), workers, &std::cerr);
    if (res.resumed_rows)
        std::printf("resumed: %zu point(s) already on disk\n", res.resumed_rows);

    if (!a.out.empty()) {
        const std::string cfg_path = a.out + ".config";
        std::ofstream cf(cfg_path, std::ios::binary);
        if (!cf) throw std::runtime_error("cannot write " + cfg_path);
        cf << eff.canonical_text();
        cf.close();
        res.manifest.outputs.push_back(cfg_path);
        const std::string man_path = a.manifest.empty() ? a.out + ".manifest" : a.manifest;
        res.manifest.save(man_path);
        std::printf("wrote %s, %s, %s\n", a.out.c_str(), cfg_path.c_str(), man_path.c_str());
    }
    std::printf("done: %zu new row(s), %zu failure(s), config hash %s\n", res.table.n_rows(),
                res.failures, hex64(res.manifest.config_hash).c_str());
    return exit_ok;
}

int cmd_route_report(const Cli& cli) {
    const auto& a = cli.rt;
    const std::vector<double> omegas = parse_number_list(a.omegas, "--omegas");
    const RouteReport rep = route_report(a.p, omegas, a.opt);

    for (const RoutePoint& pt : rep.points) {
        std::printf("omega %-10.6g %-20s", pt.omega, to_string(pt.type));
        if (pt.has_curve)
            std::printf(" folds %-4d (%s curve, %zu pts, %d strobes)", pt.fold.folds,
                        pt.curve_fitted ? "fitted" : "median", pt.fold.src.size(),
                        pt.fold.strobes);
        else
            std::printf(" no invariant curve");
        std::printf("  lambda1 %9.5f +/- %.5f%s\n", pt.lambda1, pt.lambda1_err,
                    pt.chaotic ? " [chaotic]" : "");
    }
    if (rep.transition_found)
        std::printf("fold onset bracketed: omega in [%.9g, %.9g]  (rel width %.3g)\n",
                    rep.bracket_lo, rep.bracket_hi,
                    (rep.bracket_hi - rep.bracket_lo) / rep.bracket_hi);
    else
        std::printf("fold onset not bracketed on this omega list\n");

    if (!a.out.empty()) {
        route_csv(rep).save(a.out);
        std::printf("wrote %s\n", a.out.c_str());
    }
    if (!a.panels_dir.empty()) {
        std::filesystem::create_directories(a.panels_dir);
        for (std::size_t i = 0; i < rep.points.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "/panel_%02zu.svg", i);
            const std::string path = a.panels_dir + name;
            std::ofstream f(path, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + path);
            f << route_panel_svg(rep, i);
        }
        std::printf("wrote %zu panel(s) under %s\n", rep.points.size(), a.panels_dir.c_str());
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for a periodically forced heteroclinic network"};
    app.set_help_flag("--help", "print usage");
    app.set_config("--config", "", "sectioned key = value file; explicit flags win");
    app.require_subcommand(1);
    app.get_formatter()->column_width(34);

    Cli cli;
    int (*run)(const Cli&) = nullptr;

    auto* eq = app.add_subcommand("equilibria", "equilibria, eigenvalues and saddle rates");
    add_system_flags(eq, cli.eq.p);
    eq->add_flag("--rates", cli.eq.rates, "also print the network saddle rates");
    eq->add_option("--out", cli.eq.out, "write the table as CSV");
    eq->callback([&] { run = cmd_equilibria; });

    auto* in = app.add_subcommand("integrate", "integrate one trajectory");
    add_system_flags(in, cli.in.p);
    add_ic_flags(in, cli.in.s0);
    add_integ_flags(in, cli.in.integ);
    in->add_option("--t-end", cli.in.t_end, "integration time")->capture_default_str();
    in->add_option("--dt", cli.in.dt, "output sample spacing (default t_end/1000)");
    in->add_option("--out", cli.in.out, "write sampled trajectory CSV");
    in->callback([&] { run = cmd_integrate; });

    auto* st = app.add_subcommand("strobe", "iterate the stroboscopic section map");
    add_system_flags(st, cli.st.p);
    add_ic_flags(st, cli.st.s0);
    add_integ_flags(st, cli.st.integ);
    st->add_option("--theta-star", cli.st.theta_star, "section phase")->capture_default_str();
    st->add_option("--count", cli.st.count, "iterates to report")->capture_default_str();
    st->add_option("--q", cli.st.q, "strobe periods per iterate")->capture_default_str();
    st->add_option("--out", cli.st.out, "write iterates CSV (default: stdout)");
    st->callback([&] { run = cmd_strobe; });

    auto* cl = app.add_subcommand("classify", "classify the attractor seen from one orbit");
    add_system_flags(cl, cli.cl.p);
    add_ic_flags(cl, cli.cl.s0);
    add_integ_flags(cl, cli.cl.opt.integ);
    cl->add_option("--transient", cli.cl.opt.n_transient, "strobe iterates to discard")
        ->capture_default_str();
    cl->add_option("--samples", cli.cl.opt.n_samples, "strobe samples to analyze")
        ->capture_default_str();
    cl->add_option("--t-lyapunov", cli.cl.opt.t_lyapunov, "Lyapunov integration time")
        ->capture_default_str();
    cl->add_option("--q-max", cli.cl.opt.q_max, "largest locking period tested")
        ->capture_default_str();
    cl->add_option("--samples-out", cli.cl.samples_out, "write the strobe samples CSV");
    cl->callback([&] { run = cmd_classify; });

    auto* ly = app.add_subcommand("lyapunov", "Lyapunov spectrum of one orbit");
    add_system_flags(ly, cli.ly.p);
    add_ic_flags(ly, cli.ly.s0);
    add_integ_flags(ly, cli.ly.integ);
    ly->add_option("--t-transient", cli.ly.t_transient, "discarded lead-in time")
        ->capture_default_str();
    ly->add_option("--t-total", cli.ly.t_total, "averaging time")->capture_default_str();
    ly->add_option("--blocks", cli.ly.blocks, "error-estimate blocks")->capture_default_str();
    ly->callback([&] { run = cmd_lyapunov; });

    auto* ro = app.add_subcommand("rotation", "rotation number on the strobe section");
    add_system_flags(ro, cli.ro.p);
    add_ic_flags(ro, cli.ro.s0);
    add_integ_flags(ro, cli.ro.integ);
    ro->add_option("--transient", cli.ro.transient, "strobe iterates to discard")
        ->capture_default_str();
    ro->add_option("--samples", cli.ro.samples, "strobe samples to analyze")
        ->capture_default_str();
    ro->callback([&] { run = cmd_rotation; });

    auto* rm = app.add_subcommand("model-return-map",
                                  "evaluate the closed-form annulus return map");
    add_model_flags(rm, cli.rm.mf);
    rm->add_option("--phi", cli.rm.phi, "entry angle")->required();
    rm->add_option("--r", cli.rm.r, "entry radius in (1, 1+eps_v]")->required();
    rm->add_flag("--lifted,!--wrapped", cli.rm.lifted,
                 "report the lifted image phase (--wrapped folds it to [0, 2pi))");
    rm->callback([&] { run = cmd_model_return_map; });

    auto* om = app.add_subcommand("omega0", "stretch threshold of the annulus map");
    add_model_flags(om, cli.om.mf);
    auto* pl = om->add_option("--phi-left", cli.om.phi_left, "window left edge");
    auto* pr = om->add_option("--phi-right", cli.om.phi_right, "window right edge");
    pl->needs(pr);
    pr->needs(pl);
    om->callback([&] {
        cli.om.explicit_window = pl->count() > 0;
        run = cmd_omega0;
    });

    auto* hs = app.add_subcommand("horseshoe-verify",
                                  "verify the rotational horseshoe of the annulus map");
    add_model_flags(hs, cli.hs.mf);
    hs->add_option("--grid", cli.hs.grid, "verification grid resolution")->capture_default_str();
    hs->add_option("--strips-out", cli.hs.strips_out, "write strip boundary CSV");
    hs->add_option("--itinerary", cli.hs.itineraries,
                   "symbol word over {1,2} to shadow (repeatable)");
    hs->add_option("--itinerary-r0", cli.hs.r0, "radial level for shadowing (default: fixed point)");
    hs->callback([&] { run = cmd_horseshoe_verify; });

    auto* sw = app.add_subcommand("sweep", "parameter sweep with per-point diagnostics");
    add_system_flags(sw, cli.sw.p);
    add_integ_flags(sw, cli.sw.opt.integ);
    sw->add_option("--axis", cli.sw.axes, "swept axis, name=lo:hi:count (1 or 2 times)")
        ->required()
        ->expected(1, 2);
    sw->add_option("--task", cli.sw.task, "classify | lyapunov | rotation | horseshoe")
        ->capture_default_str();
    sw->add_option("--seed", cli.sw.seed, "initial-condition seed")->capture_default_str();
    sw->add_option("--transient", cli.sw.opt.n_transient, "strobe iterates to discard")
        ->capture_default_str();
    sw->add_option("--samples", cli.sw.opt.n_samples, "strobe samples per point")
        ->capture_default_str();
    sw->add_option("--t-lyapunov", cli.sw.opt.t_lyapunov, "Lyapunov integration time")
        ->capture_default_str();
    sw->add_option("--horseshoe-grid", cli.sw.horseshoe_grid,
                   "verification grid for task=horseshoe")
        ->capture_default_str();
    sw->add_option("--workers", cli.sw.workers,
                   "worker threads (default: HETLAB_WORKERS or hardware)");
    sw->add_option("--out", cli.sw.out, "output CSV path (resumes if present)");
    sw->add_option("--manifest", cli.sw.manifest, "manifest path (default: <out>.manifest)");
    sw->callback([&] { run = cmd_sweep; });

    auto* rt = app.add_subcommand("route-report",
                                  "invariant-curve breakdown along an omega sweep");
    add_system_flags(rt, cli.rt.p);
    add_integ_flags(rt, cli.rt.opt.cls.integ);
    rt->get_option("--omega")->group("");   // swept; hide the fixed value
    rt->add_option("--omegas", cli.rt.omegas, "ascending comma-separated omega list")->required();
    rt->add_option("--seed", cli.rt.opt.seed, "initial-condition seed")->capture_default_str();
    rt->add_option("--transient", cli.rt.opt.cls.n_transient, "strobe iterates to discard")
        ->capture_default_str();
    rt->add_option("--samples", cli.rt.opt.cls.n_samples, "strobe samples per point")
        ->capture_default_str();
    rt->add_option("--t-lyapunov", cli.rt.opt.cls.t_lyapunov, "Lyapunov integration time")
        ->capture_default_str();
    rt->add_option("--fold-horizon", cli.rt.opt.fold_horizon, "image horizon in time units")
        ->capture_default_str();
    rt->add_option("--fold-prominence", cli.rt.opt.fold_prominence,
                   "angular reversal depth counted as a fold")
        ->capture_default_str();
    rt->add_option("--bracket-rel", cli.rt.opt.bracket_rel, "relative onset bracket width")
        ->capture_default_str();
    rt->add_option("--out", cli.rt.out, "summary CSV path");
    rt->add_option("--panels-dir", cli.rt.panels_dir, "directory for per-omega SVG panels");
    rt->callback([&] { run = cmd_route_report; });

    try {
        app.parse(argc, argv);
        return run ? run(cli) : exit_validation;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_validation;
    } catch (const VerificationFailed& e) {
        std::fprintf(stderr, "verification failed: %s\n", e.what());
        return exit_verification;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return exit_validation;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return exit_validation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_numerical;
    }
}
