// Acceptance run on the bundled wsc-example scenario. One PASS/FAIL line per
// criterion; exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

#include "fixtures.hpp"
#include "stopspa/experiments.hpp"
#include "stopspa/parallel.hpp"

using namespace stopspa;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Key {
    std::string method;
    double theta;
    std::size_t n;
    double delta;
    auto operator<=>(const Key&) const = default;
};

// E[v_2(theta)] from h0 = 0 by nested quadrature over the two uniform transitions.
// Period 0 waits (h0 < theta); period 1 transplants if h1 >= theta; period 2 is the
// last one and pays r(h2) or c.
double expected_v2(double theta, double lambda) {
    const double c = 0.5;
    auto r = [](double h) { return 8.0 * (1.0 - h); };
    auto period2 = [&](double x) {
        const double dens = 1.0 / (1.0 - x);
        const double stop = fixtures::simpson([&](double y) { return r(y) * dens; }, theta, 1.0);
        const double wait = fixtures::simpson([&](double) { return c * dens; }, x, theta);
        return stop + wait;
    };
    const double stop1 = fixtures::simpson(r, theta, 1.0);
    const double wait1 = fixtures::simpson([&](double x) { return c + lambda * period2(x); }, 0.0, theta);
    return c + lambda * (stop1 + wait1);
}

}  // namespace

int main() {
    const auto t_start = std::chrono::steady_clock::now();
    const fs::path out = fs::temp_directory_path() / "stopspa_acceptance";
    fs::remove_all(out);

    const auto config = load_config(STOPSPA_SCENARIO_DIR "/wsc-example.ini");
    config.validate();
    const auto model = config.build_model();
    const double lambda = model.discount();
    const double h0 = config.run.h0;
    std::printf("scenario wsc-example: lambda=%.2f h0=%.2f horizon=%zu seed=%llu workers=%d\n", lambda, h0,
                config.run.horizon, static_cast<unsigned long long>(config.run.seed),
                resolve_workers(config.run.workers));

    // Table-1 style sweep: theta x N x {SPA, FD(0.01), FD(0.05), FD(0.1)}.
    auto sweep_cfg = config;
    sweep_cfg.run.workers = 4;
    const auto t_sweep = std::chrono::steady_clock::now();
    const auto sweep = run_sweep(sweep_cfg, {out / "w4", nullptr});
    const double sweep_s = seconds_since(t_sweep);
    std::map<Key, SweepCell> cells;
    for (const auto& c : sweep.cells) cells[{c.method, c.theta, c.reps, c.delta.value_or(0.0)}] = c;
    auto cell = [&](const char* m, double th, std::size_t n, double d = 0.0) { return cells.at({m, th, n, d}); };
    std::printf("sweep: %zu cells, %zu failed, %.1f s\n", sweep.cells.size(), sweep.failures, sweep_s);

    std::map<double, double> oracle;
    for (double th : {0.2, 0.5, 0.8}) {
        oracle[th] = oracle_derivative(model, th, h0);
        std::printf("  oracle dV/dtheta(%.1f) = %.5f (closed form %.5f)\n", th, oracle[th], fixtures::wsc_derivative(th, lambda));
    }

    {  // 1
        bool ok = sweep.failures == 0;
        std::string d;
        for (double th : {0.2, 0.5, 0.8}) {
            const auto s = cell("SPA", th, 1000000);
            const double tol = std::max(3 * s.se, 0.02 * std::abs(oracle[th]));
            const bool pass = std::abs(s.mean - oracle[th]) <= tol;
            ok &= pass && oracle[th] < 0;
            d += fmt("theta=%.1f SPA %.4f (%.4f) oracle %.4f tol %.4f; ", th, s.mean, s.se, oracle[th], tol);
        }
        ok &= std::abs(oracle[0.2]) > std::abs(oracle[0.5]) && std::abs(oracle[0.5]) > std::abs(oracle[0.8]);
        ok &= sweep_s < 300;
        verdict(1, "SPA vs DP oracle", ok, d + fmt("sweep %.1f s", sweep_s));
    }
    {  // 2
        bool ok = true;
        std::string d;
        for (double th : {0.2, 0.5, 0.8}) {
            const auto s = cell("SPA", th, 1000000);
            const auto f = cell("FD", th, 1000000, 0.01);
            const double tol = 3 * std::hypot(s.se, f.se);
            ok &= std::abs(s.mean - f.mean) <= tol;
            d += fmt("theta=%.1f |%.4f - %.4f| <= %.4f; ", th, s.mean, f.mean, tol);
        }
        verdict(2, "SPA vs FD(0.01, CRN)", ok, d);
    }
    {  // 3
        bool ok = true;
        std::string d;
        for (double th : {0.2, 0.5, 0.8}) {
            const auto s = cell("SPA", th, 10000);
            const auto f = cell("FD", th, 10000, 0.01);
            ok &= s.se < f.se / 5;
            d += fmt("theta=%.1f se SPA %.4f vs FD %.4f (ratio 1/%.1f); ", th, s.se, f.se, f.se / s.se);
        }
        verdict(3, "variance ordering at N=1e4", ok, d);
    }
    {  // 4
        const double o = oracle[0.8];
        const auto wide = cell("FD", 0.8, 1000000, 0.1);
        const auto narrow = cell("FD", 0.8, 1000000, 0.01);
        const double bw = std::abs(wide.mean - o);
        const double bn = std::abs(narrow.mean - o);
        verdict(4, "FD bias-variance trade-off", bw > 0.4 * std::abs(o) && bn < 0.1 * std::abs(o),
                fmt("theta=0.8 FD(0.1) %.4f bias %.1f%% (need > 40%%), FD(0.01) %.4f bias %.1f%% (need < 10%%), "
                    "FD(0.1) curvature bias from the oracle's own V: %.4f",
                    wide.mean, 100 * bw / std::abs(o), narrow.mean, 100 * bn / std::abs(o),
                    (fixtures::wsc_policy_value(0.85, lambda) - fixtures::wsc_policy_value(0.75, lambda)) / 0.1 - o));
    }
    {  // 5
        const auto t0 = std::chrono::steady_clock::now();
        const double th = 0.5;
        const double dd = 1e-5;
        const double brute = (expected_v2(th + dd / 2, lambda) - expected_v2(th - dd / 2, lambda)) / dd;
        const RandomStreamFactory f(config.run.seed);
        const auto s = spa_estimate(model, th, h0, 2, 1000000, config.estimator.aux_reps, f, 4);
        const double secs = seconds_since(t0);
        verdict(5, "unbiasedness at n=2", std::abs(s.mean - brute) <= 3 * s.se && secs < 60,
                fmt("brute-force dE[v_2]/dtheta %.5f, SPA %.5f (%.5f), |diff| %.2f se, %.1f s", brute, s.mean, s.se,
                    std::abs(s.mean - brute) / s.se, secs));
    }
    {  // 6
        const RandomStreamFactory f(config.run.seed);
        const auto g = ipa_estimate(model, 0.5, h0, config.run.horizon, 1000000, f);
        bool zero = g.mean == 0.0 && g.se == 0.0 && g.values.size() == 1000000;
        for (double v : g.values) zero &= v == 0.0;
        verdict(6, "IPA degeneracy", zero && oracle[0.5] != 0.0,
                fmt("IPA mean %.1f se %.1f over %zu reps, oracle %.4f", g.mean, g.se, g.values.size(), oracle[0.5]));
    }
    double theta_star = 0.0;
    {  // 7
        ValueIterationOptions o;
        o.nodes = config.solve.nodes;
        o.tol = config.solve.tol;
        o.max_iter = config.solve.max_iter;
        o.workers = 4;
        const auto v = value_iterate(model, o);
        double worst_rise = 0.0;
        std::vector<double> live(v.values.begin(), v.values.end());
        live.back() = v.left_limit;  // approach to H_D from the left
        for (std::size_t i = 1; i < live.size(); ++i) worst_rise = std::max(worst_rise, live[i] - live[i - 1]);
        const auto lim = extract_control_limit(model, v);
        theta_star = lim.theta;

        const std::size_t stride = 8;
        double best = -1.0;
        double arg = 0.0;
        for (std::size_t i = 0; i < v.nodes.size(); i += stride) {
            const double val = policy_value(model, v.nodes[i], h0, v.nodes).value;
            if (val > best) {
                best = val;
                arg = v.nodes[i];
            }
        }
        const double cell_width = v.nodes[stride] - v.nodes[0];
        const auto rep = check_assumptions(model, assumption_grid(model));
        const auto ifr = check_ifr(model.kernel(), linspace(0.0, model.upper(), 101));
        const bool ok = v.converged && v.monotone_iterates && worst_rise <= 1e-6 &&
                        std::abs(arg - lim.theta) <= cell_width && lim.threshold_structure && rep.all_pass() && ifr.pass;
        verdict(7, "structural results", ok,
                fmt("VI %zu iters, monotone iterates %s (max decrease %.2e), max rise in h %.2e, theta*=%.4f, "
                    "sweep argmax %.4f (V=%.4f, cell %.4f), assumptions %s, IFR %s",
                    v.iterations, v.monotone_iterates ? "yes" : "no", v.max_decrease, worst_rise, lim.theta, arg, best,
                    cell_width, rep.all_pass() ? "pass" : "fail", ifr.pass ? "pass" : "fail"));
    }
    {  // 8
        auto serial = config;
        serial.run.workers = 1;
        run_sweep(serial, {out / "w1", nullptr});
        bool same = true;
        for (const char* f : {"sweep.csv", "sweep_table.csv"}) same &= slurp(out / "w1" / f) == slurp(out / "w4" / f);

        const std::string cli = STOPSPA_CLI;
        auto run = [&](const std::string& args) {
            return std::system((cli + " " + args + " > /dev/null").c_str()) == 0;
        };
        bool cli_ok = true;
        for (int w : {1, 3}) {
            const auto dir = out / ("cli" + std::to_string(w));
            const std::string base = "--workers " + std::to_string(w) + " --out " + dir.string();
            cli_ok &= run(base + " gradient --method spa --reps 100000");
            cli_ok &= run(base + " gradient --method fd --reps 100000 --delta 0.05");
            fs::rename(dir / "gradient.csv", dir / "gradient_fd.csv");
            cli_ok &= run(base + " gradient --method spa --reps 100000");
            cli_ok &= run(base + " simulate --reps 100000");
            cli_ok &= run(base + " solve");
            cli_ok &= run(base + " optimize --iterations 20");
        }
        for (const char* f : {"gradient.csv", "gradient_fd.csv", "simulate.csv", "value.csv", "optimize.csv"})
            same &= slurp(out / "cli1" / f) == slurp(out / "cli3" / f) && !slurp(out / "cli1" / f).empty();
        verdict(8, "determinism across worker counts", same && cli_ok,
                same ? "sweep.csv, sweep_table.csv and CLI gradient/simulate/solve/optimize CSVs byte-identical for "
                       "workers 1 vs 4 (sweep) and 1 vs 3 (CLI)"
                     : "CSV bytes differ between worker counts");
    }
    {  // 9
        const RunContext ctx{out / "optimize", nullptr};
        const auto trace = optimize_theta(config, ctx);
        const double final_theta = trace.back().theta;
        verdict(9, "optimizer sanity", std::abs(final_theta - theta_star) <= 0.05 && trace.size() <= 501,
                fmt("theta0=%.2f -> theta_%zu=%.4f, theta*=%.4f (|diff| %.4f, need <= 0.05); V_theta(0) at the "
                    "result %.4f vs at H-clip %.4f",
                    config.optimize.theta0, trace.size() - 1, final_theta, theta_star, std::abs(final_theta - theta_star),
                    fixtures::wsc_policy_value(final_theta, lambda),
                    fixtures::wsc_policy_value(model.upper() - config.optimize.clip, lambda)));
        auto hi = config;
        hi.optimize.theta0 = 0.95;
        const auto t2 = optimize_theta(hi, {out / "optimize_hi", nullptr});
        std::printf("  info: from theta0=0.95 the same loop ends at %.4f (gradient is positive above ~0.88)\n",
                    t2.back().theta);
    }

    std::printf("%d criteria failed, total %.1f s\n", failures, seconds_since(t_start));
    return failures == 0 ? 0 : 1;
}
