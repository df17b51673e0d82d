#include "stopspa/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "stopspa/parallel.hpp"

namespace stopspa {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::ofstream open_csv(const RunContext& ctx, const std::string& name) {
    std::filesystem::create_directories(ctx.out_dir);
    const auto path = ctx.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::ostream& log(const RunContext& ctx) {
    static std::ostream discard(nullptr);
    return ctx.log ? *ctx.log : discard;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s) ^ tag;
    return splitmix64(h);
}

ValueIterationOptions vi_options(const ExperimentConfig& c) {
    ValueIterationOptions o;
    o.nodes = c.solve.nodes;
    o.tol = c.solve.tol;
    o.max_iter = c.solve.max_iter;
    o.workers = c.run.workers;
    return o;
}

GradEstimate estimate(const StoppingModel& model, GradMethod method, double theta,
                      const ExperimentConfig& c, std::size_t reps, double delta,
                      const RandomStreamFactory& factory) {
    switch (method) {
        case GradMethod::spa:
            return spa_estimate(model, theta, c.run.h0, c.run.horizon, reps, c.estimator.aux_reps,
                                factory, c.run.workers);
        case GradMethod::fd:
            return fd_estimate(model, theta, c.run.h0, c.run.horizon, reps, delta, c.estimator.crn,
                               factory, c.run.workers);
        case GradMethod::ipa:
            return ipa_estimate(model, theta, c.run.h0, c.run.horizon, reps, factory);
    }
    throw std::logic_error("unreachable");
}

}  // namespace

AssumptionReport run_check(const ExperimentConfig& config, const RunContext& ctx) {
    const auto model = config.build_model();
    const auto report = check_assumptions(model, assumption_grid(model));
    auto out = open_csv(ctx, "check.csv");
    out << "name,applicable,pass,worst,note\n";
    auto& os = log(ctx);
    for (const auto& c : report.checks) {
        out << c.name << "," << (c.applicable ? 1 : 0) << "," << (c.pass ? 1 : 0) << ","
            << num(c.worst) << ",\"" << c.note << "\"\n";
        os << c.name << "  " << (!c.applicable ? "n/a " : c.pass ? "pass" : "FAIL") << "  "
           << c.description;
        if (!c.note.empty()) os << "  [" << c.note << "]";
        os << "\n";
    }
    os << (report.all_pass() ? "all applicable assumptions hold\n"
                             : "some assumptions fail\n");
    return report;
}

SolveResult run_solve(const ExperimentConfig& config, const RunContext& ctx) {
    const auto model = config.build_model();
    SolveResult r;
    r.value = value_iterate(model, vi_options(config));
    if (!r.value.converged)
        throw NonConvergence("value iteration did not converge in " +
                             std::to_string(r.value.iterations) + " iterations (residual " +
                             num(r.value.residual) + ")");
    r.limit = extract_control_limit(model, r.value, kStructureTol, config.run.workers);

    auto out = open_csv(ctx, "value.csv");
    out << "h,value\n";
    for (std::size_t i = 0; i < r.value.nodes.size(); ++i)
        out << num(r.value.nodes[i]) << "," << num(r.value.values[i]) << "\n";

    auto& os = log(ctx);
    os << "value iteration: " << r.value.iterations << " iterations, residual "
       << num(r.value.residual) << ", monotone iterates " << (r.value.monotone_iterates ? "yes" : "no")
       << "\n";
    os << "V(h0=" << num(config.run.h0) << ") = " << num(r.value(config.run.h0)) << "\n";
    os << "theta* = " << num(r.limit.theta)
       << (r.limit.theta >= model.upper() ? " (never transplant)" : "")
       << ", threshold structure " << (r.limit.threshold_structure ? "yes" : "no") << "\n";
    return r;
}

double resolve_theta(const ExperimentConfig& config, const StoppingModel& model) {
    if (config.policy.theta) return *config.policy.theta;
    const auto v = value_iterate(model, vi_options(config));
    if (!v.converged) throw NonConvergence("value iteration did not converge");
    return extract_control_limit(model, v, kStructureTol, config.run.workers).theta;
}

ValueEstimate run_simulate(const ExperimentConfig& config, const RunContext& ctx) {
    const auto model = config.build_model();
    const double theta = resolve_theta(config, model);
    const RandomStreamFactory factory(config.run.seed);
    const auto records = simulate_replications(model, theta, config.run.h0, config.run.horizon,
                                               config.run.reps, factory, config.run.workers);
    std::vector<double> v(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].v_n;
    const auto s = summarize(v);
    ValueEstimate e{s.mean, s.se, s.n, truncation_bound(model, config.run.horizon)};

    auto out = open_csv(ctx, "simulate.csv");
    out << "rep,v_n,stop_index,died\n";
    for (std::size_t i = 0; i < records.size(); ++i)
        out << i << "," << num(records[i].v_n) << "," << records[i].stop_index << ","
            << (records[i].died ? 1 : 0) << "\n";
    auto sum = open_csv(ctx, "simulate_summary.csv");
    sum << "theta,N,horizon,mean,se,truncation_bound\n"
        << num(theta) << "," << e.reps << "," << config.run.horizon << "," << num(e.mean) << ","
        << num(e.se) << "," << num(e.truncation_bound) << "\n";

    log(ctx) << "V_theta(h0) at theta=" << num(theta) << ": " << num(e.mean) << " +- " << num(e.se)
             << " (N=" << e.reps << ", horizon " << config.run.horizon << ", truncation <= "
             << num(e.truncation_bound) << ")\n";
    return e;
}

GradEstimate run_gradient(const ExperimentConfig& config, const RunContext& ctx) {
    const auto model = config.build_model();
    const double theta = resolve_theta(config, model);
    const auto method = parse_grad_method(config.estimator.method);
    const RandomStreamFactory factory(config.run.seed);
    const auto g = estimate(model, method, theta, config, config.run.reps, config.estimator.delta,
                            factory);

    auto out = open_csv(ctx, "gradient.csv");
    out << "rep,value\n";
    for (std::size_t i = 0; i < g.values.size(); ++i) out << i << "," << num(g.values[i]) << "\n";
    auto sum = open_csv(ctx, "gradient_summary.csv");
    sum << "method,theta,N,mean,se\n"
        << to_string(method) << "," << num(theta) << "," << g.reps << "," << num(g.mean) << ","
        << num(g.se) << "\n";

    auto& os = log(ctx);
    os << to_string(method);
    if (method == GradMethod::fd)
        os << "(delta=" << num(g.delta) << (g.crn ? ", CRN" : ", independent") << ")";
    os << " dV/dtheta at theta=" << num(theta) << ": " << num(g.mean) << " +- " << num(g.se)
       << " (N=" << g.reps << ")\n";
    if (method == GradMethod::ipa)
        os << "note: IPA is identically 0. Sample paths do not move with theta and the stage\n"
              "reward is piecewise constant in theta, so the pathwise derivative vanishes\n"
              "almost surely and misses the change of stopping period that SPA captures.\n";
    return g;
}

std::uint64_t sweep_cell_seed(std::uint64_t seed, std::size_t column, std::size_t theta_index,
                              std::size_t reps_index) {
    return mix(mix(mix(seed, column), theta_index), reps_index);
}

SweepResult run_sweep(const ExperimentConfig& config, const RunContext& ctx) {
    config.validate();
    const auto model = config.build_model();

    struct Column {
        GradMethod method;
        double delta;
        std::string label;
    };
    std::vector<Column> columns;
    for (const auto& name : config.sweep.methods) {
        const auto m = parse_grad_method(name);
        if (m == GradMethod::fd) {
            for (double d : config.sweep.deltas)
                columns.push_back({m, d, std::string("FD(") + num(d) + ")"});
        } else {
            columns.push_back({m, 0.0, to_string(m)});
        }
    }

    SweepResult result;
    auto& os = log(ctx);
    for (std::size_t ni = 0; ni < config.sweep.reps.size(); ++ni) {
        for (std::size_t ti = 0; ti < config.sweep.thetas.size(); ++ti) {
            for (std::size_t ci = 0; ci < columns.size(); ++ci) {
                const auto& col = columns[ci];
                SweepCell cell;
                cell.method = to_string(col.method);
                cell.theta = config.sweep.thetas[ti];
                cell.reps = config.sweep.reps[ni];
                if (col.method == GradMethod::fd) cell.delta = col.delta;
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    const RandomStreamFactory factory(
                        sweep_cell_seed(config.run.seed, ci, ti, ni));
                    const auto g =
                        estimate(model, col.method, cell.theta, config, cell.reps, col.delta, factory);
                    cell.mean = g.mean;
                    cell.se = g.se;
                } catch (const std::exception& e) {
                    cell.ok = false;
                    cell.error = e.what();
                    ++result.failures;
                }
                cell.runtime_s =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                os << col.label << " theta=" << num(cell.theta) << " N=" << cell.reps << ": ";
                if (cell.ok) os << num(cell.mean) << " (" << num(cell.se) << ")\n";
                else os << "failed: " << cell.error << "\n";
                result.cells.push_back(std::move(cell));
            }
        }
    }

    auto delta_text = [](const SweepCell& c) { return c.delta ? num(*c.delta) : std::string(); };
    auto out = open_csv(ctx, "sweep.csv");
    auto timing = open_csv(ctx, "sweep_timing.csv");
    out << "method,theta,N,delta,mean,se\n";
    timing << "method,theta,N,delta,runtime_s\n";
    for (const auto& c : result.cells) {
        const std::string key =
            c.method + "," + num(c.theta) + "," + std::to_string(c.reps) + "," + delta_text(c);
        out << key << ",";
        if (c.ok) out << num(c.mean) << "," << num(c.se);
        else out << ",";
        out << "\n";
        timing << key << "," << num(c.runtime_s) << "\n";
    }

    auto table = open_csv(ctx, "sweep_table.csv");
    table << "N,theta";
    for (const auto& col : columns) table << "," << col.label << "_mean," << col.label << "_se";
    table << "\n";
    std::size_t idx = 0;
    for (std::size_t ni = 0; ni < config.sweep.reps.size(); ++ni) {
        for (std::size_t ti = 0; ti < config.sweep.thetas.size(); ++ti) {
            table << config.sweep.reps[ni] << "," << num(config.sweep.thetas[ti]);
            for (std::size_t ci = 0; ci < columns.size(); ++ci, ++idx) {
                const auto& c = result.cells[idx];
                if (c.ok) table << "," << num(c.mean) << "," << num(c.se);
                else table << ",,";
            }
            table << "\n";
        }
    }

    const auto errors_path = ctx.out_dir / "sweep_errors.csv";
    if (result.failures) {
        auto err = open_csv(ctx, "sweep_errors.csv");
        err << "method,theta,N,delta,error\n";
        for (const auto& c : result.cells)
            if (!c.ok)
                err << c.method << "," << num(c.theta) << "," << c.reps << "," << delta_text(c)
                    << ",\"" << c.error << "\"\n";
        os << result.failures << " of " << result.cells.size() << " cells failed\n";
    } else {
        std::filesystem::remove(errors_path);
    }
    return result;
}

std::vector<OptimizeStep> optimize_theta(const ExperimentConfig& config, const RunContext& ctx) {
    const auto model = config.build_model();
    const auto& o = config.optimize;
    const double lo = o.clip;
    const double hi = model.upper() - o.clip;

    std::vector<OptimizeStep> trace;
    double theta = o.theta0;
    for (std::size_t k = 0; k < o.iterations; ++k) {
        const RandomStreamFactory factory(mix(config.run.seed, k));
        const auto g = spa_estimate(model, theta, config.run.h0, config.run.horizon, o.reps,
                                    config.estimator.aux_reps, factory, config.run.workers);
        trace.push_back({k, theta, g.mean, g.se});
        const double a_k = o.step / static_cast<double>(k + 1);
        theta = std::clamp(theta + a_k * g.mean, lo, hi);
    }
    trace.push_back({o.iterations, theta, std::nullopt, std::nullopt});

    auto out = open_csv(ctx, "optimize.csv");
    out << "k,theta,estimate,se\n";
    for (const auto& s : trace) {
        out << s.k << "," << num(s.theta) << ",";
        if (s.estimate) out << num(*s.estimate) << "," << num(*s.se);
        else out << ",";
        out << "\n";
    }
    log(ctx) << "optimize: theta_0=" << num(o.theta0) << " -> theta_" << o.iterations << "="
             << num(theta) << " (a_k=" << num(o.step) << "/(k+1), N=" << o.reps << ", clip ["
             << num(lo) << ", " << num(hi) << "])\n";
    return trace;
}

}  // namespace stopspa
