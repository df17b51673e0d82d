// Serial reference vs OpenMP kernels: Bellman backup, grid policy evaluation
// and SPA replication batches. Also checks that both produce identical bits.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "stopspa/dp.hpp"
#include "stopspa/estimators.hpp"
#include "stopspa/parallel.hpp"

using namespace stopspa;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char* name, double serial, double parallel, bool same) {
    std::printf("%-28s %10.4f %10.4f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
                same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stopspa kernel benchmarks"};
    int workers = 0;
    std::size_t nodes = 4097;
    std::size_t reps = 200000;
    int repeats = 3;
    app.add_option("--workers", workers, "OpenMP threads, 0 = all")->capture_default_str();
    app.add_option("--nodes", nodes, "Grid nodes")->capture_default_str();
    app.add_option("--reps", reps, "SPA replications")->capture_default_str();
    app.add_option("--repeats", repeats, "Timing repeats (best of)")->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    workers = resolve_workers(workers);

    const StoppingModel model(1.0, 0.97, RewardFunction::constant(0.5), RewardFunction::linear_decreasing(8, 8),
                              make_kernel("uniform-deterioration"));
    std::printf("workers %d, nodes %zu, reps %zu\n", workers, nodes, reps);
    std::printf("%-28s %10s %10s %9s\n", "kernel", "serial s", "omp s", "speedup");

    const auto grid = uniform_grid(model, nodes);
    {
        const double t1 = best_of(1, [&] { BellmanOperator(model, grid, 1); });
        const double t2 = best_of(1, [&] { BellmanOperator(model, grid, workers); });
        const BellmanOperator x(model, grid, 1), y(model, grid, workers);
        std::vector<double> ones(x.nodes().size() + 1, 1.0);
        row("operator assembly", t1, t2, x.continuation(ones) == y.continuation(ones));
    }

    BellmanOperator op(model, grid, workers);
    std::vector<double> v(op.nodes().size() + 1);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 16.0 - std::sin(0.003 * static_cast<double>(i));
    std::vector<double> a, b;
    const double ts = best_of(repeats, [&] { for (int k = 0; k < 20; ++k) a = op.backup_serial(v); });
    const double tp = best_of(repeats, [&] { for (int k = 0; k < 20; ++k) b = op.backup(v, workers); });
    row("bellman backup x20", ts, tp, a == b);

    {
        PolicyValueOptions s;
        PolicyValueOptions p;
        p.workers = workers;
        double x = 0, y = 0;
        const double t1 = best_of(repeats, [&] { x = policy_value(model, 0.5, 0.0, grid, s).value; });
        const double t2 = best_of(repeats, [&] { y = policy_value(model, 0.5, 0.0, grid, p).value; });
        row("policy evaluation", t1, t2, x == y);
    }

    {
        const RandomStreamFactory f(20240101);
        std::vector<double> s, p;
        auto one = [&](std::size_t i) { return spa_single_rep(model, 0.5, 0.0, 200, f, i); };
        const double t1 = best_of(repeats, [&] { s = replicate_serial(reps, one); });
        const double t2 = best_of(repeats, [&] { p = replicate(reps, workers, one); });
        row("SPA replications", t1, t2, s == p);
    }
    {
        const RandomStreamFactory f(7);
        std::vector<double> s, p;
        auto one = [&](std::size_t i) { return fd_single_rep(model, 0.5, 0.0, 200, 0.01, true, f, i); };
        const double t1 = best_of(repeats, [&] { s = replicate_serial(reps, one); });
        const double t2 = best_of(repeats, [&] { p = replicate(reps, workers, one); });
        row("FD(CRN) replications", t1, t2, s == p);
    }
    return 0;
}
