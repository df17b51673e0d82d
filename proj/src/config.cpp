#include "stopspa/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stopspa/estimators.hpp"

namespace stopspa {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": not a number: '" + text + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        if (!text.empty() && text[0] != '-') {
            const auto v = std::stoull(text, &used);
            if (trim(text.substr(used)).empty()) return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": not a nonnegative integer: '" + text + "'");
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError(key + ": not a boolean: '" + text + "'");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += f(xs[i]);
    }
    return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"model",
         {"H", "H_D", "lambda", "wait_reward", "wait_value", "wait_intercept", "wait_slope",
          "wait_points", "transplant_reward", "transplant_value", "transplant_intercept",
          "transplant_slope", "transplant_points"}},
        {"kernel", {"name", "step"}},
        {"policy", {"theta"}},
        {"run", {"h0", "horizon", "reps", "seed", "workers"}},
        {"estimator", {"method", "delta", "crn", "aux_reps"}},
        {"sweep", {"theta", "reps", "methods", "delta"}},
        {"optimize", {"theta0", "iterations", "step", "reps", "clip"}},
        {"solve", {"nodes", "tol", "max_iter"}},
    };
    return keys;
}

void read_reward(const pt::ptree& section, const std::string& prefix, RewardSpec& spec) {
    auto get = [&](const std::string& k) { return section.get_optional<std::string>(prefix + k); };
    if (auto v = get("_reward")) spec.kind = trim(*v);
    if (auto v = get("_value")) spec.value = to_double(prefix + "_value", *v);
    if (auto v = get("_intercept")) spec.intercept = to_double(prefix + "_intercept", *v);
    if (auto v = get("_slope")) spec.slope = to_double(prefix + "_slope", *v);
    if (auto v = get("_points")) {
        spec.points.clear();
        for (const auto& item : split(*v, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError(prefix + "_points: expected h:value pairs");
            spec.points.emplace_back(to_double(prefix + "_points", item.substr(0, colon)),
                                     to_double(prefix + "_points", item.substr(colon + 1)));
        }
    }
}

void write_reward(std::ostream& out, const std::string& prefix, const RewardSpec& spec) {
    out << prefix << "_reward = " << spec.kind << "\n";
    if (spec.kind == "constant") out << prefix << "_value = " << fmt(spec.value) << "\n";
    if (spec.kind == "linear-decreasing") {
        out << prefix << "_intercept = " << fmt(spec.intercept) << "\n";
        out << prefix << "_slope = " << fmt(spec.slope) << "\n";
    }
    if (spec.kind == "tabulated")
        out << prefix << "_points = "
            << join(spec.points, [](const auto& p) { return fmt(p.first) + ":" + fmt(p.second); })
            << "\n";
}

}  // namespace

RewardFunction RewardSpec::build() const {
    if (kind == "constant") return RewardFunction::constant(value);
    if (kind == "linear-decreasing") return RewardFunction::linear_decreasing(intercept, slope);
    if (kind == "tabulated") {
        std::vector<double> h;
        std::vector<double> v;
        for (const auto& [x, y] : points) {
            h.push_back(x);
            v.push_back(y);
        }
        return RewardFunction::tabulated(std::move(h), std::move(v));
    }
    throw ConfigError("unknown reward kind: " + kind);
}

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [key, value] : body)
            if (!it->second.count(key))
                throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }

    ExperimentConfig c;
    auto opt = [&](const char* path) { return tree.get_optional<std::string>(path); };

    if (auto v = opt("model.H")) c.model.upper = to_double("model.H", *v);
    if (auto v = opt("model.H_D")) c.model.death_threshold = to_double("model.H_D", *v);
    if (auto v = opt("model.lambda")) c.model.discount = to_double("model.lambda", *v);
    if (auto s = tree.get_child_optional("model")) {
        read_reward(*s, "wait", c.model.wait);
        read_reward(*s, "transplant", c.model.transplant);
    }

    if (auto v = opt("kernel.name")) c.kernel.name = trim(*v);
    if (auto v = opt("kernel.step")) c.kernel.step = to_double("kernel.step", *v);

    if (auto v = opt("policy.theta")) {
        if (trim(*v) == "solve") c.policy.theta.reset();
        else c.policy.theta = to_double("policy.theta", *v);
    }

    if (auto v = opt("run.h0")) c.run.h0 = to_double("run.h0", *v);
    if (auto v = opt("run.horizon")) c.run.horizon = to_u64("run.horizon", *v);
    if (auto v = opt("run.reps")) c.run.reps = to_u64("run.reps", *v);
    if (auto v = opt("run.seed")) c.run.seed = to_u64("run.seed", *v);
    if (auto v = opt("run.workers")) c.run.workers = static_cast<int>(to_u64("run.workers", *v));

    if (auto v = opt("estimator.method")) c.estimator.method = trim(*v);
    if (auto v = opt("estimator.delta")) c.estimator.delta = to_double("estimator.delta", *v);
    if (auto v = opt("estimator.crn")) c.estimator.crn = to_bool("estimator.crn", trim(*v));
    if (auto v = opt("estimator.aux_reps")) c.estimator.aux_reps = to_u64("estimator.aux_reps", *v);

    if (auto v = opt("sweep.theta")) {
        c.sweep.thetas.clear();
        for (const auto& x : split(*v, ',')) c.sweep.thetas.push_back(to_double("sweep.theta", x));
    }
    if (auto v = opt("sweep.reps")) {
        c.sweep.reps.clear();
        for (const auto& x : split(*v, ',')) c.sweep.reps.push_back(to_u64("sweep.reps", x));
    }
    if (auto v = opt("sweep.methods")) c.sweep.methods = split(*v, ',');
    if (auto v = opt("sweep.delta")) {
        c.sweep.deltas.clear();
        for (const auto& x : split(*v, ',')) c.sweep.deltas.push_back(to_double("sweep.delta", x));
    }

    if (auto v = opt("optimize.theta0")) c.optimize.theta0 = to_double("optimize.theta0", *v);
    if (auto v = opt("optimize.iterations")) c.optimize.iterations = to_u64("optimize.iterations", *v);
    if (auto v = opt("optimize.step")) c.optimize.step = to_double("optimize.step", *v);
    if (auto v = opt("optimize.reps")) c.optimize.reps = to_u64("optimize.reps", *v);
    if (auto v = opt("optimize.clip")) c.optimize.clip = to_double("optimize.clip", *v);

    if (auto v = opt("solve.nodes")) c.solve.nodes = to_u64("solve.nodes", *v);
    if (auto v = opt("solve.tol")) c.solve.tol = to_double("solve.tol", *v);
    if (auto v = opt("solve.max_iter")) c.solve.max_iter = to_u64("solve.max_iter", *v);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "[model]\n"
        << "H = " << fmt(c.model.upper) << "\n"
        << "H_D = " << fmt(c.model.death_threshold) << "\n"
        << "lambda = " << fmt(c.model.discount) << "\n";
    write_reward(out, "wait", c.model.wait);
    write_reward(out, "transplant", c.model.transplant);
    out << "\n[kernel]\n"
        << "name = " << c.kernel.name << "\n"
        << "step = " << fmt(c.kernel.step) << "\n";
    out << "\n[policy]\n"
        << "theta = " << (c.policy.theta ? fmt(*c.policy.theta) : std::string("solve")) << "\n";
    out << "\n[run]\n"
        << "h0 = " << fmt(c.run.h0) << "\n"
        << "horizon = " << c.run.horizon << "\n"
        << "reps = " << c.run.reps << "\n"
        << "seed = " << c.run.seed << "\n"
        << "workers = " << c.run.workers << "\n";
    out << "\n[estimator]\n"
        << "method = " << c.estimator.method << "\n"
        << "delta = " << fmt(c.estimator.delta) << "\n"
        << "crn = " << (c.estimator.crn ? "true" : "false") << "\n"
        << "aux_reps = " << c.estimator.aux_reps << "\n";
    out << "\n[sweep]\n"
        << "theta = " << join(c.sweep.thetas, fmt) << "\n"
        << "reps = " << join(c.sweep.reps, [](std::size_t n) { return std::to_string(n); }) << "\n"
        << "methods = " << join(c.sweep.methods, [](const std::string& s) { return s; }) << "\n"
        << "delta = " << join(c.sweep.deltas, fmt) << "\n";
    out << "\n[optimize]\n"
        << "theta0 = " << fmt(c.optimize.theta0) << "\n"
        << "iterations = " << c.optimize.iterations << "\n"
        << "step = " << fmt(c.optimize.step) << "\n"
        << "reps = " << c.optimize.reps << "\n"
        << "clip = " << fmt(c.optimize.clip) << "\n";
    out << "\n[solve]\n"
        << "nodes = " << c.solve.nodes << "\n"
        << "tol = " << fmt(c.solve.tol) << "\n"
        << "max_iter = " << c.solve.max_iter << "\n";
    return out.str();
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    const double H = model.upper;
    if (!(H > 0.0) || !std::isfinite(H)) fail("model.H must be positive");
    if (!(model.discount > 0.0 && model.discount < 1.0)) fail("model.lambda must lie in (0, 1)");
    if (!(model.death_threshold > 0.0 && model.death_threshold <= H))
        fail("model.H_D must lie in (0, H]");

    for (const auto* spec : {&model.wait, &model.transplant}) {
        if (spec->kind != "constant" && spec->kind != "linear-decreasing" && spec->kind != "tabulated")
            fail("unknown reward kind: " + spec->kind);
        try {
            (void)spec->build();
        } catch (const std::invalid_argument& e) {
            fail(std::string("reward: ") + e.what());
        }
    }

    KernelPtr k;
    try {
        k = make_kernel(kernel.name, kernel.step);
    } catch (const std::invalid_argument& e) {
        fail(std::string("kernel: ") + e.what());
    }
    if (kernel.name != "deterministic-drift" && H != k->upper())
        fail("model.H must equal the kernel's state bound (" + fmt(k->upper()) + ")");

    if (policy.theta && !(*policy.theta >= 0.0 && *policy.theta <= H))
        fail("policy.theta must lie in [0, H]");
    if (!(run.h0 >= 0.0 && run.h0 <= H)) fail("run.h0 must lie in [0, H]");
    if (run.reps < 2) fail("run.reps must be at least 2");

    try {
        (void)parse_grad_method(estimator.method);
    } catch (const std::invalid_argument& e) {
        fail(std::string("estimator.method: ") + e.what());
    }
    if (!(estimator.delta > 0.0)) fail("estimator.delta must be positive");
    if (estimator.aux_reps < 1) fail("estimator.aux_reps must be at least 1");

    if (sweep.thetas.empty()) fail("sweep.theta must not be empty");
    if (sweep.reps.empty()) fail("sweep.reps must not be empty");
    if (sweep.methods.empty()) fail("sweep.methods must not be empty");
    bool uses_fd = false;
    for (const auto& m : sweep.methods) {
        try {
            uses_fd |= parse_grad_method(m) == GradMethod::fd;
        } catch (const std::invalid_argument& e) {
            fail(std::string("sweep.methods: ") + e.what());
        }
    }
    if (uses_fd && sweep.deltas.empty()) fail("sweep.delta must not be empty when FD is swept");
    for (double t : sweep.thetas)
        if (!(t >= 0.0 && t <= H)) fail("sweep.theta values must lie in [0, H]");
    for (std::size_t n : sweep.reps)
        if (n < 2) fail("sweep.reps values must be at least 2");
    for (double d : sweep.deltas)
        if (!(d > 0.0)) fail("sweep.delta values must be positive");

    if (!(optimize.step >= 0.0)) fail("optimize.step must be nonnegative");
    if (!(optimize.clip > 0.0 && 2.0 * optimize.clip < H)) fail("optimize.clip must lie in (0, H/2)");
    if (!(optimize.theta0 >= optimize.clip && optimize.theta0 <= H - optimize.clip))
        fail("optimize.theta0 must lie inside the clip interval");
    if (optimize.reps < 2) fail("optimize.reps must be at least 2");

    if (solve.nodes < 2) fail("solve.nodes must be at least 2");
    if (!(solve.tol > 0.0)) fail("solve.tol must be positive");
}

StoppingModel ExperimentConfig::build_model() const {
    validate();
    auto k = kernel.name == "deterministic-drift"
                 ? std::make_shared<DeterministicDriftKernel>(kernel.step, model.upper)
                 : make_kernel(kernel.name, kernel.step);
    return StoppingModel(model.death_threshold, model.discount, model.wait.build(),
                         model.transplant.build(), std::move(k));
}

}  // namespace stopspa
