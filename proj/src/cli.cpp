#include "impulseq/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "impulseq/erlang_fluid.hpp"
#include "impulseq/impulse_design.hpp"
#include "impulseq/linear_fluid.hpp"

namespace impulseq::cli {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::shared_ptr<spdlog::logger> logger() {
    static const auto instance = [] {
        auto log = spdlog::stderr_color_st("impulseq");
        log->set_pattern("[%l] %v");
        log->set_level(spdlog::level::warn);
        if (const char* env = std::getenv("IMPULSEQ_LOG")) {
            log->set_level(spdlog::level::from_str(env));
        }
        return log;
    }();
    return instance;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Locates the line of a (possibly nested) key in the raw text for error messages.
class Locator {
public:
    Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    int line_of(const std::vector<std::string>& path) const {
        std::size_t pos = 0;
        for (const auto& key : path) {
            const auto found = text_.find("\"" + key + "\"", pos);
            if (found == std::string::npos) break;
            pos = found;
        }
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
    }

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& message) const {
        std::string dotted;
        for (const auto& key : path) dotted += (dotted.empty() ? "" : ".") + key;
        throw ConfigError(source_ + ":" + std::to_string(line_of(path)) + ": " +
                          (dotted.empty() ? "" : dotted + ": ") + message);
    }

    [[noreturn]] void fail_at(std::size_t byte, const std::string& message) const {
        const auto end = text_.begin() + static_cast<long>(std::min(byte, text_.size()));
        const int line = 1 + static_cast<int>(std::count(text_.begin(), end, '\n'));
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + message);
    }

private:
    const std::string& text_;
    std::string source_;
};

class Reader {
public:
    Reader(const json& root, const Locator& loc) : root_(root), loc_(loc) {}

    const json* find(const std::vector<std::string>& path) const {
        const json* node = &root_;
        for (const auto& key : path) {
            if (!node->is_object()) return nullptr;
            const auto it = node->find(key);
            if (it == node->end()) return nullptr;
            node = &*it;
        }
        return node;
    }

    bool has(const std::vector<std::string>& path) const { return find(path) != nullptr; }

    double number(const std::vector<std::string>& path) const {
        const json* node = find(path);
        if (!node) loc_.fail(path, "missing required number");
        if (!node->is_number()) loc_.fail(path, "expected a number");
        return node->get<double>();
    }

    std::optional<double> optional_number(const std::vector<std::string>& path) const {
        if (!has(path)) return std::nullopt;
        return number(path);
    }

    int integer(const std::vector<std::string>& path) const {
        const json* node = find(path);
        if (!node->is_number_integer()) loc_.fail(path, "expected an integer");
        return node->get<int>();
    }

    std::string string(const std::vector<std::string>& path) const {
        const json* node = find(path);
        if (!node->is_string()) loc_.fail(path, "expected a string");
        return node->get<std::string>();
    }

    const Locator& loc() const { return loc_; }

private:
    const json& root_;
    const Locator& loc_;
};

constexpr const char* kKnownKeys[] = {"params", "q0",      "impulse", "T",      "horizon",
                                      "dynamics", "grid", "n_cycles", "tau", "oracle"};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
    const Locator loc(text, source);
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        loc.fail_at(e.byte == 0 ? 0 : e.byte - 1, std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) loc.fail_at(0, "config must be a JSON object");
    for (const auto& [key, value] : root.items()) {
        if (std::find(std::begin(kKnownKeys), std::end(kKnownKeys), key) == std::end(kKnownKeys)) {
            loc.fail({key}, "unknown key");
        }
    }
    const Reader r(root, loc);

    RunConfig cfg;
    cfg.source = source;
    if (!r.has({"params"})) loc.fail({"params"}, "missing required object");
    cfg.params.lambda = r.number({"params", "lambda"});
    cfg.params.mu = r.number({"params", "mu"});
    cfg.params.theta = r.number({"params", "theta"});
    cfg.params.c = r.number({"params", "c"});
    try {
        validate(cfg.params);
    } catch (const ParameterError& e) {
        loc.fail({"params"}, e.what());
    }

    if (auto q0 = r.optional_number({"q0"})) cfg.q0 = *q0;
    if (!(cfg.q0 >= 0.0)) loc.fail({"q0"}, "q0 must be >= 0");

    if (r.has({"impulse"})) {
        ImpulseSpec spec;
        spec.m = r.number({"impulse", "m"});
        const bool periodic = r.has({"impulse", "delta"});
        const bool single = r.has({"impulse", "tau"});
        if (periodic && single) loc.fail({"impulse"}, "give either delta or tau, not both");
        if (periodic) {
            spec.schedule = Periodic{r.number({"impulse", "delta"})};
        } else if (single) {
            spec.schedule = Single{r.number({"impulse", "tau"})};
        } else {
            spec.schedule = Single{0.0};
        }
        if (r.has({"impulse", "mode"})) {
            const auto mode = parse_impulse_mode(r.string({"impulse", "mode"}));
            if (!mode) loc.fail({"impulse", "mode"}, "expected full_state or abandonment_only");
            spec.mode = *mode;
        }
        try {
            validate(spec);
        } catch (const ParameterError& e) {
            loc.fail({"impulse"}, e.what());
        }
        cfg.impulse = spec;
        if (single) cfg.taus = {std::get<Single>(spec.schedule).tau};
    }

    cfg.T = r.optional_number({"T"});
    if (cfg.T && !(*cfg.T > 0.0)) loc.fail({"T"}, "T must be > 0");
    cfg.horizon = r.optional_number({"horizon"});
    if (cfg.horizon && !(*cfg.horizon > 0.0)) loc.fail({"horizon"}, "horizon must be > 0");

    if (r.has({"dynamics"})) {
        const auto dyn = parse_dynamics(r.string({"dynamics"}));
        if (!dyn) loc.fail({"dynamics"}, "expected linear or erlanga");
        cfg.dynamics = *dyn;
    }
    if (r.has({"grid"})) {
        cfg.grid = r.integer({"grid"});
        if (cfg.grid < 2) loc.fail({"grid"}, "grid must be >= 2");
    }
    if (r.has({"n_cycles"})) {
        cfg.n_cycles = r.integer({"n_cycles"});
        if (cfg.n_cycles < 2) loc.fail({"n_cycles"}, "n_cycles must be >= 2");
    }
    if (const json* tau = r.find({"tau"})) {
        cfg.taus.clear();
        if (tau->is_number()) {
            cfg.taus.push_back(tau->get<double>());
        } else if (tau->is_array()) {
            for (const auto& v : *tau) {
                if (!v.is_number()) loc.fail({"tau"}, "expected an array of numbers");
                cfg.taus.push_back(v.get<double>());
            }
        } else {
            loc.fail({"tau"}, "expected a number or an array of numbers");
        }
    }
    if (r.has({"oracle"})) {
        if (auto v = r.optional_number({"oracle", "rel_tol"})) cfg.oracle.rel_tol = *v;
        if (auto v = r.optional_number({"oracle", "abs_tol"})) cfg.oracle.abs_tol = *v;
        if (auto v = r.optional_number({"oracle", "min_density"})) cfg.oracle.min_density = *v;
        if (r.has({"oracle", "max_steps"})) {
            const int steps = r.integer({"oracle", "max_steps"});
            if (steps <= 0) loc.fail({"oracle", "max_steps"}, "max_steps must be > 0");
            cfg.oracle.max_steps = static_cast<std::size_t>(steps);
        }
        if (!(cfg.oracle.rel_tol > 0.0) || !(cfg.oracle.abs_tol > 0.0) || !(cfg.oracle.min_density > 0.0)) {
            loc.fail({"oracle"}, "tolerances and min_density must be > 0");
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ":0: cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

namespace {

double require_T(const RunConfig& cfg) {
    if (!cfg.T) throw ConfigError(cfg.source + ": T is required for this command");
    return *cfg.T;
}

const ImpulseSpec& require_impulse(const RunConfig& cfg) {
    if (!cfg.impulse) throw ConfigError(cfg.source + ": impulse is required for this command");
    return *cfg.impulse;
}

std::string simulate(const RunConfig& cfg) {
    const double horizon = cfg.horizon ? *cfg.horizon : cfg.T ? *cfg.T : 0.0;
    if (!(horizon > 0.0)) throw ConfigError(cfg.source + ": horizon (or T) is required for simulate");
    // Without an impulse the run is a plain flow: schedule nothing inside the horizon.
    const ImpulseSpec spec = cfg.impulse ? *cfg.impulse : ImpulseSpec{1.0, Single{2.0 * horizon}};
    logger()->info("integrating {} dynamics over [0, {}]", to_string(cfg.dynamics), horizon);
    const Trajectory traj = integrate_impulsive(cfg.params, cfg.q0, spec, horizon, cfg.oracle, cfg.dynamics);
    logger()->debug("{} samples, {} breakpoints", traj.samples.size(), traj.breakpoints.size());

    std::string out = "t,q,event\n";
    std::size_t bp = 0;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const Sample& s = traj.samples[i];
        std::string event;
        while (bp < traj.breakpoints.size() && traj.breakpoints[bp].t < s.t) ++bp;
        if (bp < traj.breakpoints.size() && traj.breakpoints[bp].t == s.t) {
            if (traj.breakpoints[bp].kind == BreakpointKind::CapacityCrossing) {
                event = "capacity_crossing";
                ++bp;
            } else if (i + 1 < traj.samples.size() && traj.samples[i + 1].t == s.t) {
                event = "impulse_pre";
            } else {
                event = "impulse_post";
                ++bp;
            }
        }
        out += fmt17(s.t) + "," + fmt17(s.q) + "," + event + "\n";
    }
    return out;
}

std::string bounds(const RunConfig& cfg) {
    const ImpulseSpec& spec = require_impulse(cfg);
    const auto* periodic = std::get_if<Periodic>(&spec.schedule);
    if (!periodic) throw ConfigError(cfg.source + ": bounds needs a periodic impulse (impulse.delta)");
    const double delta = periodic->delta;

    std::string closed;
    if (cfg.dynamics == Dynamics::Linear) {
        if (spec.mode != ImpulseMode::FullState) {
            throw ConfigError(cfg.source + ": abandonment_only impulses need erlanga dynamics");
        }
        const SteadyBounds b = linear_steady_bounds(cfg.params, spec.m, delta);
        closed = fmt17(b.lower) + "," + fmt17(b.upper) + "," + fmt17(b.amplitude) + "," +
                 fmt17(linear_cycle_average(cfg.params, spec.m, delta)) + ",1";
    } else {
        const ErlangSteadyBounds b = erlang_steady_bounds(cfg.params, spec.m, delta, spec.mode);
        if (!b.regime_valid) logger()->warn("closed-form Erlang-A bounds straddle capacity; see the oracle row");
        closed = fmt17(b.bounds.lower) + "," + fmt17(b.bounds.upper) + "," + fmt17(b.bounds.amplitude) + ",," +
                 (b.regime_valid ? "1" : "0");
    }
    logger()->info("integrating {} cycles for the oracle bounds", cfg.n_cycles);
    const OracleCycle oc =
        steady_cycle_bounds(cfg.params, spec.m, delta, spec.mode, cfg.n_cycles, cfg.dynamics, cfg.oracle, cfg.q0);
    return "source,lower,upper,amplitude,average,regime_valid\n"
           "closed_form," + closed + "\n" +
           "oracle," + fmt17(oc.bounds.lower) + "," + fmt17(oc.bounds.upper) + "," + fmt17(oc.bounds.amplitude) +
           "," + fmt17(oc.average) + ",1\n";
}

double impulse_m(const RunConfig& cfg) { return require_impulse(cfg).m; }

std::string average(const RunConfig& cfg) {
    const double T = require_T(cfg);
    if (cfg.taus.empty()) throw ConfigError(cfg.source + ": average needs tau (or impulse.tau)");
    std::string out = "tau,J\n";
    for (const double tau : cfg.taus) {
        out += fmt17(tau) + "," + fmt17(average_queue_length(cfg.params, cfg.q0, T, tau, impulse_m(cfg), cfg.dynamics)) +
               "\n";
    }
    return out;
}

OptimalTimes optimal(const RunConfig& cfg) {
    const double T = require_T(cfg);
    if (cfg.dynamics == Dynamics::Linear) return linear_optimal_times(cfg.params, cfg.q0, T, impulse_m(cfg));
    return erlang_optimal_times(cfg.params, cfg.q0, T, impulse_m(cfg));
}

std::string optimize(const RunConfig& cfg) {
    const double T = require_T(cfg);
    const double m = impulse_m(cfg);
    const OptimalTimes opt = optimal(cfg);

    ordered_json doc;
    doc["dynamics"] = to_string(cfg.dynamics);
    doc["T"] = T;
    doc["m"] = m;
    doc["q0"] = cfg.q0;
    doc["tau_min"] = opt.tau_min;
    doc["J_min"] = opt.J_min;
    doc["tau_max"] = opt.tau_max;
    doc["J_max"] = opt.J_max;
    if (cfg.dynamics == Dynamics::ErlangA) {
        doc["regime"] = to_string(classify_regime(cfg.params, cfg.q0));
        doc["subintervals"] = ordered_json::array();
        for (const auto& piece : erlang_subintervals(cfg.params, cfg.q0, T, m)) {
            doc["subintervals"].push_back(
                {{"label", piece.label()}, {"lo", piece.lo}, {"hi", piece.hi}, {"solver", to_string(piece.solver)}});
        }
    }
    doc["candidates"] = ordered_json::array();
    for (const auto& cand : opt.candidates) {
        doc["candidates"].push_back({{"label", cand.label},
                                     {"tau", cand.tau},
                                     {"J", cand.J},
                                     {"provenance", to_string(cand.provenance)}});
    }
    return doc.dump(2) + "\n";
}

std::string sweep(const RunConfig& cfg) {
    const double T = require_T(cfg);
    const double m = impulse_m(cfg);
    struct Row {
        double tau;
        double J;
        std::string marker;
    };
    std::vector<Row> rows;
    for (int k = 0; k < cfg.grid; ++k) {
        const double tau = k == cfg.grid - 1 ? T : T * static_cast<double>(k) / (cfg.grid - 1);
        rows.push_back({tau, average_queue_length(cfg.params, cfg.q0, T, tau, m, cfg.dynamics), ""});
    }
    if (m <= 1.0) {
        const OptimalTimes opt = optimal(cfg);
        rows.push_back({opt.tau_min, opt.J_min, "tau_min"});
        rows.push_back({opt.tau_max, opt.J_max, "tau_max"});
    } else {
        logger()->warn("m > 1: optimal-time markers omitted");
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.tau < b.tau; });

    std::string out = "tau,J,marker\n";
    for (const auto& row : rows) out += fmt17(row.tau) + "," + fmt17(row.J) + "," + row.marker + "\n";
    return out;
}

}  // namespace

std::string run(const std::string& command, const RunConfig& config) {
    if (command == "simulate") return simulate(config);
    if (command == "bounds") return bounds(config);
    if (command == "average") return average(config);
    if (command == "optimize") return optimize(config);
    if (command == "sweep") return sweep(config);
    throw ConfigError("unknown command '" + command + "'");
}

int main(int argc, char** argv) {
    CLI::App app{"Fluid queues under multiplicative impulses"};
    app.name("impulseq");
    std::string command;
    std::string config_path;
    std::string out_path;
    std::optional<int> grid;
    std::string dynamics_name;
    app.add_option("command", command, "simulate | bounds | average | optimize | sweep")
        ->required()
        ->check(CLI::IsMember(kCommands));
    app.add_option("--config", config_path, "JSON run description")->required();
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--grid", grid, "sweep grid size")->check(CLI::Range(2, 100'000'000));
    app.add_option("--dynamics", dynamics_name, "linear | erlanga")
        ->check(CLI::IsMember({"linear", "erlanga"}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (grid) cfg.grid = *grid;
        if (!dynamics_name.empty()) cfg.dynamics = *parse_dynamics(dynamics_name);
        logger()->info("{} with {} dynamics", command, to_string(cfg.dynamics));

        const std::string text = run(command, cfg);
        if (out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw ConfigError(out_path + ": cannot open output file");
            out << text;
        }
        return 0;
    } catch (const ConvergenceError& e) {
        std::cerr << "impulseq: " << e.what() << "\n";
        return 3;
    } catch (const IntegrationError& e) {
        std::cerr << "impulseq: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "impulseq: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace impulseq::cli
