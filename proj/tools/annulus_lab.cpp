// annulus-lab: batch front end for the annulus toolkit.
//
//   annulus-lab <command> --config <file.json> [--out <dir>] [--seed <n>]
//                         [--threads <n>] [--plot <kind>]
//
// The config carries a map spec, the command name, a command-specific
// parameter table, and an optional sampling seed.  Parsing is strict: any
// field the command does not know is rejected.  Results are written as one
// JSON document per run; --plot adds CSV files derived from that document.
// Exit codes: 0 success, 1 config error, 2 precondition failure, 3 numeric
// refinement failure.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "annulus/annulus.hpp"

namespace fs = std::filesystem;
using annlab::Json;

namespace {

constexpr const char* kCommands[] = {"angle",      "tau",     "monotone",
                                     "rotation",   "find-orbits", "graph-scan",
                                     "connect",    "extremes", "sweep"};

bool known_command(const std::string& c) {
    for (const char* k : kCommands)
        if (c == k) return true;
    return false;
}

struct Experiment {
    std::string command;
    annlab::MapSpec map = annlab::MapSpec::identity();
    Json parameters = Json::object();
    std::uint64_t seed = 417;  // matches the default pair sampler
};

Experiment parse_experiment(const Json& doc) {
    annlab::expect_fields(doc, {"map", "command", "parameters", "seed"}, "config");
    if (!doc.contains("map")) throw annlab::ConfigError("config: missing 'map'");
    if (!doc.contains("command")) throw annlab::ConfigError("config: missing 'command'");
    Experiment exp;
    exp.command = doc.at("command").get<std::string>();
    if (!known_command(exp.command))
        throw annlab::ConfigError("config: unknown command '" + exp.command + "'");
    exp.map = annlab::map_from_json(doc.at("map"));
    if (doc.contains("parameters")) {
        if (!doc.at("parameters").is_object())
            throw annlab::ConfigError("config: 'parameters' must be an object");
        exp.parameters = doc.at("parameters");
    }
    if (doc.contains("seed")) exp.seed = doc.at("seed").get<std::uint64_t>();
    return exp;
}

// ---------------------------------------------------------------------------
// parameter helpers
// ---------------------------------------------------------------------------

template <typename T>
T take(const Json& p, const char* key, T fallback) {
    return p.contains(key) ? p.at(key).get<T>() : fallback;
}

template <typename T>
T require(const Json& p, const char* key, const char* command) {
    if (!p.contains(key))
        throw annlab::ConfigError(std::string(command) + ": missing parameter '" + key + "'");
    return p.at(key).get<T>();
}

annlab::FoliationRef foliation_param(const Json& p, const char* key) {
    if (!p.contains(key)) return annlab::FoliationRef::vertical();
    return annlab::foliation_from_json(p.at(key));
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

Json run_angle(const Experiment& exp) {
    annlab::expect_fields(exp.parameters, {"z", "zp", "foliation"}, "angle parameters");
    const annlab::LiftedPoint z = annlab::point_from_json(require<Json>(exp.parameters, "z", "angle"));
    const annlab::LiftedPoint zp =
        annlab::point_from_json(require<Json>(exp.parameters, "zp", "angle"));
    const annlab::FoliationRef F = foliation_param(exp.parameters, "foliation");
    const annlab::AngleClass c = annlab::angle_class(z, zp, F);
    return Json{{"class", annlab::class_name(c)},
                {"representative", annlab::rep_m101(c)},
                {"odd", !annlab::is_even(c)}};
}

Json tau_pair(const Experiment& exp) {
    const annlab::LiftedPoint z = annlab::point_from_json(exp.parameters.at("z"));
    const annlab::LiftedPoint zp = annlab::point_from_json(exp.parameters.at("zp"));
    const annlab::FoliationRef F = foliation_param(exp.parameters, "foliation");
    const annlab::FoliationRef G = exp.parameters.contains("foliation_image")
                                       ? annlab::foliation_from_json(exp.parameters.at("foliation_image"))
                                       : annlab::inverse_map_foliation(exp.map, F);
    const int t = annlab::tau(z, zp, F, G);
    const int ti = annlab::tau_isotopy(z, zp, F, G);
    return Json{{"tau", t}, {"tau_isotopy", ti}, {"agree", t == ti}};
}

Json tau_grid(const Experiment& exp) {
    const Json& g = exp.parameters.at("grid");
    annlab::expect_fields(g, {"nx", "ny"}, "tau grid");
    const int nx = require<int>(g, "nx", "tau grid");
    const int ny = require<int>(g, "ny", "tau grid");
    if (nx < 1 || ny < 2) throw annlab::ConfigError("tau grid: need nx >= 1, ny >= 2");
    const annlab::FoliationRef F = foliation_param(exp.parameters, "foliation");
    const annlab::FoliationRef G = annlab::inverse_map_foliation(exp.map, F);

    std::vector<annlab::LiftedPoint> pts;
    pts.reserve(static_cast<size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            pts.push_back(annlab::leaf_point(F, static_cast<double>(i) / nx,
                                             (j + 0.5) / ny));

    Json values = Json::array();
    int same_leaf = 0;
    for (size_t a = 0; a < pts.size(); ++a) {
        for (size_t b = 0; b < pts.size(); ++b) {
            if (a == b) continue;
            const int t = annlab::tau(pts[a], pts[b], F, G);
            const bool same = a / ny == b / ny;
            same_leaf += same ? 1 : 0;
            values.push_back(Json{{"i", a}, {"j", b}, {"tau", t}, {"same_leaf", same}});
        }
    }
    Json points = Json::array();
    for (const auto& z : pts) points.push_back(annlab::point_to_json(z));
    return Json{{"nx", nx},
                {"ny", ny},
                {"points", std::move(points)},
                {"same_leaf_pairs", same_leaf},
                {"values", std::move(values)}};
}

Json run_tau(const Experiment& exp) {
    annlab::expect_fields(exp.parameters, {"z", "zp", "foliation", "foliation_image", "grid"},
                          "tau parameters");
    if (exp.parameters.contains("grid")) return tau_grid(exp);
    if (exp.parameters.contains("z") && exp.parameters.contains("zp")) return tau_pair(exp);
    throw annlab::ConfigError("tau: provide either a pair {z, zp} or a {grid}");
}

Json run_monotone(const Experiment& exp) {
    annlab::expect_fields(exp.parameters,
                          {"direction", "same_leaf", "cross_leaf", "boundary", "margin"},
                          "monotone parameters");
    const std::string dir = require<std::string>(exp.parameters, "direction", "monotone");
    if (dir != "increasing" && dir != "decreasing")
        throw annlab::ConfigError("monotone: direction must be 'increasing' or 'decreasing'");
    annlab::PairSampler sampler;
    sampler.same_leaf = take<int>(exp.parameters, "same_leaf", sampler.same_leaf);
    sampler.cross_leaf = take<int>(exp.parameters, "cross_leaf", sampler.cross_leaf);
    sampler.boundary = take<int>(exp.parameters, "boundary", sampler.boundary);
    sampler.margin = take<double>(exp.parameters, "margin", sampler.margin);
    sampler.seed = exp.seed;
    const auto report = annlab::is_monotone(
        exp.map, annlab::FoliationRef::vertical(),
        dir == "increasing" ? annlab::Direction::Increasing : annlab::Direction::Decreasing,
        sampler);
    return annlab::to_json(report);
}

Json run_rotation(const Experiment& exp) {
    annlab::expect_fields(exp.parameters, {"iterations", "circle", "start"},
                          "rotation parameters");
    const int n = take<int>(exp.parameters, "iterations", 1000);
    annlab::LiftedPoint z0{0.0, 0.0};
    if (exp.parameters.contains("circle") && exp.parameters.contains("start"))
        throw annlab::ConfigError("rotation: 'circle' and 'start' are mutually exclusive");
    if (exp.parameters.contains("start")) {
        z0 = annlab::point_from_json(exp.parameters.at("start"));
    } else {
        const std::string circle = take<std::string>(exp.parameters, "circle", "C0");
        if (circle == "C0")
            z0 = {0.0, 0.0};
        else if (circle == "C1")
            z0 = {0.0, 1.0};
        else
            throw annlab::ConfigError("rotation: circle must be 'C0' or 'C1'");
    }
    return annlab::to_json(annlab::rotation_number(exp.map, z0, n));
}

Json run_find_orbits(const Experiment& exp) {
    annlab::expect_fields(exp.parameters,
                          {"p", "q", "tol", "leaf_grid", "t_grid", "require_two"},
                          "find-orbits parameters");
    const int p = require<int>(exp.parameters, "p", "find-orbits");
    const int q = require<int>(exp.parameters, "q", "find-orbits");
    annlab::OrbitOptions opt;
    opt.tol = take<double>(exp.parameters, "tol", opt.tol);
    opt.leaf_grid = take<int>(exp.parameters, "leaf_grid", opt.leaf_grid);
    opt.t_grid = take<int>(exp.parameters, "t_grid", opt.t_grid);
    opt.require_two = take<bool>(exp.parameters, "require_two", opt.require_two);
    const auto orbits = annlab::find_pq_orbits(exp.map, p, q, opt);
    Json arr = Json::array();
    for (const auto& rec : orbits) arr.push_back(annlab::to_json(rec));
    return Json{{"count", orbits.size()}, {"orbits", std::move(arr)}};
}

annlab::GraphScanOptions scan_options(const Json& p) {
    annlab::expect_fields(p,
                          {"iterates", "transient", "cells", "seeds", "spread_tol",
                           "invariance_tol", "lipschitz_baseline", "seed_margin"},
                          "graph-scan parameters");
    annlab::GraphScanOptions opt;
    opt.iterates = take<int>(p, "iterates", opt.iterates);
    opt.transient = take<int>(p, "transient", opt.transient);
    opt.cells = take<int>(p, "cells", opt.cells);
    opt.seeds = take<int>(p, "seeds", opt.seeds);
    opt.spread_tol = take<double>(p, "spread_tol", opt.spread_tol);
    opt.invariance_tol = take<double>(p, "invariance_tol", opt.invariance_tol);
    opt.lipschitz_baseline = take<int>(p, "lipschitz_baseline", opt.lipschitz_baseline);
    opt.seed_margin = take<double>(p, "seed_margin", opt.seed_margin);
    return opt;
}

Json run_graph_scan(const Experiment& exp) {
    const auto records = annlab::invariant_graph_scan(exp.map, scan_options(exp.parameters));
    Json arr = Json::array();
    int certified = 0;
    for (const auto& rec : records) {
        certified += rec.found ? 1 : 0;
        arr.push_back(annlab::to_json(rec));
    }
    return Json{{"certified", certified}, {"graphs", std::move(arr)}};
}

Json run_connect(const Experiment& exp) {
    annlab::expect_fields(exp.parameters,
                          {"upward", "from_band", "to_band", "seeds", "budget", "scan"},
                          "connect parameters");
    annlab::ConnectOptions opt;
    opt.upward = take<bool>(exp.parameters, "upward", opt.upward);
    opt.from_band = take<double>(exp.parameters, "from_band", opt.from_band);
    opt.to_band = take<double>(exp.parameters, "to_band", opt.to_band);
    opt.seeds = take<int>(exp.parameters, "seeds", opt.seeds);
    opt.budget = take<int>(exp.parameters, "budget", opt.budget);
    if (exp.parameters.contains("scan")) opt.scan = scan_options(exp.parameters.at("scan"));
    return annlab::to_json(annlab::mather_connect_search(exp.map, opt));
}

Json run_extremes(const Experiment& exp) {
    annlab::expect_fields(exp.parameters, {"x", "x_image", "samples"}, "extremes parameters");
    const double x = require<double>(exp.parameters, "x", "extremes");
    const double xi = require<double>(exp.parameters, "x_image", "extremes");
    const int samples = take<int>(exp.parameters, "samples", 512);
    return annlab::to_json(annlab::leaf_intersection_extremes(exp.map, x, xi, samples));
}

Json run_command(const Experiment& exp, int threads);

// Cartesian sweep over one or more parameter axes; cells run on a worker
// pool and a single aggregator assembles the output in cell order.
Json run_sweep(const Experiment& exp, int threads) {
    annlab::expect_fields(exp.parameters, {"command", "parameters", "vary"},
                          "sweep parameters");
    const std::string sub = require<std::string>(exp.parameters, "command", "sweep");
    if (!known_command(sub) || sub == "sweep")
        throw annlab::ConfigError("sweep: cannot sweep command '" + sub + "'");
    const Json base = exp.parameters.contains("parameters")
                          ? exp.parameters.at("parameters")
                          : Json::object();
    const Json& vary = exp.parameters.contains("vary") ? exp.parameters.at("vary")
                                                       : Json::object();
    if (!vary.is_object() || vary.empty())
        throw annlab::ConfigError("sweep: 'vary' must be a non-empty object of arrays");

    std::vector<std::string> axes;
    std::vector<std::vector<Json>> levels;
    size_t cells = 1;
    for (const auto& item : vary.items()) {
        if (!item.value().is_array() || item.value().empty())
            throw annlab::ConfigError("sweep: vary field '" + item.key() +
                                      "' must be a non-empty array");
        axes.push_back(item.key());
        levels.emplace_back(item.value().begin(), item.value().end());
        cells *= levels.back().size();
    }

    // one sub-experiment per cell, in row-major order of the vary axes
    std::vector<Experiment> cell_exp(cells);
    std::vector<Json> assignments(cells);
    for (size_t c = 0; c < cells; ++c) {
        Json params = base;
        Json assignment = Json::object();
        size_t rest = c;
        for (size_t ax = axes.size(); ax-- > 0;) {
            const size_t idx = rest % levels[ax].size();
            rest /= levels[ax].size();
            params[axes[ax]] = levels[ax][idx];
            assignment[axes[ax]] = levels[ax][idx];
        }
        cell_exp[c] = Experiment{sub, exp.map, std::move(params),
                                 exp.seed + static_cast<std::uint64_t>(c)};
        assignments[c] = std::move(assignment);
    }

    std::vector<Json> outputs(cells);
    std::atomic<size_t> next{0};
    const auto worker = [&] {
        for (size_t c = next.fetch_add(1); c < cells; c = next.fetch_add(1)) {
            try {
                outputs[c] = Json{{"output", run_command(cell_exp[c], 1)}};
            } catch (const annlab::ConfigError& e) {
                outputs[c] = Json{{"error", {{"type", "ConfigError"}, {"message", e.what()}}}};
            } catch (const annlab::PreconditionError& e) {
                outputs[c] =
                    Json{{"error", {{"type", "PreconditionError"}, {"message", e.what()}}}};
            } catch (const annlab::RefinementError& e) {
                outputs[c] =
                    Json{{"error", {{"type", "RefinementError"}, {"message", e.what()}}}};
            }
        }
    };
    const int pool = std::max(1, threads);
    std::vector<std::thread> team;
    team.reserve(pool - 1);
    for (int t = 1; t < pool; ++t) team.emplace_back(worker);
    worker();
    for (auto& t : team) t.join();

    Json out_cells = Json::array();
    for (size_t c = 0; c < cells; ++c) {
        Json cell{{"cell", c}, {"assignment", assignments[c]},
                  {"seed", exp.seed + static_cast<std::uint64_t>(c)}};
        cell.update(outputs[c]);
        out_cells.push_back(std::move(cell));
    }
    return Json{{"command", sub}, {"cells", cells}, {"results", std::move(out_cells)}};
}

Json run_command(const Experiment& exp, int threads) {
    if (exp.command == "angle") return run_angle(exp);
    if (exp.command == "tau") return run_tau(exp);
    if (exp.command == "monotone") return run_monotone(exp);
    if (exp.command == "rotation") return run_rotation(exp);
    if (exp.command == "find-orbits") return run_find_orbits(exp);
    if (exp.command == "graph-scan") return run_graph_scan(exp);
    if (exp.command == "connect") return run_connect(exp);
    if (exp.command == "extremes") return run_extremes(exp);
    if (exp.command == "sweep") return run_sweep(exp, threads);
    throw annlab::ConfigError("unknown command: " + exp.command);
}

// ---------------------------------------------------------------------------
// plot data
// ---------------------------------------------------------------------------

std::string num(const Json& v) { return v.dump(); }

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw annlab::ConfigError("cannot write " + path.string());
    out << body;
}

/** CSV projections of a result document; unknown pairings are rejected. */
void emit_plot_data(const Json& result, const std::string& kind, const fs::path& dir) {
    const std::string command = result.at("command").get<std::string>();
    const Json& output = result.contains("output") ? result.at("output") : Json::object();

    if (kind == "phase-portrait") {
        std::string csv = "index,x,y\n";
        if (command == "find-orbits") {
            int index = 0;
            for (const auto& orbit : output.at("orbits")) {
                for (const auto& z : orbit.at("points"))
                    csv += std::to_string(index) + "," + num(z.at("x")) + "," +
                           num(z.at("y")) + "\n";
                ++index;
            }
        } else if (command == "connect") {
            int step = 0;
            if (output.contains("witness"))
                for (const auto& z : output.at("witness"))
                    csv += std::to_string(step++) + "," + num(z.at("x")) + "," +
                           num(z.at("y")) + "\n";
        } else {
            throw annlab::UnsupportedKind("phase-portrait needs a find-orbits or connect result");
        }
        write_file(dir / "phase_portrait.csv", csv);
        return;
    }

    if (kind == "graph-overlay") {
        if (command != "graph-scan")
            throw annlab::UnsupportedKind("graph-overlay needs a graph-scan result");
        int index = 0;
        for (const auto& rec : output.at("graphs")) {
            if (!rec.at("found").get<bool>()) continue;
            const auto& samples = rec.at("samples");
            std::string csv = "x,y\n";
            const size_t cells = samples.size();
            for (size_t c = 0; c < cells; ++c)
                csv += num(Json((c + 0.5) / cells)) + "," + num(samples.at(c)) + "\n";
            write_file(dir / ("graph_" + std::to_string(index++) + ".csv"), csv);
        }
        return;
    }

    if (kind == "tau-field") {
        if (command != "tau" || !output.contains("values"))
            throw annlab::UnsupportedKind("tau-field needs a tau grid result");
        const auto& points = output.at("points");
        std::string csv = "i,j,x_i,y_i,x_j,y_j,same_leaf,tau\n";
        for (const auto& v : output.at("values")) {
            const auto& zi = points.at(v.at("i").get<size_t>());
            const auto& zj = points.at(v.at("j").get<size_t>());
            csv += num(v.at("i")) + "," + num(v.at("j")) + "," + num(zi.at("x")) + "," +
                   num(zi.at("y")) + "," + num(zj.at("x")) + "," + num(zj.at("y")) + "," +
                   (v.at("same_leaf").get<bool>() ? "1" : "0") + "," + num(v.at("tau")) +
                   "\n";
        }
        write_file(dir / "tau_field.csv", csv);
        return;
    }

    throw annlab::UnsupportedKind("unknown plot kind: " + kind);
}

int effective_threads(std::optional<int> flag) {
    if (const char* env = std::getenv("ANNULUS_LAB_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (...) {
        }
        throw annlab::ConfigError("ANNULUS_LAB_THREADS must be a positive integer");
    }
    return flag.value_or(1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"annulus twist-map laboratory"};
    std::string command, config_path, out_dir = ".";
    std::optional<std::int64_t> seed_flag;
    std::optional<int> threads_flag;
    std::vector<std::string> plots;
    app.add_option("command", command, "one of: angle tau monotone rotation find-orbits graph-scan connect extremes sweep")
        ->required();
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--out", out_dir, "output directory (default .)");
    app.add_option("--seed", seed_flag, "override the config seed");
    app.add_option("--threads", threads_flag, "worker pool size for sweeps");
    app.add_option("--plot", plots, "emit CSV plot data: phase-portrait graph-overlay tau-field");
    CLI11_PARSE(app, argc, argv);

    Json result;
    fs::path dir;
    int exit_code = 0;
    try {
        if (!known_command(command))
            throw annlab::ConfigError("unknown command '" + command + "'");
        std::ifstream in(config_path);
        if (!in) throw annlab::ConfigError("cannot read config " + config_path);
        Json doc;
        try {
            doc = Json::parse(in);
        } catch (const Json::exception& e) {
            throw annlab::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        Experiment exp = parse_experiment(doc);
        if (exp.command != command)
            throw annlab::ConfigError("config command '" + exp.command +
                                      "' does not match invoked command '" + command + "'");
        if (seed_flag) exp.seed = static_cast<std::uint64_t>(*seed_flag);

        dir = out_dir;
        fs::create_directories(dir);

        result["command"] = exp.command;
        result["inputs"] = Json{{"map", annlab::map_to_json(exp.map)},
                                {"parameters", exp.parameters},
                                {"seed", exp.seed}};
        result["version"] = annlab::kVersion;

        const auto t0 = std::chrono::steady_clock::now();
        try {
            result["output"] = run_command(exp, effective_threads(threads_flag));
        } catch (const annlab::Error& e) {
            // record the failure in the document, then map it to an exit code
            result["error"] = Json{{"type", e.name()}, {"message", e.what()}};
            throw;
        }
        result["wall_time_ms"] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
    } catch (const annlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        exit_code = 1;
    } catch (const annlab::PreconditionError& e) {
        std::cerr << "precondition failure: " << e.what() << "\n";
        exit_code = 2;
    } catch (const annlab::Error& e) {
        std::cerr << "refinement failure: " << e.what() << "\n";
        exit_code = 3;
    } catch (const Json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        exit_code = 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        exit_code = 1;
    }

    if (!result.contains("command")) return exit_code;  // failed before dispatch

    if (!result.contains("wall_time_ms")) result["wall_time_ms"] = 0.0;
    const fs::path result_path = dir / "result.json";
    try {
        write_file(result_path, result.dump(2) + "\n");
        for (const std::string& kind : plots) {
            if (exit_code != 0) break;  // no plot data without a successful run
            emit_plot_data(result, kind, dir);
        }
    } catch (const annlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        if (exit_code == 0) exit_code = 1;
    }
    if (exit_code == 0) std::cout << "ok " << command << " -> " << result_path.string() << "\n";
    return exit_code;
}
