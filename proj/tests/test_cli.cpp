// Round-trip guarantees for the JSON serialization layer and end-to-end
// checks of the annulus-lab binary: exit codes, result documents, plot
// files, and run-to-run determinism.  The binary under test is located via
// the ANNULUS_LAB_BIN environment variable (set by the build for ctest).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "annulus/serialize.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using annlab::Json;
namespace fs = std::filesystem;

namespace {

fs::path lab_binary() {
    const char* env = std::getenv("ANNULUS_LAB_BIN");
    REQUIRE_MESSAGE(env != nullptr,
                    "set ANNULUS_LAB_BIN to the annulus-lab binary before running");
    fs::path bin{env};
    REQUIRE_MESSAGE(fs::exists(bin), "ANNULUS_LAB_BIN does not exist: " << bin);
    return bin;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "annlab-cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const Json& doc) {
    fs::path path = dir / name;
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    return path;
}

// Runs the binary and returns its exit code; stdout/stderr are discarded.
// `env_prefix` can carry variable assignments such as "ANNULUS_LAB_THREADS=2".
int run_lab(const std::string& args, const std::string& env_prefix = "") {
    std::string cmd = env_prefix + (env_prefix.empty() ? "" : " ") +
                      lab_binary().string() + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path);
    return Json::parse(in);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int line_count(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

// Result documents differ between identical runs only in the wall-time
// line; strip it before comparing bytes.
std::string without_wall_time(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line))
        if (line.find("wall_time_ms") == std::string::npos) out << line << "\n";
    return out.str();
}

Json shear_map() { return Json{{"kind", "integrable_twist"}, {"a", 0.0}, {"b", 1.0}}; }

Json half_ellipse_billiard() {
    return Json{{"kind", "billiard"},
                {"curve", Json{{"kind", "ellipse"}, {"a", 1.0}, {"b", 0.5}}}};
}

Json experiment(const std::string& command, Json map, Json parameters) {
    return Json{{"map", std::move(map)},
                {"command", command},
                {"parameters", std::move(parameters)},
                {"seed", 417}};
}

}  // namespace

TEST_CASE("map specs survive a parse and serialize round trip") {
    const std::vector<std::string> canonical = {
        R"({"kind":"integrable_twist","a":0.25,"b":-0.5})",
        R"({"kind":"billiard","curve":{"kind":"ellipse","a":1.0,"b":0.5}})",
        R"({"kind":"billiard","curve":{"kind":"fourier","harmonics":[0.05,0.0,0.02]}})",
        R"({"kind":"pinned_kick","eps":0.9,"harmonics":[1.0]})",
        R"({"kind":"pinned_kick","eps":0.3,"harmonics":[1.0,0.0,0.25]})",
        R"({"kind":"deck","n":-2})",
        R"({"kind":"identity"})",
        R"({"kind":"inverse","item":{"kind":"integrable_twist","a":0.0,"b":1.0}})",
        R"({"kind":"power","item":{"kind":"pinned_kick","eps":0.9,"harmonics":[1.0]},"n":3})",
        R"({"kind":"compose","items":[{"kind":"pinned_kick","eps":0.3,"harmonics":[1.0]},)"
        R"({"kind":"integrable_twist","a":0.25,"b":-0.5}]})",
    };
    for (const auto& text : canonical) {
        CAPTURE(text);
        const Json doc = Json::parse(text);
        const annlab::MapSpec map = annlab::map_from_json(doc);
        CHECK_EQ(annlab::map_to_json(map), doc);
        // a second trip through the parser must be a fixed point
        CHECK_EQ(annlab::map_to_json(annlab::map_from_json(annlab::map_to_json(map))), doc);
    }

    // the zero deck translation canonicalizes to the identity
    CHECK_EQ(annlab::map_to_json(annlab::map_from_json(Json::parse(R"({"kind":"deck","n":0})"))),
             Json::parse(R"({"kind":"identity"})"));
}

TEST_CASE("foliation, region, and point specs round trip") {
    const std::vector<std::string> foliations = {
        R"({"kind":"vertical"})",
        R"({"kind":"pushforward","map":{"kind":"integrable_twist","a":0.0,"b":1.0}})",
    };
    for (const auto& text : foliations) {
        CAPTURE(text);
        const Json doc = Json::parse(text);
        CHECK_EQ(annlab::foliation_to_json(annlab::foliation_from_json(doc)), doc);
    }

    // pullbacks canonicalize to the pushforward of the inverse map, and the
    // canonical form is a fixed point of another trip through the parser
    const Json pullback = Json::parse(
        R"({"kind":"pullback","map":{"kind":"pinned_kick","eps":0.9,"harmonics":[1.0]}})");
    const Json canonical = annlab::foliation_to_json(annlab::foliation_from_json(pullback));
    CHECK_EQ(canonical.at("kind"), "pushforward");
    CHECK_EQ(canonical.at("map").at("kind"), "inverse");
    CHECK_EQ(canonical.at("map").at("item"), pullback.at("map"));
    CHECK_EQ(annlab::foliation_to_json(annlab::foliation_from_json(canonical)), canonical);

    const std::vector<std::string> regions = {
        R"({"kind":"sub_annulus","y_low":0.1,"y_high":0.9})",
        R"({"kind":"graph_lower","psi":[0.2,0.3,0.25,0.2]})",
        R"({"kind":"graph_upper","psi":[0.8,0.7,0.75,0.8]})",
    };
    for (const auto& text : regions) {
        CAPTURE(text);
        const Json doc = Json::parse(text);
        CHECK_EQ(annlab::region_to_json(annlab::region_from_json(doc)), doc);
    }

    const annlab::LiftedPoint z = annlab::point_from_json(Json::parse(R"({"x":1.5,"y":0.25})"));
    CHECK_EQ(z.x, 1.5);
    CHECK_EQ(z.y, 0.25);
    const annlab::LiftedPoint za = annlab::point_from_json(Json::parse(R"([1.5,0.25])"));
    CHECK_EQ(za.x, z.x);
    CHECK_EQ(za.y, z.y);
    CHECK_EQ(annlab::point_to_json(z), Json::parse(R"({"x":1.5,"y":0.25})"));
}

TEST_CASE("unknown or malformed fields in specs are rejected") {
    using annlab::ConfigError;
    CHECK_THROWS_AS(annlab::map_from_json(Json::parse(
                        R"({"kind":"integrable_twist","a":0.0,"b":1.0,"c":2.0})")),
                    ConfigError);
    CHECK_THROWS_AS(annlab::map_from_json(Json::parse(R"({"kind":"warp"})")), ConfigError);
    CHECK_THROWS_AS(annlab::map_from_json(Json::parse(
                        R"({"kind":"billiard","curve":{"kind":"ellipse","a":1.0,"b":0.5,"tilt":0.1}})")),
                    ConfigError);
    CHECK_THROWS_AS(annlab::map_from_json(Json::parse(R"({"kind":"deck"})")), ConfigError);
    CHECK_THROWS_AS(annlab::map_from_json(Json::parse(R"([1,2,3])")), ConfigError);
    CHECK_THROWS_AS(annlab::foliation_from_json(Json::parse(R"({"kind":"horizontal"})")),
                    ConfigError);
    CHECK_THROWS_AS(annlab::foliation_from_json(Json::parse(R"({"kind":"vertical","tilt":1})")),
                    ConfigError);
    CHECK_THROWS_AS(annlab::point_from_json(Json::parse(R"([1.0,2.0,3.0])")), ConfigError);
    CHECK_THROWS_AS(annlab::point_from_json(Json::parse(R"({"x":1.0})")), ConfigError);
}

TEST_CASE("rotation on the unit shear reports the upper boundary number exactly") {
    const fs::path dir = fresh_dir("rotation");
    const fs::path cfg = write_config(
        dir, "rot.json",
        experiment("rotation", shear_map(),
                   Json{{"circle", "C1"}, {"iterations", 1000}}));
    const int code = run_lab("rotation --config " + cfg.string() + " --out " + dir.string());
    CHECK_EQ(code, 0);

    const Json doc = read_json(dir / "result.json");
    CHECK_EQ(doc.at("command"), "rotation");
    CHECK_EQ(doc.at("inputs").at("map"), shear_map());
    CHECK_EQ(doc.at("inputs").at("seed"), 417);
    CHECK(doc.contains("version"));
    CHECK(doc.at("wall_time_ms").is_number());
    CHECK_EQ(doc.at("output").at("value").get<double>(), 1.0);
    CHECK_EQ(doc.at("output").at("half_width").get<double>(), 0.001);
}

TEST_CASE("find-orbits recovers both diameter orbits of the half ellipse") {
    const fs::path dir = fresh_dir("orbits");
    const fs::path cfg = write_config(
        dir, "orbits.json",
        experiment("find-orbits", half_ellipse_billiard(),
                   Json{{"p", 1}, {"q", 2}, {"tol", 1e-8}}));
    const int code = run_lab("find-orbits --config " + cfg.string() + " --out " +
                             dir.string() + " --plot phase-portrait");
    CHECK_EQ(code, 0);

    const Json doc = read_json(dir / "result.json");
    CHECK_EQ(doc.at("output").at("count"), 2);
    for (const auto& orbit : doc.at("output").at("orbits")) {
        CHECK_EQ(orbit.at("type_pq"), Json::array({1, 2}));
        CHECK_LE(orbit.at("residual").get<double>(), 1e-8);
        // both diameters of the ellipse bounce through the vertical mid-leaf
        for (const auto& z : orbit.at("points"))
            CHECK_LT(std::abs(z.at("y").get<double>() - 0.5), 1e-6);
    }

    // one header plus q rows per orbit
    const std::string csv = read_text(dir / "phase_portrait.csv");
    CHECK_EQ(line_count(csv), 1 + 2 * 2);
    CHECK_EQ(csv.substr(0, csv.find('\n')), "index,x,y");
}

TEST_CASE("an orbit type outside the twist interval is a precondition failure") {
    const fs::path dir = fresh_dir("twist-fail");
    const fs::path cfg = write_config(
        dir, "orbits.json",
        experiment("find-orbits", shear_map(), Json{{"p", 3}, {"q", 2}}));
    const int code = run_lab("find-orbits --config " + cfg.string() + " --out " + dir.string());
    CHECK_EQ(code, 2);

    const Json doc = read_json(dir / "result.json");
    CHECK_EQ(doc.at("error").at("type"), "TwistConditionFailed");
    CHECK_FALSE(doc.contains("output"));
}

TEST_CASE("configs with unknown fields or mismatched commands are fatal") {
    const fs::path dir = fresh_dir("strict");

    Json bogus = experiment("rotation", shear_map(), Json{{"iterations", 100}});
    bogus["typo"] = true;
    const fs::path cfg1 = write_config(dir, "bogus.json", bogus);
    CHECK_EQ(run_lab("rotation --config " + cfg1.string() + " --out " + dir.string()), 1);

    Json nested = experiment("rotation", shear_map(), Json{{"iterations", 100}});
    nested["map"]["extra"] = 3;
    const fs::path cfg2 = write_config(dir, "nested.json", nested);
    CHECK_EQ(run_lab("rotation --config " + cfg2.string() + " --out " + dir.string()), 1);

    const fs::path cfg3 = write_config(
        dir, "mismatch.json", experiment("rotation", shear_map(), Json{{"iterations", 100}}));
    CHECK_EQ(run_lab("tau --config " + cfg3.string() + " --out " + dir.string()), 1);

    CHECK_EQ(run_lab("rotation --config " + (dir / "does-not-exist.json").string()), 1);
}

TEST_CASE("an extremes query off the intersection locus is a refinement failure") {
    const fs::path dir = fresh_dir("extremes");
    // the pushed-forward vertical leaf through x = 0.2 never meets the leaf
    // at x = 0.3 for this composed kick
    const Json conjugated = Json::parse(
        R"({"kind":"compose","items":[
              {"kind":"integrable_twist","a":0.0,"b":1.0},
              {"kind":"pinned_kick","eps":0.9,"harmonics":[1.0]},
              {"kind":"integrable_twist","a":0.0,"b":-1.0}]})");
    const fs::path cfg = write_config(
        dir, "ext.json",
        experiment("extremes", conjugated, Json{{"x", 0.2}, {"x_image", 0.3}}));
    const int code = run_lab("extremes --config " + cfg.string() + " --out " + dir.string());
    CHECK_EQ(code, 3);
    CHECK_EQ(read_json(dir / "result.json").at("error").at("type"), "NoIntersectionFound");
}

TEST_CASE("identical runs produce byte-identical results up to wall time") {
    const fs::path dir = fresh_dir("determinism");
    const fs::path cfg = write_config(
        dir, "orbits.json",
        experiment("find-orbits", half_ellipse_billiard(),
                   Json{{"p", 1}, {"q", 2}, {"tol", 1e-8}}));
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    CHECK_EQ(run_lab("find-orbits --config " + cfg.string() + " --out " + (dir / "a").string()), 0);
    CHECK_EQ(run_lab("find-orbits --config " + cfg.string() + " --out " + (dir / "b").string()), 0);

    const std::string a = read_text(dir / "a" / "result.json");
    const std::string b = read_text(dir / "b" / "result.json");
    CHECK_EQ(without_wall_time(a), without_wall_time(b));
    CHECK_NE(without_wall_time(a), "");
}

TEST_CASE("the tau field of the unit shear is minus one on every same-leaf pair") {
    const fs::path dir = fresh_dir("tau-field");
    const fs::path cfg = write_config(
        dir, "tau.json",
        experiment("tau", shear_map(),
                   Json{{"grid", Json{{"nx", 8}, {"ny", 8}}}}));
    const int code = run_lab("tau --config " + cfg.string() + " --out " + dir.string() +
                             " --plot tau-field");
    CHECK_EQ(code, 0);

    const Json out = read_json(dir / "result.json").at("output");
    CHECK_EQ(out.at("nx"), 8);
    CHECK_EQ(out.at("ny"), 8);
    // 8 leaves with 8 points each: 8 * 8 * 7 ordered same-leaf pairs
    CHECK_EQ(out.at("same_leaf_pairs"), 448);
    int same_leaf_seen = 0;
    for (const auto& entry : out.at("values")) {
        if (!entry.at("same_leaf").get<bool>()) continue;
        ++same_leaf_seen;
        CHECK_EQ(entry.at("tau").get<int>(), -1);
    }
    CHECK_EQ(same_leaf_seen, 448);

    const std::string csv = read_text(dir / "tau_field.csv");
    CHECK_EQ(line_count(csv), 1 + 64 * 63);
    CHECK_EQ(csv.substr(0, csv.find('\n')), "i,j,x_i,y_i,x_j,y_j,same_leaf,tau");
}

TEST_CASE("sweep output does not depend on the worker count") {
    const fs::path dir = fresh_dir("sweep");
    const fs::path cfg = write_config(
        dir, "sweep.json",
        experiment("sweep", shear_map(),
                   Json{{"command", "rotation"},
                        {"parameters", Json{{"circle", "C1"}}},
                        {"vary", Json{{"iterations", Json::array({100, 200, 400})}}}}));
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    fs::create_directories(dir / "c");
    CHECK_EQ(run_lab("sweep --config " + cfg.string() + " --out " + (dir / "a").string() +
                     " --threads 1"),
             0);
    CHECK_EQ(run_lab("sweep --config " + cfg.string() + " --out " + (dir / "b").string() +
                     " --threads 4"),
             0);
    // the environment variable takes precedence over the flag
    CHECK_EQ(run_lab("sweep --config " + cfg.string() + " --out " + (dir / "c").string() +
                     " --threads 7",
                     "ANNULUS_LAB_THREADS=2"),
             0);

    const std::string a = without_wall_time(read_text(dir / "a" / "result.json"));
    const std::string b = without_wall_time(read_text(dir / "b" / "result.json"));
    const std::string c = without_wall_time(read_text(dir / "c" / "result.json"));
    CHECK_EQ(a, b);
    CHECK_EQ(a, c);

    const Json out = read_json(dir / "a" / "result.json").at("output");
    CHECK_EQ(out.at("cells"), 3);
    REQUIRE_EQ(out.at("results").size(), 3);
    for (int c2 = 0; c2 < 3; ++c2) {
        const Json& cell = out.at("results").at(c2);
        CHECK_EQ(cell.at("cell"), c2);
        CHECK_EQ(cell.at("seed").get<int>(), 417 + c2);
        CHECK_EQ(cell.at("output").at("value").get<double>(), 1.0);
    }

    CHECK_EQ(run_lab("sweep --config " + cfg.string() + " --out " + (dir / "a").string(),
                     "ANNULUS_LAB_THREADS=0"),
             1);
}

TEST_CASE("graph-scan certifies shear graphs and writes one overlay per graph") {
    const fs::path dir = fresh_dir("graph-scan");
    const fs::path cfg = write_config(
        dir, "scan.json",
        experiment("graph-scan", shear_map(),
                   Json{{"seeds", 3}, {"cells", 64}, {"iterates", 2000}}));
    const int code = run_lab("graph-scan --config " + cfg.string() + " --out " + dir.string() +
                             " --plot graph-overlay");
    CHECK_EQ(code, 0);

    const Json out = read_json(dir / "result.json").at("output");
    REQUIRE_EQ(out.at("graphs").size(), 3);
    CHECK_EQ(out.at("certified").get<int>(), 3);
    int overlays = 0;
    for (int k = 0; k < 3; ++k) {
        const Json& rec = out.at("graphs").at(k);
        CHECK(rec.at("found").get<bool>());
        CHECK_EQ(rec.at("rotation").get<double>(),
                 doctest::Approx(rec.at("seed_y").get<double>()).epsilon(1e-12));
        const fs::path overlay = dir / ("graph_" + std::to_string(k) + ".csv");
        if (fs::exists(overlay)) {
            ++overlays;
            CHECK_EQ(line_count(read_text(overlay)), 1 + 64);
        }
    }
    CHECK_EQ(overlays, 3);
}

TEST_CASE("a plot kind that does not match the result is a config error") {
    const fs::path dir = fresh_dir("plot-kind");
    const fs::path cfg = write_config(
        dir, "rot.json",
        experiment("rotation", shear_map(), Json{{"circle", "C1"}, {"iterations", 100}}));
    CHECK_EQ(run_lab("rotation --config " + cfg.string() + " --out " + dir.string() +
                     " --plot tau-field"),
             1);
    CHECK_EQ(run_lab("rotation --config " + cfg.string() + " --out " + dir.string() +
                     " --plot graph-overlay"),
             1);
}
