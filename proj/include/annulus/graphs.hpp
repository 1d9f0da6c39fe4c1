#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "annulus/foliation.hpp"
#include "annulus/maps.hpp"

namespace annlab {

struct GraphScanOptions {
    int iterates = 10000;
    int transient = 100;        // dropped before recording
    int cells = 1024;
    int seeds = 33;
    double spread_tol = 0.02;   // max per-cell thickness of a certified graph
    double invariance_tol = 0.025;
    int lipschitz_baseline = 8; // cells between slope probes
    double seed_margin = 0.03;
};

/** One orbit closure tested for being the graph of a circle function. */
struct GraphRecord {
    bool found = false;
    double seed_y = 0.0;
    double rotation = 0.0;
    std::vector<double> y_mean;  // per cell, empty unless every cell filled
    double y_min = 0.0, y_max = 0.0;
    double spread_max = 1.0;
    double lipschitz = 0.0;
    int cells_occupied = 0;
    bool invariant = false;
    std::vector<std::string> transverse_to;  // foliations the graph crosses leafwise
};

/**
 * Seeds a y-grid (offset by the golden ratio so rational resonances are not
 * sampled head-on), iterates each seed, and certifies an invariant graph when
 * the orbit closure fills every x-cell with small vertical spread and the
 * sampled graph maps into itself.  The Lipschitz estimate is taken over a
 * fixed cell baseline rather than adjacent cells to dampen binning noise.
 */
inline std::vector<GraphRecord> invariant_graph_scan(const MapSpec& f,
                                                     const GraphScanOptions& opt = {}) {
    std::vector<GraphRecord> out;
    const double golden = 0.6180339887498949;
    for (int k = 0; k < opt.seeds; ++k) {
        const double u = frac((k + 0.5) * golden);
        GraphRecord rec;
        rec.seed_y = opt.seed_margin + (1.0 - 2.0 * opt.seed_margin) * u;

        std::vector<double> lo(opt.cells, std::numeric_limits<double>::infinity());
        std::vector<double> hi(opt.cells, -std::numeric_limits<double>::infinity());
        std::vector<double> sum(opt.cells, 0.0);
        std::vector<int> cnt(opt.cells, 0);
        LiftedPoint z{0.1234, rec.seed_y};
        for (int i = 0; i < opt.iterates; ++i) {
            z = apply_lift(f, {frac(z.x), z.y});
            if (i < opt.transient) continue;
            const int c = std::min(opt.cells - 1, static_cast<int>(frac(z.x) * opt.cells));
            lo[c] = std::min(lo[c], z.y);
            hi[c] = std::max(hi[c], z.y);
            sum[c] += z.y;
            ++cnt[c];
        }
        // the recording loop reduces mod 1, so measure rotation on a short lifted orbit
        {
            LiftedPoint w{0.1234, rec.seed_y};
            for (int i = 0; i < 256; ++i) w = apply_lift(f, w);
            rec.rotation = (w.x - 0.1234) / 256.0;
        }

        rec.spread_max = 0.0;
        for (int c = 0; c < opt.cells; ++c) {
            if (cnt[c] == 0) continue;
            ++rec.cells_occupied;
            rec.spread_max = std::max(rec.spread_max, hi[c] - lo[c]);
        }
        if (rec.cells_occupied == opt.cells && rec.spread_max <= opt.spread_tol) {
            rec.y_mean.resize(opt.cells);
            rec.y_min = std::numeric_limits<double>::infinity();
            rec.y_max = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < opt.cells; ++c) {
                rec.y_mean[c] = sum[c] / cnt[c];
                rec.y_min = std::min(rec.y_min, rec.y_mean[c]);
                rec.y_max = std::max(rec.y_max, rec.y_mean[c]);
            }
            // invariance: sampled graph points land back on the graph
            rec.invariant = true;
            for (int c = 0; c < opt.cells; c += 16) {
                const LiftedPoint p{(c + 0.5) / opt.cells, rec.y_mean[c]};
                const LiftedPoint q = apply_lift(f, p);
                const int cq =
                    std::min(opt.cells - 1, static_cast<int>(frac(q.x) * opt.cells));
                if (std::abs(q.y - rec.y_mean[cq]) > opt.invariance_tol) {
                    rec.invariant = false;
                    break;
                }
            }
            const int base = opt.lipschitz_baseline;
            for (int c = 0; c < opt.cells; ++c) {
                const double dy = rec.y_mean[(c + base) % opt.cells] - rec.y_mean[c];
                rec.lipschitz = std::max(
                    rec.lipschitz, std::abs(dy) / (static_cast<double>(base) / opt.cells));
            }
            // transversality: walking the graph must cross leaves one way
            rec.transverse_to.push_back("vertical");  // one y per x by construction
            const auto crosses_leafwise = [&](const FoliationRef& F) {
                double prev = leaf_coordinates(F, {0.5 / opt.cells, rec.y_mean[0]}).x;
                for (int c = 16; c < opt.cells; c += 16) {
                    const double xi =
                        leaf_coordinates(F, {(c + 0.5) / opt.cells, rec.y_mean[c]}).x;
                    if (xi <= prev) return false;
                    prev = xi;
                }
                return true;
            };
            bool transverse = true;
            if (crosses_leafwise(FoliationRef::pushforward(f))) {
                rec.transverse_to.push_back("image of vertical");
            } else {
                transverse = false;
            }
            if (crosses_leafwise(inverse_map_foliation(f, FoliationRef::vertical()))) {
                rec.transverse_to.push_back("preimage of vertical");
            } else {
                transverse = false;
            }
            rec.found = rec.invariant && transverse;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// connecting orbits vs blocking graphs
// ---------------------------------------------------------------------------

struct ConnectOptions {
    bool upward = true;          // search orbits from the bottom band to the top band
    double from_band = 0.05;     // seeds start within this distance of the start circle
    double to_band = 0.05;       // success within this distance of the target circle
    int seeds = 48;
    int budget = 4000;           // iterates per seed
    GraphScanOptions scan;
};

struct ConnectReport {
    enum class Verdict { Connected, Blocked, Inconclusive } verdict =
        Verdict::Inconclusive;
    std::vector<LiftedPoint> witness;      // crossing orbit segment when connected
    std::optional<GraphRecord> blocking;   // most interior certified graph when blocked
    int crossing_seed = -1;
    int crossing_steps = 0;
    double eps = 0.0;                      // boundary band used by the search
    int budget = 0;                        // iterates allowed per seed
};

/**
 * One direction of the dichotomy: either some orbit segment climbs from one
 * boundary band to the other, or a certified invariant graph separates them.
 * Finding both at once is a contradiction and reported as an internal error.
 */
inline ConnectReport mather_connect_search(const MapSpec& f, const ConnectOptions& opt = {}) {
    ConnectReport report;
    report.eps = opt.from_band;
    report.budget = opt.budget;
    const double y_start = opt.upward ? opt.from_band * 0.5 : 1.0 - opt.from_band * 0.5;
    const auto reached = [&](double y) {
        return opt.upward ? y >= 1.0 - opt.to_band : y <= opt.to_band;
    };
    for (int s = 0; s < opt.seeds && report.witness.empty(); ++s) {
        LiftedPoint z{(s + 0.5) / opt.seeds, y_start};
        std::vector<LiftedPoint> trail = {z};
        for (int i = 0; i < opt.budget; ++i) {
            z = apply_lift(f, {frac(z.x), z.y});
            trail.push_back(z);
            if (reached(z.y)) {
                report.witness = std::move(trail);
                report.crossing_seed = s;
                report.crossing_steps = i + 1;
                break;
            }
        }
    }

    const auto scans = invariant_graph_scan(f, opt.scan);
    const double lo_band = opt.upward ? opt.from_band : opt.to_band;
    const double hi_band = opt.upward ? opt.to_band : opt.from_band;
    double best_clearance = 0.0;
    for (const auto& rec : scans) {
        if (!rec.found) continue;
        const double clearance = std::min(rec.y_min - lo_band,
                                          (1.0 - hi_band) - rec.y_max);
        if (clearance > best_clearance) {
            best_clearance = clearance;
            report.blocking = rec;
        }
    }

    const bool connected = !report.witness.empty();
    const bool blocked = report.blocking.has_value();
    if (connected && blocked)
        throw Error("connect search found both a crossing orbit and a separating graph");
    report.verdict = connected  ? ConnectReport::Verdict::Connected
                     : blocked ? ConnectReport::Verdict::Blocked
                               : ConnectReport::Verdict::Inconclusive;
    if (!connected) {
        report.witness.clear();
        report.crossing_seed = -1;
        report.crossing_steps = 0;
    }
    return report;
}

}  // namespace annlab
