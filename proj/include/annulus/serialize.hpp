#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "annulus/delta.hpp"
#include "annulus/foliation.hpp"
#include "annulus/graphs.hpp"
#include "annulus/maps.hpp"
#include "annulus/orbits.hpp"
#include "annulus/rotation.hpp"

namespace annlab {

using Json = nlohmann::ordered_json;

/** Strict-parsing guard: every present field must be on the allow list. */
inline void expect_fields(const Json& j, std::initializer_list<const char*> allowed,
                          const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(where + ": unknown field '" + item.key() + "'");
    }
}

/** Fetch a required field, failing with a ConfigError that names the context. */
inline const Json& need(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(where + ": missing required field '" + key + "'");
    return j.at(key);
}

// ---------------------------------------------------------------------------
// map specs
// ---------------------------------------------------------------------------

inline Json curve_to_json(const ConvexCurve& c) {
    if (c.kind() == ConvexCurve::Kind::Ellipse)
        return Json{{"kind", "ellipse"}, {"a", c.a()}, {"b", c.b()}};
    return Json{{"kind", "fourier"}, {"harmonics", c.harmonics()}};
}

inline ConvexCurve curve_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("curve spec must be an object with a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ellipse") {
        expect_fields(j, {"kind", "a", "b"}, "curve(ellipse)");
        return ConvexCurve::ellipse(need(j, "a", "curve(ellipse)"), need(j, "b", "curve(ellipse)"));
    }
    if (kind == "fourier") {
        expect_fields(j, {"kind", "harmonics"}, "curve(fourier)");
        return ConvexCurve::fourier(need(j, "harmonics", "curve(fourier)").get<std::vector<double>>());
    }
    throw ConfigError("unknown curve kind: " + kind);
}

inline Json map_to_json(const MapSpec& m) {
    return std::visit(
        [](const auto& node) -> Json {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, IntegrableTwistNode>) {
                return Json{{"kind", "integrable_twist"}, {"a", node.a}, {"b", node.b}};
            } else if constexpr (std::is_same_v<T, BilliardNode>) {
                return Json{{"kind", "billiard"}, {"curve", curve_to_json(*node.curve)}};
            } else if constexpr (std::is_same_v<T, PinnedKickNode>) {
                return Json{{"kind", "pinned_kick"},
                            {"eps", node.eps},
                            {"harmonics", node.harmonics}};
            } else if constexpr (std::is_same_v<T, ComposeNode>) {
                Json items = Json::array();
                for (const auto& item : node.items) items.push_back(map_to_json(*item));
                return Json{{"kind", "compose"}, {"items", std::move(items)}};
            } else if constexpr (std::is_same_v<T, InverseNode>) {
                return Json{{"kind", "inverse"}, {"item", map_to_json(*node.item)}};
            } else if constexpr (std::is_same_v<T, PowerNode>) {
                return Json{{"kind", "power"}, {"item", map_to_json(*node.item)}, {"n", node.n}};
            } else {
                static_assert(std::is_same_v<T, DeckNode>);
                if (node.n == 0) return Json{{"kind", "identity"}};
                return Json{{"kind", "deck"}, {"n", node.n}};
            }
        },
        m.node);
}

inline MapSpec map_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("map spec must be an object with a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "integrable_twist") {
            expect_fields(j, {"kind", "a", "b"}, "map(integrable_twist)");
            return MapSpec::integrable_twist(need(j, "a", "map(integrable_twist)"),
                                             need(j, "b", "map(integrable_twist)"));
        }
        if (kind == "billiard") {
            expect_fields(j, {"kind", "curve"}, "map(billiard)");
            return MapSpec::billiard(curve_from_json(need(j, "curve", "map(billiard)")));
        }
        if (kind == "pinned_kick") {
            expect_fields(j, {"kind", "eps", "harmonics"}, "map(pinned_kick)");
            return MapSpec::pinned_kick(
                need(j, "eps", "map(pinned_kick)"),
                need(j, "harmonics", "map(pinned_kick)").get<std::vector<double>>());
        }
        if (kind == "compose") {
            expect_fields(j, {"kind", "items"}, "map(compose)");
            std::vector<MapSpec> items;
            const Json& arr = need(j, "items", "map(compose)");
            if (!arr.is_array()) throw ConfigError("map(compose): items must be an array");
            for (const auto& item : arr) items.push_back(map_from_json(item));
            return MapSpec::compose(std::move(items));
        }
        if (kind == "inverse") {
            expect_fields(j, {"kind", "item"}, "map(inverse)");
            return MapSpec::inverse(map_from_json(need(j, "item", "map(inverse)")));
        }
        if (kind == "power") {
            expect_fields(j, {"kind", "item", "n"}, "map(power)");
            return MapSpec::power(map_from_json(need(j, "item", "map(power)")),
                                  need(j, "n", "map(power)"));
        }
        if (kind == "deck") {
            expect_fields(j, {"kind", "n"}, "map(deck)");
            return MapSpec::deck(need(j, "n", "map(deck)"));
        }
        if (kind == "identity") {
            expect_fields(j, {"kind"}, "map(identity)");
            return MapSpec::identity();
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid map parameters: ") + e.what());
    }
    throw ConfigError("unknown map kind: " + kind);
}

inline Json foliation_to_json(const FoliationRef& F) {
    if (F.is_vertical()) return Json{{"kind", "vertical"}};
    return Json{{"kind", "pushforward"}, {"map", map_to_json(*F.push)}};
}

inline FoliationRef foliation_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("foliation spec must be an object with a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "vertical") {
        expect_fields(j, {"kind"}, "foliation(vertical)");
        return FoliationRef::vertical();
    }
    if (kind == "pushforward") {
        expect_fields(j, {"kind", "map"}, "foliation(pushforward)");
        return FoliationRef::pushforward(map_from_json(need(j, "map", "foliation(pushforward)")));
    }
    if (kind == "pullback") {
        expect_fields(j, {"kind", "map"}, "foliation(pullback)");
        return inverse_map_foliation(map_from_json(need(j, "map", "foliation(pullback)")),
                                     FoliationRef::vertical());
    }
    throw ConfigError("unknown foliation kind: " + kind);
}

inline Json region_to_json(const RegionSpec& r) {
    if (r.kind == RegionSpec::Kind::SubAnnulus)
        return Json{{"kind", "sub_annulus"}, {"y_low", r.y_low}, {"y_high", r.y_high}};
    return Json{{"kind", r.upper ? "graph_upper" : "graph_lower"}, {"psi", r.psi}};
}

inline RegionSpec region_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("region spec must be an object with a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sub_annulus") {
        expect_fields(j, {"kind", "y_low", "y_high"}, "region(sub_annulus)");
        return RegionSpec::sub_annulus(need(j, "y_low", "region(sub_annulus)"),
                                       need(j, "y_high", "region(sub_annulus)"));
    }
    if (kind == "graph_lower") {
        expect_fields(j, {"kind", "psi"}, "region(graph_lower)");
        return RegionSpec::graph_lower(need(j, "psi", "region(graph_lower)").get<std::vector<double>>());
    }
    if (kind == "graph_upper") {
        expect_fields(j, {"kind", "psi"}, "region(graph_upper)");
        return RegionSpec::graph_upper(need(j, "psi", "region(graph_upper)").get<std::vector<double>>());
    }
    throw ConfigError("unknown region kind: " + kind);
}

// ---------------------------------------------------------------------------
// points and records
// ---------------------------------------------------------------------------

inline Json point_to_json(const LiftedPoint& z) { return Json{{"x", z.x}, {"y", z.y}}; }

inline LiftedPoint point_from_json(const Json& j) {
    if (j.is_array()) {
        if (j.size() != 2) throw ConfigError("point array must have exactly two entries");
        return {j.at(0), j.at(1)};
    }
    expect_fields(j, {"x", "y"}, "point");
    return {need(j, "x", "point"), need(j, "y", "point")};
}

inline const char* class_name(AngleClass c) {
    switch (c) {
        case AngleClass::LeftOf: return "left_of";
        case AngleClass::Below: return "below";
        case AngleClass::RightOf: return "right_of";
        case AngleClass::Above: return "above";
    }
    return "?";
}

inline Json to_json(const RotationEstimate& r) {
    return Json{{"value", r.value}, {"half_width", r.half_width}, {"iterates", r.iterates}};
}

inline Json to_json(const TwistInterval& t) {
    return Json{{"rho0", t.rho0},       {"rho1", t.rho1},
                {"lo", t.lo},           {"hi", t.hi},
                {"half_width", t.half_width}, {"increasing_in_y", t.increasing_in_y}};
}

inline Json to_json(const TwistCone& c) {
    return Json{{"beta", c.beta},
                {"min_dxdy", c.min_dxdy},
                {"positive_twist", c.positive_twist}};
}

inline Json to_json(const OrbitRecord& rec) {
    Json points = Json::array();
    for (const auto& z : rec.points) points.push_back(point_to_json(z));
    return Json{{"type_pq", Json::array({rec.p, rec.q})},
                {"rotation", rec.rotation},
                {"points", std::move(points)},
                {"residual", rec.residual},
                {"degenerate_continuum", rec.degenerate_continuum},
                {"well_ordered", rec.well_ordered}};
}

inline Json to_json(const GraphRecord& rec) {
    Json j{{"found", rec.found},
           {"seed_y", rec.seed_y},
           {"rotation", rec.rotation},
           {"cells_occupied", rec.cells_occupied},
           {"spread_max", rec.spread_max},
           {"invariant", rec.invariant},
           {"transverse_to", rec.transverse_to}};
    if (!rec.y_mean.empty()) {
        j["y_min"] = rec.y_min;
        j["y_max"] = rec.y_max;
        j["lipschitz_estimate"] = rec.lipschitz;
        j["samples"] = rec.y_mean;
    }
    return j;
}

inline Json to_json(const ConnectReport& rep) {
    const char* status = rep.verdict == ConnectReport::Verdict::Connected ? "connected"
                         : rep.verdict == ConnectReport::Verdict::Blocked ? "blocked"
                                                                          : "inconclusive";
    Json j{{"status", status}, {"eps", rep.eps}, {"budget", rep.budget}};
    if (!rep.witness.empty()) {
        j["crossing_seed"] = rep.crossing_seed;
        j["crossing_steps"] = rep.crossing_steps;
        Json w = Json::array();
        for (const auto& z : rep.witness) w.push_back(point_to_json(z));
        j["witness"] = std::move(w);
    }
    if (rep.blocking) j["blocking"] = to_json(*rep.blocking);
    return j;
}

inline Json to_json(const MonotonicityReport& rep) {
    Json counterexamples = Json::array();
    for (const auto& c : rep.counterexamples) {
        counterexamples.push_back(Json{{"z", point_to_json(c.z)},
                                       {"zp", point_to_json(c.zp)},
                                       {"tau", c.tau_value},
                                       {"class_F", class_name(c.cls_F)},
                                       {"class_G", class_name(c.cls_G)},
                                       {"reason", c.reason}});
    }
    return Json{{"direction", rep.direction},
                {"pairs_checked", rep.pairs_checked},
                {"same_leaf_pairs", rep.same_leaf_pairs},
                {"tau_zero_pairs", rep.tau_zero_pairs},
                {"certified", rep.certified()},
                {"counterexamples", std::move(counterexamples)}};
}

inline Json to_json(const MembershipResult& r) {
    const char* kind = r.kind == MembershipResult::Kind::Above2    ? "above2"
                       : r.kind == MembershipResult::Kind::Exactly2 ? "exactly2"
                                                                    : "none";
    Json j{{"kind", kind}, {"max_value", r.max_value}, {"pairs_scanned", r.pairs_scanned}};
    if (r.exactly2)
        j["exactly2"] = Json{{"z", point_to_json(r.exactly2->z)},
                             {"zp", point_to_json(r.exactly2->zp)},
                             {"value", r.exactly2->value}};
    if (r.above2)
        j["above2"] = Json{{"z", point_to_json(r.above2->z)},
                           {"zp", point_to_json(r.above2->zp)},
                           {"value", r.above2->value}};
    return j;
}

inline Json to_json(const LeafIntersections& li) {
    Json points = Json::array();
    for (const auto& z : li.points) points.push_back(point_to_json(z));
    return Json{{"count", li.count},
                {"params", li.params},
                {"points", std::move(points)},
                {"lowest", point_to_json(li.lowest)},
                {"last", point_to_json(li.last)}};
}

}  // namespace annlab
