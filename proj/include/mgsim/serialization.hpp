#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "mgsim/decision_tree.hpp"
#include "mgsim/errors.hpp"
#include "mgsim/generator.hpp"
#include "mgsim/microgrid.hpp"
#include "mgsim/qlearning.hpp"
#include "mgsim/time_series.hpp"

namespace mgsim {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Profiles and component specs
// ---------------------------------------------------------------------------

inline void to_json(json& j, const TimeSeries& ts) {
    j = json{{"values", ts.values},
             {"step", TimeSeries::step_hours},
             {"kind", to_string(ts.kind)}};
}

inline void from_json(const json& j, TimeSeries& ts) {
    j.at("values").get_to(ts.values);
    const double step = j.value("step", 1.0);
    if (step != TimeSeries::step_hours) throw DomainError("only 1 h steps are supported");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "load") {
        ts.kind = ProfileKind::load;
    } else if (kind == "pv") {
        ts.kind = ProfileKind::pv;
    } else {
        throw DomainError("unknown profile kind: " + kind);
    }
}

inline void to_json(json& j, const BatterySpec& b) {
    j = json{{"capacity", b.capacity},
             {"power_charge_max", b.power_charge_max},
             {"power_discharge_max", b.power_discharge_max},
             {"efficiency", b.efficiency},
             {"soc_min", b.soc_min},
             {"soc_max", b.soc_max},
             {"soc_init", b.soc_init}};
}

inline void from_json(const json& j, BatterySpec& b) {
    j.at("capacity").get_to(b.capacity);
    j.at("power_charge_max").get_to(b.power_charge_max);
    j.at("power_discharge_max").get_to(b.power_discharge_max);
    j.at("efficiency").get_to(b.efficiency);
    j.at("soc_min").get_to(b.soc_min);
    j.at("soc_max").get_to(b.soc_max);
    j.at("soc_init").get_to(b.soc_init);
}

inline void to_json(json& j, const GensetSpec& g) {
    j = json{{"rated_power", g.rated_power},
             {"fuel_price", g.fuel_price},
             {"min_loading", g.min_loading}};
}

inline void from_json(const json& j, GensetSpec& g) {
    j.at("rated_power").get_to(g.rated_power);
    j.at("fuel_price").get_to(g.fuel_price);
    j.at("min_loading").get_to(g.min_loading);
}

inline void to_json(json& j, const Tariff& t) {
    j = json{{"import_price", t.import_price}, {"export_price", t.export_price}};
}

inline void from_json(const json& j, Tariff& t) {
    j.at("import_price").get_to(t.import_price);
    j.at("export_price").get_to(t.export_price);
}

inline void to_json(json& j, const GridSpec& g) {
    j = json{{"power_import_max", g.power_import_max},
             {"power_export_max", g.power_export_max},
             {"tariff", g.tariff},
             {"weak", g.weak},
             {"outage", g.outage}};
}

inline void from_json(const json& j, GridSpec& g) {
    j.at("power_import_max").get_to(g.power_import_max);
    j.at("power_export_max").get_to(g.power_export_max);
    j.at("tariff").get_to(g.tariff);
    j.at("weak").get_to(g.weak);
    g.outage.clear();
    if (j.contains("outage")) j.at("outage").get_to(g.outage);
}

inline void to_json(json& j, const MicrogridConfig& c) {
    j = json{{"load", c.load},
             {"pv", c.pv},
             {"battery", c.battery},
             {"genset", nullptr},
             {"grid", nullptr},
             {"loss_load_price", c.loss_load_price},
             {"pv_curtail_price", c.pv_curtail_price}};
    if (c.genset) j["genset"] = *c.genset;
    if (c.grid) j["grid"] = *c.grid;
}

inline void from_json(const json& j, MicrogridConfig& c) {
    j.at("load").get_to(c.load);
    j.at("pv").get_to(c.pv);
    j.at("battery").get_to(c.battery);
    c.genset.reset();
    c.grid.reset();
    if (j.contains("genset") && !j.at("genset").is_null()) {
        c.genset = j.at("genset").get<GensetSpec>();
    }
    if (j.contains("grid") && !j.at("grid").is_null()) {
        c.grid = j.at("grid").get<GridSpec>();
    }
    j.at("loss_load_price").get_to(c.loss_load_price);
    j.at("pv_curtail_price").get_to(c.pv_curtail_price);
}

// ---------------------------------------------------------------------------
// Scenario sets
// ---------------------------------------------------------------------------

inline void to_json(json& j, const ScenarioSet& s) {
    j = json{{"seed", s.seed},
             {"preset_name", to_string(s.preset)},
             {"microgrids", s.microgrids}};
}

inline void from_json(const json& j, ScenarioSet& s) {
    j.at("seed").get_to(s.seed);
    s.preset = parse_preset(j.at("preset_name").get<std::string>());
    j.at("microgrids").get_to(s.microgrids);
}

inline void save_scenario_set(const ScenarioSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write scenario file: " + path);
    out << json(set).dump() << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline ScenarioSet load_scenario_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scenario file: " + path);
    json j;
    try {
        in >> j;
        return j.get<ScenarioSet>();
    } catch (const json::exception& e) {
        throw IoError("malformed scenario file " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Learned policies
// ---------------------------------------------------------------------------

inline void to_json(json& j, const QTable& t) {
    j = json{{"hour_bins", 24},
             {"net_load_bins", t.disc.net_bins},
             {"soc_bins", t.disc.soc_bins},
             {"net_load_min", t.disc.net_min},
             {"net_load_max", t.disc.net_max},
             {"actions", t.actions},
             {"values", t.values},
             {"visit_counts", t.visit_counts}};
}

inline void from_json(const json& j, QTable& t) {
    t.disc.net_bins = j.at("net_load_bins").get<int>();
    t.disc.soc_bins = j.at("soc_bins").get<int>();
    t.disc.net_min = j.at("net_load_min").get<double>();
    t.disc.net_max = j.at("net_load_max").get<double>();
    j.at("actions").get_to(t.actions);
    j.at("values").get_to(t.values);
    j.at("visit_counts").get_to(t.visit_counts);
    if (t.values.size() != static_cast<std::size_t>(t.disc.state_count()) * t.actions ||
        t.visit_counts.size() != t.values.size()) {
        throw DomainError("q-table shape mismatch");
    }
}

namespace detail {

inline json dt_node_to_json(const DTModel& m, int i) {
    const auto& n = m.nodes[i];
    if (n.leaf()) return json{{"action", n.action}};
    return json{{"feature", n.feature},
                {"threshold", n.threshold},
                {"left", dt_node_to_json(m, n.left)},
                {"right", dt_node_to_json(m, n.right)}};
}

inline int dt_node_from_json(const json& j, DTModel& m) {
    DTModel::Node n;
    if (j.contains("action") && !j.contains("feature")) {
        j.at("action").get_to(n.action);
        m.nodes.push_back(n);
        return static_cast<int>(m.nodes.size() - 1);
    }
    j.at("feature").get_to(n.feature);
    j.at("threshold").get_to(n.threshold);
    if (n.feature < 0 || n.feature >= kDtNumFeatures) throw DomainError("bad tree feature index");
    const int self = static_cast<int>(m.nodes.size());
    m.nodes.push_back(n);
    const int l = dt_node_from_json(j.at("left"), m);
    const int r = dt_node_from_json(j.at("right"), m);
    m.nodes[self].left = l;
    m.nodes[self].right = r;
    return self;
}

}  // namespace detail

inline void to_json(json& j, const DTModel& m) {
    j = json{{"max_depth", m.max_depth},
             {"min_leaf_count", m.min_leaf_count},
             {"net_load_min", m.net_min},
             {"net_load_max", m.net_max},
             {"tree", detail::dt_node_to_json(m, 0)}};
}

inline void from_json(const json& j, DTModel& m) {
    j.at("max_depth").get_to(m.max_depth);
    j.at("min_leaf_count").get_to(m.min_leaf_count);
    m.net_min = j.at("net_load_min").get<double>();
    m.net_max = j.at("net_load_max").get<double>();
    m.nodes.clear();
    detail::dt_node_from_json(j.at("tree"), m);
}

}  // namespace mgsim
