#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "mgsim/microgrid.hpp"

namespace mgsim {

// ---------------------------------------------------------------------------
// State discretization
// ---------------------------------------------------------------------------

/// Maps an observation to (hour, net-load bin, soc bin) flattened to one
/// index. Net load covers [-pv_peak, load_peak]; out-of-range values clamp to
/// the edge bins.
struct Discretizer {
    int net_bins = 10;
    int soc_bins = 10;
    double net_min = -1.0;
    double net_max = 1.0;

    static Discretizer for_limits(const AssetLimits& lim, int net_bins = 10, int soc_bins = 10) {
        Discretizer d;
        d.net_bins = net_bins;
        d.soc_bins = soc_bins;
        d.net_min = -lim.pv_peak;
        d.net_max = lim.load_peak;
        if (d.net_max <= d.net_min) d.net_max = d.net_min + 1.0;
        return d;
    }

    int state_count() const { return 24 * net_bins * soc_bins; }

    /// Net load scaled to [0, 1].
    double net_norm(const Observation& obs) const {
        const double net = obs.load_now - obs.pv_now;
        return std::clamp((net - net_min) / (net_max - net_min), 0.0, 1.0);
    }

    int index(const Observation& obs) const {
        const int nb = std::min(net_bins - 1,
                                static_cast<int>(std::floor(net_norm(obs) * net_bins)));
        const int sb = std::min(soc_bins - 1,
                                std::max(0, static_cast<int>(std::floor(obs.soc_fraction * soc_bins))));
        return (obs.hour_of_day * net_bins + nb) * soc_bins + sb;
    }
};

// ---------------------------------------------------------------------------
// Discrete action templates
// ---------------------------------------------------------------------------

/// The discrete action vocabulary used by the tabular controllers. Each
/// template expands to a concrete, limit-respecting ControlAction for the
/// current observation; templates deliberately include poor choices (idle,
/// shed) so the learner has something to reject.
enum class ActionTemplate : int {
    battery_serve = 0,  // deficit: battery, grid, genset; surplus: charge
    genset_serve = 1,   // deficit: genset first
    grid_serve = 2,     // deficit: grid first
    charge_from_pv = 3, // reserve pv for charging, serve load from grid/genset
    charge_from_grid = 4,  // import for the full load, store all pv
    export_surplus = 5, // no charging, sell the surplus
    idle = 6,           // battery untouched, no export
    shed_remainder = 7, // worst case: drop any deficit
};

inline constexpr int kNumActionTemplates = 8;

inline const char* to_string(ActionTemplate t) {
    switch (t) {
        case ActionTemplate::battery_serve: return "battery-serve";
        case ActionTemplate::genset_serve: return "genset-serve";
        case ActionTemplate::grid_serve: return "grid-serve";
        case ActionTemplate::charge_from_pv: return "charge-from-pv";
        case ActionTemplate::charge_from_grid: return "charge-from-grid";
        case ActionTemplate::export_surplus: return "export-surplus";
        case ActionTemplate::idle: return "idle";
        case ActionTemplate::shed_remainder: return "shed-remainder";
    }
    return "?";
}

namespace detail {

struct Headroom {
    double charge = 0.0;     // kW the battery can absorb this step
    double discharge = 0.0;  // kW the battery can deliver
    double import_max = 0.0;
    double export_max = 0.0;
    double genset_max = 0.0;
};

inline Headroom headroom(const Observation& obs) {
    const auto& cap = obs.capacities;
    Headroom h;
    const double soc = obs.soc_fraction * cap.battery_capacity;
    const double room_up = (cap.soc_max * cap.battery_capacity - soc) / cap.battery_efficiency;
    const double room_down = (soc - cap.soc_min * cap.battery_capacity) * cap.battery_efficiency;
    h.charge = std::max(0.0, std::min(cap.battery_charge_max, room_up));
    h.discharge = std::max(0.0, std::min(cap.battery_discharge_max, room_down));
    if (cap.has_grid && obs.grid_up) {
        h.import_max = cap.grid_import_max;
        h.export_max = cap.grid_export_max;
    }
    if (cap.has_genset) h.genset_max = cap.genset_rated;
    return h;
}

inline double take(double& remaining, double limit) {
    const double v = std::min(remaining, std::max(0.0, limit));
    remaining -= v;
    return v;
}

}  // namespace detail

/// Rounds a genset request inside the forbidden band (0, min_loading*rated)
/// to whichever endpoint keeps the balance closed, preferring zero added
/// shedding and then lower cost. Power is shifted between genset, grid import
/// and battery discharge; shedding absorbs what nothing else can.
inline void finalize_genset(ControlAction& a, const Observation& obs) {
    const auto& cap = obs.capacities;
    if (!cap.has_genset) return;
    const double band = cap.genset_min_loading * cap.genset_rated;
    if (a.genset_power <= 0.0 || a.genset_power >= band) return;

    const auto h = detail::headroom(obs);
    const double g = a.genset_power;

    // Candidate A: round down to zero, redistribute g elsewhere. Imports are
    // preferred because they leave the battery trajectory untouched.
    ControlAction down = a;
    down.genset_power = 0.0;
    {
        double need = g;
        const double from_import = std::min(need, h.import_max - down.grid_import);
        down.grid_import += std::max(0.0, from_import);
        need -= std::max(0.0, from_import);
        // A freed charge slot turns pv into load service one-for-one.
        const double from_charge = std::min(need, down.battery_charge);
        down.battery_charge -= from_charge;
        down.pv_to_load += from_charge;
        need -= from_charge;
        if (down.battery_charge <= 0.0) {
            const double from_battery = std::min(need, h.discharge - down.battery_discharge);
            down.battery_discharge += std::max(0.0, from_battery);
            need -= std::max(0.0, from_battery);
        }
        down.load_shed += std::max(0.0, need);
    }

    // Candidate B: round up to the band, absorbing the overshoot.
    bool up_ok = false;
    ControlAction up = a;
    {
        double excess = band - g;
        up.genset_power = band;
        const double cut_import = std::min(excess, up.grid_import);
        up.grid_import -= cut_import;
        excess -= cut_import;
        const double cut_discharge = std::min(excess, up.battery_discharge);
        up.battery_discharge -= cut_discharge;
        excess -= cut_discharge;
        const double cut_shed = std::min(excess, up.load_shed);
        up.load_shed -= cut_shed;
        excess -= cut_shed;
        up_ok = excess <= 1e-9;
    }

    const auto cost_of = [&](const ControlAction& x) {
        double c = x.genset_power * cap.genset_fuel_price +
                   x.grid_import * obs.import_price_now -
                   x.grid_export * obs.export_price_now +
                   x.load_shed * cap.loss_load_price + x.pv_curtailed * cap.pv_curtail_price;
        return c;
    };

    if (!up_ok) {
        a = down;
        return;
    }
    const bool down_sheds = down.load_shed > a.load_shed + 1e-12;
    const bool up_sheds = up.load_shed > a.load_shed + 1e-12;
    if (down_sheds != up_sheds) {
        a = down_sheds ? up : down;
        return;
    }
    a = cost_of(up) < cost_of(down) ? up : down;
}

/// Expands a discrete template into a concrete action for this observation.
inline ControlAction expand_template(ActionTemplate t, const Observation& obs) {
    const auto h = detail::headroom(obs);
    const double load = obs.load_now;
    const double pv = obs.pv_now;

    ControlAction a;
    a.pv_to_load = std::min(pv, load);
    double deficit = load - a.pv_to_load;
    double surplus = pv - a.pv_to_load;

    switch (t) {
        case ActionTemplate::battery_serve:
            a.battery_discharge = detail::take(deficit, h.discharge);
            a.grid_import = detail::take(deficit, h.import_max);
            a.genset_power = detail::take(deficit, h.genset_max);
            a.battery_charge = detail::take(surplus, h.charge);
            a.grid_export = detail::take(surplus, h.export_max);
            break;
        case ActionTemplate::genset_serve:
            a.genset_power = detail::take(deficit, h.genset_max);
            a.battery_discharge = detail::take(deficit, h.discharge);
            a.grid_import = detail::take(deficit, h.import_max);
            a.battery_charge = detail::take(surplus, h.charge);
            a.grid_export = detail::take(surplus, h.export_max);
            break;
        case ActionTemplate::grid_serve:
            a.grid_import = detail::take(deficit, h.import_max);
            a.battery_discharge = detail::take(deficit, h.discharge);
            a.genset_power = detail::take(deficit, h.genset_max);
            a.battery_charge = detail::take(surplus, h.charge);
            a.grid_export = detail::take(surplus, h.export_max);
            break;
        case ActionTemplate::charge_from_pv: {
            // Divert pv into the battery first, then serve whatever load the
            // leftover pv cannot cover without discharging.
            a = ControlAction{};
            double pv_left = pv;
            a.battery_charge = detail::take(pv_left, h.charge);
            a.pv_to_load = std::min(pv_left, load);
            pv_left -= a.pv_to_load;
            deficit = load - a.pv_to_load;
            a.grid_import = detail::take(deficit, h.import_max);
            a.genset_power = detail::take(deficit, h.genset_max);
            a.grid_export = detail::take(pv_left, h.export_max);
            surplus = pv_left;
            break;
        }
        case ActionTemplate::charge_from_grid: {
            // Buy for the load, store all pv. With the pv-side balance the
            // battery can only absorb pv; the grid covers the load instead.
            a = ControlAction{};
            double pv_left = pv;
            a.battery_charge = detail::take(pv_left, h.charge);
            deficit = load;
            a.grid_import = detail::take(deficit, h.import_max);
            a.pv_to_load = std::min(pv_left, deficit);
            pv_left -= a.pv_to_load;
            deficit -= a.pv_to_load;
            a.genset_power = detail::take(deficit, h.genset_max);
            surplus = pv_left;
            break;
        }
        case ActionTemplate::export_surplus:
            a.battery_discharge = detail::take(deficit, h.discharge);
            a.grid_import = detail::take(deficit, h.import_max);
            a.genset_power = detail::take(deficit, h.genset_max);
            a.grid_export = detail::take(surplus, h.export_max);
            break;
        case ActionTemplate::idle:
            a.grid_import = detail::take(deficit, h.import_max);
            a.genset_power = detail::take(deficit, h.genset_max);
            break;
        case ActionTemplate::shed_remainder:
            break;
    }

    a.load_shed = std::max(0.0, deficit);
    a.pv_curtailed = std::max(0.0, surplus);
    finalize_genset(a, obs);
    return a;
}

inline ControlAction expand_template(int index, const Observation& obs) {
    return expand_template(static_cast<ActionTemplate>(index), obs);
}

}  // namespace mgsim
