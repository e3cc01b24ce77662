#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgsim/errors.hpp"
#include "mgsim/microgrid.hpp"
#include "mgsim/rng.hpp"
#include "mgsim/time_series.hpp"

namespace mgsim {

enum class GridKind { none, strong, weak };

inline const char* to_string(GridKind k) {
    switch (k) {
        case GridKind::none: return "none";
        case GridKind::strong: return "strong";
        case GridKind::weak: return "weak";
    }
    return "?";
}

/// Discrete architecture choice. Off-grid and weak-grid systems must carry a
/// genset so the load stays servable through the night and outages.
struct Architecture {
    bool has_genset = true;
    GridKind grid_kind = GridKind::none;

    bool valid() const {
        if (grid_kind == GridKind::none && !has_genset) return false;
        if (grid_kind == GridKind::weak && !has_genset) return false;
        return true;
    }
};

/// The four valid architectures, in sampling order.
inline const std::array<Architecture, 4>& valid_architectures() {
    static const std::array<Architecture, 4> archs = {{
        {true, GridKind::none},
        {true, GridKind::strong},
        {false, GridKind::strong},
        {true, GridKind::weak},
    }};
    return archs;
}

enum class TariffRegion { california, france };

/// Time-of-use tariffs patterned on commercial rates. California: on-peak
/// hours 16-21 at 0.30 $/kWh, 0.12 off-peak. France: a flatter two-band
/// schedule, 0.20 $/kWh from 07:00 to 22:00 and 0.15 overnight. Export pays
/// half the import price. The rng parameter is reserved for future price
/// jitter; the bands themselves are fixed defaults.
inline Tariff make_tariff(TariffRegion region, Rng& rng) {
    (void)rng;
    Tariff t;
    for (int h = 0; h < 24; ++h) {
        double p;
        if (region == TariffRegion::california) {
            p = (h >= 16 && h <= 21) ? 0.30 : 0.12;
        } else {
            p = (h >= 7 && h < 22) ? 0.20 : 0.15;
        }
        t.import_price[h] = p;
        t.export_price[h] = 0.5 * p;
    }
    return t;
}

/// Battery sized for three to five hours of mean load, with a C/4 power
/// rating and the stock efficiency/SOC defaults.
inline BatterySpec size_battery(double mean_load, Rng& rng) {
    if (!(mean_load > 0.0)) throw DomainError("size_battery: mean load must be > 0");
    BatterySpec b;
    const double hours = rng.uniform(3.0, 5.0);
    b.capacity = hours * mean_load;
    b.power_charge_max = b.capacity / 4.0;
    b.power_discharge_max = b.capacity / 4.0;
    b.efficiency = 0.9;
    b.soc_min = 0.1;
    b.soc_max = 1.0;
    b.soc_init = 0.5;
    return b;
}

/// Outage schedule for a weak grid: starts arrive as a Bernoulli process
/// calibrated to the weekly rate, each outage lasting a geometric number of
/// hours with the given mean.
inline std::vector<bool> make_outage_schedule(Rng& rng, double mean_outages_per_week,
                                              double mean_duration_hours,
                                              std::size_t hours = kHoursPerYear) {
    if (!(mean_outages_per_week > 0.0) || !(mean_duration_hours > 0.0)) {
        throw DomainError("outage parameters must be > 0");
    }
    const double p_start = mean_outages_per_week / (7.0 * 24.0);
    std::vector<bool> schedule(hours, false);
    std::size_t outage_until = 0;
    for (std::size_t t = 0; t < hours; ++t) {
        if (t < outage_until) {
            schedule[t] = true;
            continue;
        }
        if (rng.bernoulli(p_start)) {
            const auto dur = rng.geometric(std::max(1.0, mean_duration_hours));
            outage_until = t + static_cast<std::size_t>(dur);
            schedule[t] = true;
        }
    }
    return schedule;
}

/// Knobs of the random generation procedure. The numeric ranges are artifact
/// defaults: the load peak brackets small-commercial to small-utility scale
/// and the pv penetration range exercises both pv-deficit and pv-surplus
/// regimes.
struct GenOptions {
    double load_peak_min = 100.0;     // kW, log-uniform draw
    double load_peak_max = 10000.0;
    double pv_penetration_min = 0.3;  // pv peak as a multiple of load peak
    double pv_penetration_max = 2.0;
    double genset_fuel_price = 0.4;   // $/kWh
    // Benchmark gensets run band-free so the dispatch physics stay exactly
    // linear and the full-horizon LP bound is attainable; set a positive
    // fraction to exercise the min-loading rounding paths.
    double genset_min_loading = 0.0;
    double grid_oversize = 1.1;       // grid limits as a multiple of load peak
    double outages_per_week = 2.0;
    double outage_mean_hours = 4.0;
    double loss_load_price = 10.0;
    double pv_curtail_price = 0.0;
    // Profile references, "synth:<preset>" or CSV paths.
    std::array<std::string, 5> load_profiles = {"synth:climate-1", "synth:climate-2",
                                                "synth:climate-3", "synth:climate-4",
                                                "synth:climate-5"};
    std::array<std::string, 5> pv_profiles = {"synth:climate-1", "synth:climate-2",
                                              "synth:climate-3", "synth:climate-4",
                                              "synth:climate-5"};
};

/// Draws one microgrid: load peak (log-uniform), load profile, architecture
/// (unless forced), pv penetration and profile, battery, then genset, grid,
/// tariff and outages as the architecture requires. The rng consumption order
/// is fixed; identical seeds give identical configs.
inline MicrogridConfig generate_microgrid(Rng& rng, std::optional<Architecture> forced = {},
                                          const GenOptions& opt = {}) {
    MicrogridConfig cfg;

    const double load_peak = rng.log_uniform(opt.load_peak_min, opt.load_peak_max);
    const auto load_choice = rng.uniform_int(opt.load_profiles.size());
    cfg.load = resolve_profile(opt.load_profiles[load_choice], ProfileKind::load, load_peak, rng);

    Architecture arch;
    if (forced) {
        if (!forced->valid()) throw DomainError("forced architecture violates the backup rule");
        arch = *forced;
    } else {
        arch = valid_architectures()[rng.uniform_int(valid_architectures().size())];
    }

    const double penetration = rng.uniform(opt.pv_penetration_min, opt.pv_penetration_max);
    const auto pv_choice = rng.uniform_int(opt.pv_profiles.size());
    cfg.pv = resolve_profile(opt.pv_profiles[pv_choice], ProfileKind::pv,
                             penetration * load_peak, rng);

    cfg.battery = size_battery(cfg.load.mean(), rng);

    if (arch.has_genset) {
        GensetSpec gs;
        gs.rated_power = std::ceil(load_peak);
        gs.fuel_price = opt.genset_fuel_price;
        gs.min_loading = opt.genset_min_loading;
        cfg.genset = gs;
    }
    if (arch.grid_kind != GridKind::none) {
        GridSpec grid;
        grid.power_import_max = opt.grid_oversize * load_peak;
        grid.power_export_max = opt.grid_oversize * load_peak;
        const auto region =
            rng.uniform_int(2) == 0 ? TariffRegion::california : TariffRegion::france;
        grid.tariff = make_tariff(region, rng);
        grid.weak = arch.grid_kind == GridKind::weak;
        if (grid.weak) {
            grid.outage = make_outage_schedule(rng, opt.outages_per_week, opt.outage_mean_hours,
                                               cfg.load.size());
        }
        cfg.grid = grid;
    }
    cfg.loss_load_price = opt.loss_load_price;
    cfg.pv_curtail_price = opt.pv_curtail_price;

    validate(cfg);
    return cfg;
}

enum class Preset { pymgrid10, pymgrid25, random };

inline const char* to_string(Preset p) {
    switch (p) {
        case Preset::pymgrid10: return "pymgrid10";
        case Preset::pymgrid25: return "pymgrid25";
        case Preset::random: return "random";
    }
    return "?";
}

inline Preset parse_preset(const std::string& s) {
    if (s == "pymgrid10") return Preset::pymgrid10;
    if (s == "pymgrid25") return Preset::pymgrid25;
    if (s == "random") return Preset::random;
    throw ConfigError("unknown preset: " + s);
}

struct ScenarioSet {
    std::uint64_t seed = 0;
    Preset preset = Preset::random;
    std::vector<MicrogridConfig> microgrids;
};

/// Architecture plan of a preset: the forced per-microgrid architectures in
/// their final (seed-shuffled) order, consuming the head of the generation
/// stream. Empty for the random preset, whose architectures are drawn during
/// generation.
inline std::vector<Architecture> preset_architectures(Preset preset, std::size_t count,
                                                      Rng& rng) {
    std::vector<Architecture> archs;
    switch (preset) {
        case Preset::pymgrid10:
            if (count != 10) throw DomainError("pymgrid10 has exactly 10 microgrids");
            archs.assign(10, Architecture{true, GridKind::none});
            break;
        case Preset::pymgrid25:
            if (count != 25) throw DomainError("pymgrid25 has exactly 25 microgrids");
            archs.reserve(25);
            for (int i = 0; i < 4; ++i) archs.push_back({true, GridKind::none});
            for (int i = 0; i < 3; ++i) archs.push_back({true, GridKind::strong});
            for (int i = 0; i < 9; ++i) archs.push_back({false, GridKind::strong});
            for (int i = 0; i < 9; ++i) archs.push_back({true, GridKind::weak});
            rng.shuffle(archs);
            break;
        case Preset::random:
            if (count == 0) throw DomainError("random preset needs a positive count");
            break;
    }
    return archs;
}

/// Builds a reproducible fleet. pymgrid10 is ten PV+battery+genset systems;
/// pymgrid25 holds the fixed architecture mix (4 genset-only, 3 genset+grid,
/// 9 grid-only, 9 genset+weak-grid) in a seed-shuffled order.
inline ScenarioSet build_scenario_set(Preset preset, std::size_t count, std::uint64_t seed,
                                      const GenOptions& opt = {}) {
    ScenarioSet set;
    set.seed = seed;
    set.preset = preset;
    Rng rng(seed);

    const std::vector<Architecture> archs = preset_architectures(preset, count, rng);
    set.microgrids.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::optional<Architecture> forced;
        if (!archs.empty()) forced = archs[i];
        set.microgrids.push_back(generate_microgrid(rng, forced, opt));
    }
    return set;
}

/// Count of distinct discrete generator combinations under the validity
/// rules. Per (load profile, pv profile) pair the grid axis contributes:
/// no grid (genset forced, tariff moot) = 1; strong grid = 2 genset choices x
/// n_tariffs; weak grid (genset forced) = n_tariffs. Hence
///   n_load * n_pv * (1 + 3 * n_tariffs)
/// = 175 with the stock 5 profiles each and 2 tariffs, before counting the
/// continuous pv penetration and sizing draws.
inline std::size_t architecture_space_size(std::size_t n_load_profiles = 5,
                                           std::size_t n_pv_profiles = 5,
                                           std::size_t n_tariffs = 2) {
    return n_load_profiles * n_pv_profiles * (1 + 3 * n_tariffs);
}

}  // namespace mgsim
