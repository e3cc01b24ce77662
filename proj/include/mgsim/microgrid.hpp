#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mgsim/errors.hpp"
#include "mgsim/time_series.hpp"

namespace mgsim {

// ---------------------------------------------------------------------------
// Component specs
// ---------------------------------------------------------------------------

struct BatterySpec {
    double capacity = 0.0;            // kWh
    double power_charge_max = 0.0;    // kW
    double power_discharge_max = 0.0; // kW
    double efficiency = 0.9;          // one-way factor, applied on both paths
    double soc_min = 0.1;             // fraction of capacity
    double soc_max = 1.0;
    double soc_init = 0.5;
};

struct GensetSpec {
    double rated_power = 0.0;  // kW
    double fuel_price = 0.4;   // $/kWh
    double min_loading = 0.05; // fraction of rated power; output is 0 or >= this
};

/// Hour-of-day import/export prices in $/kWh.
struct Tariff {
    std::array<double, 24> import_price{};
    std::array<double, 24> export_price{};
};

struct GridSpec {
    double power_import_max = 0.0;  // kW
    double power_export_max = 0.0;  // kW
    Tariff tariff;
    bool weak = false;
    std::vector<bool> outage;  // per hour, true = grid unavailable; empty means none
};

/// Full description of one microgrid. PV and battery are always present;
/// genset and grid are the architecture choice.
struct MicrogridConfig {
    TimeSeries load;
    TimeSeries pv;
    BatterySpec battery;
    std::optional<GensetSpec> genset;
    std::optional<GridSpec> grid;
    double loss_load_price = 10.0;  // $/kWh of unserved load
    double pv_curtail_price = 0.0;  // $/kWh of discarded pv
};

/// Per-step power commands, all in kW and all nonnegative.
struct ControlAction {
    double pv_to_load = 0.0;
    double battery_charge = 0.0;
    double battery_discharge = 0.0;
    double grid_import = 0.0;
    double grid_export = 0.0;
    double genset_power = 0.0;
    double load_shed = 0.0;
    double pv_curtailed = 0.0;
};

// ---------------------------------------------------------------------------
// Step outputs
// ---------------------------------------------------------------------------

enum class Violation : unsigned char {
    PowerBalanceLoad,
    PowerBalancePv,
    NegativeCommand,
    SimultaneousChargeDischarge,
    BatteryChargeLimit,
    BatteryDischargeLimit,
    SocLow,
    SocHigh,
    GridImportLimit,
    GridExportLimit,
    GridDown,
    GensetRange,
    NonexistentAsset,
};

inline const char* to_string(Violation v) {
    switch (v) {
        case Violation::PowerBalanceLoad: return "PowerBalanceLoad";
        case Violation::PowerBalancePv: return "PowerBalancePv";
        case Violation::NegativeCommand: return "NegativeCommand";
        case Violation::SimultaneousChargeDischarge: return "SimultaneousChargeDischarge";
        case Violation::BatteryChargeLimit: return "BatteryChargeLimit";
        case Violation::BatteryDischargeLimit: return "BatteryDischargeLimit";
        case Violation::SocLow: return "SocLow";
        case Violation::SocHigh: return "SocHigh";
        case Violation::GridImportLimit: return "GridImportLimit";
        case Violation::GridExportLimit: return "GridExportLimit";
        case Violation::GridDown: return "GridDown";
        case Violation::GensetRange: return "GensetRange";
        case Violation::NonexistentAsset: return "NonexistentAsset";
    }
    return "?";
}

/// Set of violation tags. Fixed capacity so the stepping hot path never
/// touches the heap.
class ViolationSet {
public:
    void add(Violation v) {
        for (std::size_t i = 0; i < count_; ++i) {
            if (tags_[i] == v) return;
        }
        tags_[count_++] = v;
    }
    bool contains(Violation v) const {
        for (std::size_t i = 0; i < count_; ++i) {
            if (tags_[i] == v) return true;
        }
        return false;
    }
    bool empty() const { return count_ == 0; }
    std::size_t size() const { return count_; }
    const Violation* begin() const { return tags_.data(); }
    const Violation* end() const { return tags_.data() + count_; }

private:
    std::array<Violation, 13> tags_{};
    std::size_t count_ = 0;
};

struct CostBreakdown {
    double fuel = 0.0;
    double import_cost = 0.0;
    double export_credit = 0.0;
    double loss_load = 0.0;
    double curtail = 0.0;

    double total() const { return fuel + import_cost - export_credit + loss_load + curtail; }
};

/// Static limits exposed to controllers alongside each observation.
struct AssetLimits {
    double battery_capacity = 0.0;
    double battery_charge_max = 0.0;
    double battery_discharge_max = 0.0;
    double battery_efficiency = 1.0;
    double soc_min = 0.0;  // fractions
    double soc_max = 1.0;
    bool has_grid = false;
    double grid_import_max = 0.0;
    double grid_export_max = 0.0;
    bool has_genset = false;
    double genset_rated = 0.0;
    double genset_min_loading = 0.0;
    double genset_fuel_price = 0.0;
    double loss_load_price = 0.0;
    double pv_curtail_price = 0.0;
    double load_peak = 0.0;
    double pv_peak = 0.0;
};

struct Observation {
    double load_now = 0.0;  // kW
    double pv_now = 0.0;    // kW
    double soc_fraction = 0.0;
    int hour_of_day = 0;
    bool grid_up = false;
    double import_price_now = 0.0;  // $/kWh
    double export_price_now = 0.0;
    AssetLimits capacities;
};

struct StepRecord {
    Observation observation;  // for the new step index (terminal repeats the last step)
    CostBreakdown cost;
    ViolationSet violations;  // of the submitted action, before any repair
    ControlAction applied;    // the action actually executed
    bool done = false;
};

enum class Phase { train, test, full };

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::train: return "train";
        case Phase::test: return "test";
        case Phase::full: return "full";
    }
    return "?";
}

/// Snapshot of the mutable episode state.
struct MicrogridState {
    std::size_t step_index = 0;
    double soc = 0.0;  // kWh
    bool done = false;
    std::optional<std::size_t> split_boundary;
    Phase phase = Phase::full;
    double cumulative_cost = 0.0;
};

// ---------------------------------------------------------------------------
// Battery physics
// ---------------------------------------------------------------------------

/// SOC bookkeeping: soc' = soc + eff*charge*dt - discharge/eff*dt. The caller
/// is responsible for keeping the result inside the SOC window.
inline double battery_step(const BatterySpec& spec, double soc, double charge, double discharge,
                           double dt = 1.0) {
    if (charge < 0.0 || discharge < 0.0) throw DomainError("battery_step: negative power");
    if (charge > 0.0 && discharge > 0.0) {
        throw SimultaneousChargeError("battery cannot charge and discharge in one step");
    }
    return soc + spec.efficiency * charge * dt - discharge / spec.efficiency * dt;
}

// ---------------------------------------------------------------------------
// Config validation
// ---------------------------------------------------------------------------

inline void validate(const MicrogridConfig& cfg) {
    const auto& b = cfg.battery;
    if (!(b.capacity > 0.0)) throw DomainError("battery capacity must be > 0");
    if (!(b.power_charge_max > 0.0) || !(b.power_discharge_max > 0.0)) {
        throw DomainError("battery power limits must be > 0");
    }
    if (!(b.efficiency > 0.0) || b.efficiency > 1.0) throw DomainError("battery efficiency must be in (0,1]");
    if (!(0.0 <= b.soc_min && b.soc_min < b.soc_max && b.soc_max <= 1.0)) {
        throw DomainError("require 0 <= soc_min < soc_max <= 1");
    }
    if (b.soc_init < b.soc_min || b.soc_init > b.soc_max) {
        throw DomainError("soc_init outside [soc_min, soc_max]");
    }
    if (cfg.genset) {
        if (!(cfg.genset->rated_power > 0.0)) throw DomainError("genset rated power must be > 0");
        if (cfg.genset->fuel_price < 0.0) throw DomainError("fuel price must be >= 0");
        if (cfg.genset->min_loading < 0.0 || cfg.genset->min_loading >= 1.0) {
            throw DomainError("genset min_loading must be in [0,1)");
        }
    }
    if (cfg.grid) {
        const auto& g = *cfg.grid;
        if (!(g.power_import_max > 0.0) || !(g.power_export_max > 0.0)) {
            throw DomainError("grid power limits must be > 0");
        }
        for (int h = 0; h < 24; ++h) {
            if (g.tariff.import_price[h] < 0.0 || g.tariff.export_price[h] < 0.0) {
                throw DomainError("tariff prices must be >= 0");
            }
            if (g.tariff.export_price[h] > g.tariff.import_price[h]) {
                throw DomainError("export price above import price at hour " + std::to_string(h));
            }
        }
        if (g.weak && !cfg.genset) throw DomainError("weak grid requires a backup genset");
        if (!g.weak) {
            for (bool o : g.outage) {
                if (o) throw DomainError("outage schedule on a non-weak grid");
            }
        }
        if (!g.outage.empty() && g.outage.size() != cfg.load.size()) {
            throw DomainError("outage schedule length differs from the load series");
        }
    }
    if (cfg.load.size() == 0 || cfg.load.size() != cfg.pv.size()) {
        throw DomainError("load and pv series must be nonempty and the same length");
    }
    for (double v : cfg.load.values) {
        if (v < 0.0) throw DomainError("negative load sample");
    }
    for (double v : cfg.pv.values) {
        if (v < 0.0) throw DomainError("negative pv sample");
    }
    if (cfg.loss_load_price < 0.0 || cfg.pv_curtail_price < 0.0) {
        throw DomainError("penalty prices must be >= 0");
    }
}

/// Copy of a config with all series cut to the first `hours` samples, for
/// short benchmark runs.
inline MicrogridConfig truncate_config(const MicrogridConfig& cfg, std::size_t hours) {
    MicrogridConfig out = cfg;
    out.load = cfg.load.truncated(hours);
    out.pv = cfg.pv.truncated(hours);
    if (out.grid && !out.grid->outage.empty()) {
        out.grid->outage.resize(std::min<std::size_t>(hours, out.grid->outage.size()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// The microgrid state machine
// ---------------------------------------------------------------------------

class Microgrid {
public:
    // Balance equations are enforced to this tolerance in kW.
    static constexpr double kBalanceTol = 1e-6;
    // Tolerance for individual limit checks.
    static constexpr double kLimitTol = 1e-7;

    explicit Microgrid(MicrogridConfig cfg) : cfg_(std::move(cfg)) {
        validate(cfg_);
        horizon_ = cfg_.load.size();
        limits_.battery_capacity = cfg_.battery.capacity;
        limits_.battery_charge_max = cfg_.battery.power_charge_max;
        limits_.battery_discharge_max = cfg_.battery.power_discharge_max;
        limits_.battery_efficiency = cfg_.battery.efficiency;
        limits_.soc_min = cfg_.battery.soc_min;
        limits_.soc_max = cfg_.battery.soc_max;
        limits_.has_grid = cfg_.grid.has_value();
        if (cfg_.grid) {
            limits_.grid_import_max = cfg_.grid->power_import_max;
            limits_.grid_export_max = cfg_.grid->power_export_max;
        }
        limits_.has_genset = cfg_.genset.has_value();
        if (cfg_.genset) {
            limits_.genset_rated = cfg_.genset->rated_power;
            limits_.genset_min_loading = cfg_.genset->min_loading;
            limits_.genset_fuel_price = cfg_.genset->fuel_price;
        }
        limits_.loss_load_price = cfg_.loss_load_price;
        limits_.pv_curtail_price = cfg_.pv_curtail_price;
        limits_.load_peak = cfg_.load.max();
        limits_.pv_peak = cfg_.pv.max();
        reset(Phase::full);
    }

    const MicrogridConfig& config() const { return cfg_; }
    const AssetLimits& limits() const { return limits_; }
    std::size_t horizon() const { return horizon_; }

    std::size_t step_index() const { return step_; }
    double soc() const { return soc_; }
    bool done() const { return done_; }
    double cumulative_cost() const { return cumulative_cost_; }
    Phase phase() const { return phase_; }
    bool has_split() const { return split_boundary_.has_value(); }
    std::size_t split_boundary() const { return split_boundary_.value(); }

    MicrogridState state() const {
        return {step_, soc_, done_, split_boundary_, phase_, cumulative_cost_};
    }

    std::size_t phase_begin() const { return phase_ == Phase::test ? *split_boundary_ : 0; }
    std::size_t phase_end() const {
        return phase_ == Phase::train ? *split_boundary_ : horizon_;
    }
    /// Steps left before the episode ends.
    std::size_t steps_remaining() const { return done_ ? 0 : phase_end() - step_; }

    // Exogenous data, used by controllers building forecasts.
    double load_at(std::size_t t) const { return cfg_.load[t]; }
    double pv_at(std::size_t t) const { return cfg_.pv[t]; }
    bool grid_up_at(std::size_t t) const {
        if (!cfg_.grid) return false;
        if (cfg_.grid->outage.empty()) return true;
        return !cfg_.grid->outage[t];
    }
    double import_price_at(std::size_t t) const {
        return cfg_.grid ? cfg_.grid->tariff.import_price[t % kHoursPerDay] : 0.0;
    }
    double export_price_at(std::size_t t) const {
        return cfg_.grid ? cfg_.grid->tariff.export_price[t % kHoursPerDay] : 0.0;
    }

    /// Splits the data into [0, boundary) for training and [boundary, end) for
    /// testing. Returns the two phase lengths.
    std::pair<std::size_t, std::size_t> train_test_split(double train_fraction) {
        if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
            throw DomainError("train fraction must lie in (0,1)");
        }
        if (step_ != phase_begin() && !done_) {
            throw DomainError("cannot split mid-episode");
        }
        const auto boundary =
            static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(horizon_)));
        if (boundary == 0 || boundary >= horizon_) {
            throw DomainError("split leaves an empty phase");
        }
        split_boundary_ = boundary;
        return {boundary, horizon_ - boundary};
    }

    /// Restarts the episode. testing=true selects the test phase and requires
    /// a preceding train_test_split; otherwise the train phase when a split
    /// exists, the full horizon when not.
    Observation reset(bool testing = false) {
        if (testing) {
            if (!split_boundary_) throw SplitError("reset(testing=true) before train_test_split");
            return reset(Phase::test);
        }
        return reset(split_boundary_ ? Phase::train : Phase::full);
    }

    Observation reset(Phase phase) {
        if (phase != Phase::full && !split_boundary_) {
            throw SplitError("phase requires train_test_split");
        }
        phase_ = phase;
        step_ = phase_begin();
        soc_ = cfg_.battery.soc_init * cfg_.battery.capacity;
        cumulative_cost_ = 0.0;
        done_ = false;
        history_.clear();
        return observation();
    }

    /// Checks every constraint against the current step. Violations are data,
    /// not errors; an empty set means the action can be applied as-is.
    ViolationSet check_action(const ControlAction& a) const {
        ViolationSet v;
        const std::size_t t = exo_index();
        const double load = cfg_.load[t];
        const double pv = cfg_.pv[t];

        const double fields[8] = {a.pv_to_load,  a.battery_charge, a.battery_discharge,
                                  a.grid_import, a.grid_export,    a.genset_power,
                                  a.load_shed,   a.pv_curtailed};
        for (double f : fields) {
            if (f < -kLimitTol) {
                v.add(Violation::NegativeCommand);
                break;
            }
        }

        const auto& b = cfg_.battery;
        if (a.battery_charge > kLimitTol && a.battery_discharge > kLimitTol) {
            v.add(Violation::SimultaneousChargeDischarge);
        }
        if (a.battery_charge > b.power_charge_max + tol(b.power_charge_max)) {
            v.add(Violation::BatteryChargeLimit);
        }
        if (a.battery_discharge > b.power_discharge_max + tol(b.power_discharge_max)) {
            v.add(Violation::BatteryDischargeLimit);
        }
        const double room_up = (b.soc_max * b.capacity - soc_) / b.efficiency;
        const double room_down = (soc_ - b.soc_min * b.capacity) * b.efficiency;
        if (a.battery_charge > room_up + tol(b.capacity)) v.add(Violation::SocHigh);
        if (a.battery_discharge > room_down + tol(b.capacity)) v.add(Violation::SocLow);

        if (!cfg_.grid) {
            if (a.grid_import > kLimitTol || a.grid_export > kLimitTol) {
                v.add(Violation::NonexistentAsset);
            }
        } else {
            const auto& g = *cfg_.grid;
            if (a.grid_import > g.power_import_max + tol(g.power_import_max)) {
                v.add(Violation::GridImportLimit);
            }
            if (a.grid_export > g.power_export_max + tol(g.power_export_max)) {
                v.add(Violation::GridExportLimit);
            }
            if (!grid_up_at(t) && (a.grid_import > kLimitTol || a.grid_export > kLimitTol)) {
                v.add(Violation::GridDown);
            }
        }

        if (!cfg_.genset) {
            if (a.genset_power > kLimitTol) v.add(Violation::NonexistentAsset);
        } else {
            const auto& gs = *cfg_.genset;
            const double band = gs.min_loading * gs.rated_power;
            if (a.genset_power > gs.rated_power + tol(gs.rated_power) ||
                (a.genset_power > kLimitTol && a.genset_power < band - tol(band))) {
                v.add(Violation::GensetRange);
            }
        }

        const double supply = a.pv_to_load + a.battery_discharge + a.grid_import +
                              a.genset_power + a.load_shed;
        if (std::fabs(supply - load) > kBalanceTol) v.add(Violation::PowerBalanceLoad);
        const double pv_use = a.pv_to_load + a.battery_charge + a.grid_export + a.pv_curtailed;
        if (std::fabs(pv_use - pv) > kBalanceTol) v.add(Violation::PowerBalancePv);
        return v;
    }

    /// Projects an arbitrary action onto the feasible set: clamp each asset to
    /// its limits in priority order (battery, grid, genset), then close the
    /// residual load gap with shedding and the residual pv surplus with
    /// curtailment. Total by construction, so run() never rejects an action.
    ControlAction repair_action(const ControlAction& a) const {
        const std::size_t t = exo_index();
        const double load = cfg_.load[t];
        const double pv = cfg_.pv[t];
        const bool up = grid_up_at(t);
        const auto& b = cfg_.battery;

        ControlAction r;
        r.pv_to_load = std::clamp(a.pv_to_load, 0.0, std::min(pv, load));

        double c = std::max(0.0, a.battery_charge);
        double d = std::max(0.0, a.battery_discharge);
        if (c > 0.0 && d > 0.0) {  // net out the smaller side
            const double net = c - d;
            c = std::max(0.0, net);
            d = std::max(0.0, -net);
        }
        const double room_up = (b.soc_max * b.capacity - soc_) / b.efficiency;
        const double room_down = (soc_ - b.soc_min * b.capacity) * b.efficiency;
        c = std::min({c, b.power_charge_max, std::max(0.0, room_up), pv - r.pv_to_load});
        double residual = load - r.pv_to_load;
        d = std::min({d, b.power_discharge_max, std::max(0.0, room_down), residual});
        r.battery_charge = c;
        r.battery_discharge = d;
        residual -= d;

        if (cfg_.grid && up) {
            r.grid_import = std::min({std::max(0.0, a.grid_import), cfg_.grid->power_import_max, residual});
            residual -= r.grid_import;
            const double pv_free = pv - r.pv_to_load - c;
            r.grid_export = std::min({std::max(0.0, a.grid_export), cfg_.grid->power_export_max, pv_free});
        }

        if (cfg_.genset) {
            const auto& gs = *cfg_.genset;
            double g = std::min({std::max(0.0, a.genset_power), gs.rated_power, residual});
            if (g < gs.min_loading * gs.rated_power) g = 0.0;
            r.genset_power = g;
            residual -= g;
        }

        r.load_shed = std::max(0.0, residual);
        r.pv_curtailed = std::max(0.0, pv - r.pv_to_load - c - r.grid_export);
        return r;
    }

    /// Cost components of an already-feasible action at the given hour of day.
    CostBreakdown step_cost(const ControlAction& a, std::size_t hour_of_day) const {
        constexpr double dt = TimeSeries::step_hours;
        CostBreakdown c;
        if (cfg_.genset) c.fuel = a.genset_power * dt * cfg_.genset->fuel_price;
        if (cfg_.grid) {
            c.import_cost = a.grid_import * dt * cfg_.grid->tariff.import_price[hour_of_day % 24];
            c.export_credit = a.grid_export * dt * cfg_.grid->tariff.export_price[hour_of_day % 24];
        }
        c.loss_load = a.load_shed * dt * cfg_.loss_load_price;
        c.curtail = a.pv_curtailed * dt * cfg_.pv_curtail_price;
        return c;
    }

    /// Advances one time step. Infeasible commands are replaced by their
    /// projection and the original violations reported in the record.
    StepRecord run(const ControlAction& action) {
        if (done_) throw EpisodeOverError("run() called on a finished episode");

        StepRecord rec;
        rec.violations = check_action(action);
        rec.applied = rec.violations.empty() ? action : repair_action(action);
        rec.cost = step_cost(rec.applied, exo_index() % kHoursPerDay);

        soc_ = battery_step(cfg_.battery, soc_, rec.applied.battery_charge,
                            rec.applied.battery_discharge);
        // Keep rounding dust out of the SOC window.
        soc_ = std::clamp(soc_, cfg_.battery.soc_min * cfg_.battery.capacity,
                          cfg_.battery.soc_max * cfg_.battery.capacity);
        cumulative_cost_ += rec.cost.total();

        ++step_;
        done_ = step_ == phase_end();
        rec.done = done_;
        rec.observation = observation();
        if (track_history_) history_.push_back(rec);
        return rec;
    }

    /// Snapshot of the current step. After done it repeats the last step's
    /// exogenous values, pinned so RL wrappers always see a full observation.
    Observation observation() const {
        const std::size_t t = exo_index();
        Observation o;
        o.load_now = cfg_.load[t];
        o.pv_now = cfg_.pv[t];
        o.soc_fraction = soc_ / cfg_.battery.capacity;
        o.hour_of_day = static_cast<int>(t % kHoursPerDay);
        o.grid_up = grid_up_at(t);
        o.import_price_now = import_price_at(t);
        o.export_price_now = export_price_at(t);
        o.capacities = limits_;
        return o;
    }

    void set_history(bool enabled) { track_history_ = enabled; }
    const std::vector<StepRecord>& history() const { return history_; }

private:
    static double tol(double scale) { return kLimitTol * (1.0 + std::fabs(scale)); }

    std::size_t exo_index() const { return done_ ? phase_end() - 1 : step_; }

    MicrogridConfig cfg_;
    AssetLimits limits_;
    std::size_t horizon_ = 0;

    Phase phase_ = Phase::full;
    std::optional<std::size_t> split_boundary_;
    std::size_t step_ = 0;
    double soc_ = 0.0;
    double cumulative_cost_ = 0.0;
    bool done_ = false;
    bool track_history_ = false;
    std::vector<StepRecord> history_;
};

}  // namespace mgsim
