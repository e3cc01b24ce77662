#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mgsim/action_space.hpp"
#include "mgsim/lp.hpp"
#include "mgsim/microgrid.hpp"

namespace mgsim {

/// Forecast window for the MPC. "Perfect" forecasts are exact slices of the
/// microgrid's own series.
struct Forecast {
    std::vector<double> load;
    std::vector<double> pv;
    std::vector<double> import_price;
    std::vector<double> export_price;
    std::vector<bool> grid_up;

    std::size_t size() const { return load.size(); }
};

/// Perfect forecast of the next `horizon` steps, truncated to the phase end.
inline Forecast make_forecast(const Microgrid& mg, std::size_t horizon) {
    const std::size_t n = std::min(horizon, mg.steps_remaining());
    const std::size_t t0 = mg.step_index();
    Forecast f;
    f.load.reserve(n);
    f.pv.reserve(n);
    f.import_price.reserve(n);
    f.export_price.reserve(n);
    f.grid_up.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        f.load.push_back(mg.load_at(t0 + k));
        f.pv.push_back(mg.pv_at(t0 + k));
        f.import_price.push_back(mg.import_price_at(t0 + k));
        f.export_price.push_back(mg.export_price_at(t0 + k));
        f.grid_up.push_back(mg.grid_up_at(t0 + k));
    }
    return f;
}

namespace detail {

// Variable layout of the dispatch LP: per step t the seven commands
//   charge, discharge, import, export, genset, shed, curtail
// at indices 7t+0..7t+6, followed by H explicit SOC variables (soc after step
// t) whose box bounds carry the SOC window. The genset min-loading band is
// relaxed here and restored by rounding after extraction.
inline constexpr int kChg = 0;
inline constexpr int kDis = 1;
inline constexpr int kImp = 2;
inline constexpr int kExp = 3;
inline constexpr int kGen = 4;
inline constexpr int kShd = 5;
inline constexpr int kCur = 6;
inline constexpr int kPerStep = 7;

inline std::size_t soc_var(std::size_t horizon, std::size_t t) { return kPerStep * horizon + t; }

}  // namespace detail

/// Builds the dispatch LP over the first `horizon` steps of the forecast.
/// Constraints per step: the net power balance (the two balance equalities
/// with pv_to_load eliminated), the pv allocation cap, and the SOC recursion
/// soc_{t+1} = soc_t + eff*charge - discharge/eff.
inline LinearProgram mpc_build(const Observation& obs, const Forecast& forecast, double soc_kwh,
                               std::size_t horizon) {
    if (horizon < 1 || horizon > forecast.size()) {
        throw HorizonError("mpc horizon exceeds the forecast window");
    }
    if (forecast.pv.size() < horizon || forecast.import_price.size() < horizon ||
        forecast.export_price.size() < horizon || forecast.grid_up.size() < horizon) {
        throw HorizonError("ragged forecast");
    }
    const auto& cap = obs.capacities;
    const std::size_t H = horizon;
    const std::size_t nvars = detail::kPerStep * H + H;

    LinearProgram lp;
    lp.objective.assign(nvars, 0.0);
    lp.bounds.assign(nvars, VarBound{0.0, 0.0});
    lp.constraints.reserve(3 * H);

    const double eff = cap.battery_efficiency;
    for (std::size_t t = 0; t < H; ++t) {
        const std::size_t base = detail::kPerStep * t;
        const bool up = cap.has_grid && forecast.grid_up[t];
        lp.bounds[base + detail::kChg] = {0.0, cap.battery_charge_max};
        lp.bounds[base + detail::kDis] = {0.0, cap.battery_discharge_max};
        lp.bounds[base + detail::kImp] = {0.0, up ? cap.grid_import_max : 0.0};
        lp.bounds[base + detail::kExp] = {0.0, up ? cap.grid_export_max : 0.0};
        lp.bounds[base + detail::kGen] = {0.0, cap.has_genset ? cap.genset_rated : 0.0};
        lp.bounds[base + detail::kShd] = {0.0, kLpInf};
        lp.bounds[base + detail::kCur] = {0.0, kLpInf};
        lp.bounds[detail::soc_var(H, t)] = {cap.soc_min * cap.battery_capacity,
                                            cap.soc_max * cap.battery_capacity};

        lp.objective[base + detail::kImp] = forecast.import_price[t];
        lp.objective[base + detail::kExp] = -forecast.export_price[t];
        lp.objective[base + detail::kGen] = cap.genset_fuel_price;
        lp.objective[base + detail::kShd] = cap.loss_load_price;
        lp.objective[base + detail::kCur] = cap.pv_curtail_price;

        // discharge - charge + import - export + genset + shed - curtail
        //   = load - pv
        LinearConstraint balance;
        balance.coeffs.assign(nvars, 0.0);
        balance.coeffs[base + detail::kDis] = 1.0;
        balance.coeffs[base + detail::kChg] = -1.0;
        balance.coeffs[base + detail::kImp] = 1.0;
        balance.coeffs[base + detail::kExp] = -1.0;
        balance.coeffs[base + detail::kGen] = 1.0;
        balance.coeffs[base + detail::kShd] = 1.0;
        balance.coeffs[base + detail::kCur] = -1.0;
        balance.rel = Relation::eq;
        balance.rhs = forecast.load[t] - forecast.pv[t];
        lp.constraints.push_back(std::move(balance));

        // pv allocation: charge + export + curtail <= pv, which keeps the
        // implied pv_to_load nonnegative.
        LinearConstraint alloc;
        alloc.coeffs.assign(nvars, 0.0);
        alloc.coeffs[base + detail::kChg] = 1.0;
        alloc.coeffs[base + detail::kExp] = 1.0;
        alloc.coeffs[base + detail::kCur] = 1.0;
        alloc.rel = Relation::le;
        alloc.rhs = forecast.pv[t];
        lp.constraints.push_back(std::move(alloc));

        // soc recursion
        LinearConstraint soc;
        soc.coeffs.assign(nvars, 0.0);
        soc.coeffs[detail::soc_var(H, t)] = 1.0;
        soc.coeffs[base + detail::kChg] = -eff;
        soc.coeffs[base + detail::kDis] = 1.0 / eff;
        soc.rel = Relation::eq;
        if (t == 0) {
            soc.rhs = soc_kwh;
        } else {
            soc.coeffs[detail::soc_var(H, t - 1)] = -1.0;
            soc.rhs = 0.0;
        }
        lp.constraints.push_back(std::move(soc));
    }
    return lp;
}

namespace detail {

/// Turns the step-t slice of an LP solution into a balanced ControlAction.
/// Simultaneous charge/discharge (possible in the relaxation when ties make
/// it free) is replaced by its single-direction equivalent, pv_to_load is
/// reconstructed, and the genset band restored.
inline ControlAction extract_action(const std::vector<double>& x, std::size_t t,
                                    const Observation& obs, double load, double pv) {
    const std::size_t base = kPerStep * t;
    double c = std::max(0.0, x[base + kChg]);
    double d = std::max(0.0, x[base + kDis]);
    double im = std::max(0.0, x[base + kImp]);
    double ex = std::max(0.0, x[base + kExp]);
    double g = std::max(0.0, x[base + kGen]);

    const double eff = obs.capacities.battery_efficiency;
    if (c > 0.0 && d > 0.0) {
        const double w = eff * c - d / eff;  // net soc delta, preserved
        if (w >= 0.0) {
            c = w / eff;
            d = 0.0;
        } else {
            d = -w * eff;
            c = 0.0;
        }
    }

    ControlAction a;
    a.battery_charge = c;
    a.battery_discharge = d;
    a.grid_import = im;
    a.grid_export = ex;
    a.genset_power = g;
    const double served = d + im + g;
    a.pv_to_load = std::clamp(std::min(load - served, pv - c - ex), 0.0, std::min(load, pv));
    a.load_shed = std::max(0.0, load - served - a.pv_to_load);
    a.pv_curtailed = std::max(0.0, pv - c - ex - a.pv_to_load);

    finalize_genset(a, obs);

    const auto snap = [](double& v) {
        if (std::fabs(v) < 1e-9) v = 0.0;
    };
    snap(a.pv_to_load);
    snap(a.battery_charge);
    snap(a.battery_discharge);
    snap(a.grid_import);
    snap(a.grid_export);
    snap(a.genset_power);
    snap(a.load_shed);
    snap(a.pv_curtailed);
    return a;
}

}  // namespace detail

/// Full MPC plan: the optimal dispatch for every step the LP covered, plus
/// the optimum of the relaxed model (a lower bound on any feasible dispatch
/// cost over the same window).
struct MpcPlan {
    std::vector<ControlAction> actions;
    double lp_objective = 0.0;
};

inline MpcPlan mpc_plan(const Microgrid& mg, std::size_t horizon) {
    if (mg.done()) throw EpisodeOverError("mpc on a finished episode");
    const std::size_t H = std::min(horizon, mg.steps_remaining());
    const Observation obs = mg.observation();
    const Forecast fc = make_forecast(mg, H);
    const LinearProgram lp = mpc_build(obs, fc, mg.soc(), H);
    const LPSolution sol = solve(lp);
    if (sol.status != LpStatus::optimal) {
        // Shed and curtail are unbounded above, so the dispatch LP is always
        // feasible and bounded; anything else is a solver defect.
        throw Error(std::string("dispatch LP not optimal: ") + to_string(sol.status));
    }
    MpcPlan plan;
    plan.lp_objective = sol.objective_value;
    plan.actions.reserve(H);
    Observation step_obs = obs;
    for (std::size_t t = 0; t < H; ++t) {
        // Later steps only need the predicted soc for the genset rounding's
        // discharge headroom; everything else in obs is static.
        if (t > 0) {
            step_obs.soc_fraction = std::clamp(
                sol.x[detail::soc_var(H, t - 1)] / obs.capacities.battery_capacity,
                obs.capacities.soc_min, obs.capacities.soc_max);
            step_obs.import_price_now = fc.import_price[t];
            step_obs.export_price_now = fc.export_price[t];
            step_obs.grid_up = fc.grid_up[t];
        }
        plan.actions.push_back(
            detail::extract_action(sol.x, t, step_obs, fc.load[t], fc.pv[t]));
    }
    return plan;
}

/// Solves the rolling-horizon LP and returns the first-step action.
inline ControlAction mpc_decide(const Microgrid& mg, std::size_t horizon) {
    return mpc_plan(mg, horizon).actions.front();
}

}  // namespace mgsim
