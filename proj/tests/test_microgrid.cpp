#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mgsim/microgrid.hpp"
#include "mgsim/rng.hpp"
#include "test_util.hpp"

using namespace mgsim;
using testutil::ToyOptions;
using testutil::toy_config;

namespace {

/// Full-year genset-only config for the split arithmetic checks.
MicrogridConfig year_config() {
    ToyOptions o;
    o.hours = kHoursPerYear;
    return toy_config(o);
}

ControlAction balanced_action(const Microgrid& mg) {
    const Observation obs = mg.observation();
    ControlAction a;
    a.pv_to_load = std::min(obs.pv_now, obs.load_now);
    double deficit = obs.load_now - a.pv_to_load;
    if (obs.capacities.has_genset) {
        const double band =
            obs.capacities.genset_min_loading * obs.capacities.genset_rated;
        const double g = std::min(deficit, obs.capacities.genset_rated);
        if (g >= band) {
            a.genset_power = g;
            deficit -= g;
        }
    }
    a.load_shed = deficit;
    a.pv_curtailed = obs.pv_now - a.pv_to_load;
    return a;
}

}  // namespace

TEST_CASE("battery_step bookkeeping") {
    BatterySpec b{100.0, 30.0, 30.0, 0.9, 0.1, 1.0, 0.5};
    REQUIRE(battery_step(b, 50.0, 0.0, 0.0) == 50.0);
    REQUIRE_THAT(battery_step(b, 50.0, 10.0, 0.0), Catch::Matchers::WithinAbs(59.0, 1e-12));
    REQUIRE_THAT(battery_step(b, 50.0, 0.0, 9.0), Catch::Matchers::WithinAbs(40.0, 1e-12));
    REQUIRE_THROWS_AS(battery_step(b, 50.0, 5.0, 5.0), SimultaneousChargeError);
    REQUIRE_THROWS_AS(battery_step(b, 50.0, -1.0, 0.0), DomainError);
}

TEST_CASE("train/test split arithmetic") {
    Microgrid mg(year_config());

    auto [train_half, test_half] = mg.train_test_split(0.5);
    REQUIRE(train_half == 4380);
    REQUIRE(test_half == 4380);

    auto [train, test] = mg.train_test_split(0.67);
    REQUIRE(train == 5869);
    REQUIRE(test == 2891);

    REQUIRE_THROWS_AS(mg.train_test_split(1.0), DomainError);
    REQUIRE_THROWS_AS(mg.train_test_split(0.0), DomainError);

    const Observation obs = mg.reset(true);
    REQUIRE(mg.step_index() == 5869);
    REQUIRE(mg.phase() == Phase::test);
    REQUIRE(obs.hour_of_day == static_cast<int>(5869 % 24));
}

TEST_CASE("reset semantics") {
    Microgrid mg(toy_config());
    REQUIRE_THROWS_AS(mg.reset(true), SplitError);

    for (int i = 0; i < 100; ++i) mg.run(balanced_action(mg));
    REQUIRE(mg.step_index() == 100);
    REQUIRE(mg.cumulative_cost() > 0.0);

    mg.reset(false);
    REQUIRE(mg.step_index() == 0);
    REQUIRE(mg.cumulative_cost() == 0.0);
    REQUIRE_FALSE(mg.done());
    REQUIRE(mg.soc() == 0.5 * mg.config().battery.capacity);
}

TEST_CASE("check_action flags constraint violations") {
    ToyOptions o;
    o.grid = false;
    Microgrid mg(toy_config(o));
    const Observation obs = mg.observation();

    SECTION("balanced genset dispatch is clean") {
        const ControlAction a = balanced_action(mg);
        REQUIRE(mg.check_action(a).empty());
    }

    SECTION("unbalanced supply is a load balance violation") {
        ControlAction a = balanced_action(mg);
        a.load_shed += 10.0;
        const auto v = mg.check_action(a);
        REQUIRE(v.contains(Violation::PowerBalanceLoad));
    }

    SECTION("grid commands on a gridless system") {
        ControlAction a = balanced_action(mg);
        a.grid_import = 50.0;
        const auto v = mg.check_action(a);
        REQUIRE(v.contains(Violation::NonexistentAsset));
    }

    SECTION("genset commands on a genset-less system") {
        ToyOptions go;
        go.genset = false;
        go.grid = true;
        Microgrid no_genset(toy_config(go));
        ControlAction a;
        a.genset_power = 10.0;
        REQUIRE(no_genset.check_action(a).contains(Violation::NonexistentAsset));
    }

    SECTION("simultaneous charge and discharge") {
        ControlAction a = balanced_action(mg);
        a.battery_charge = 5.0;
        a.battery_discharge = 5.0;
        REQUIRE(mg.check_action(a).contains(Violation::SimultaneousChargeDischarge));
    }
}

TEST_CASE("grid outages block trade") {
    ToyOptions o;
    o.genset = true;
    o.grid = true;
    o.weak = true;
    o.hours = 2000;
    Microgrid mg(toy_config(o));

    // Find an outage hour.
    const auto& outage = mg.config().grid->outage;
    std::size_t down = outage.size();
    for (std::size_t t = 0; t < outage.size(); ++t) {
        if (outage[t]) {
            down = t;
            break;
        }
    }
    REQUIRE(down < outage.size());

    mg.reset(Phase::full);
    while (mg.step_index() < down) mg.run(balanced_action(mg));
    REQUIRE_FALSE(mg.observation().grid_up);

    ControlAction a = balanced_action(mg);
    a.grid_import = 50.0;
    a.load_shed = std::max(0.0, a.load_shed - 50.0);
    REQUIRE(mg.check_action(a).contains(Violation::GridDown));
}

TEST_CASE("step costs") {
    ToyOptions o;
    o.grid = true;
    o.import_price = 0.25;
    o.fuel_price = 0.5;
    Microgrid mg(toy_config(o));

    ControlAction genset_only;
    genset_only.genset_power = 50.0;
    REQUIRE_THAT(mg.step_cost(genset_only, 3).fuel, Catch::Matchers::WithinAbs(25.0, 1e-12));

    REQUIRE(mg.step_cost(ControlAction{}, 0).total() == 0.0);

    ControlAction import_only;
    import_only.grid_import = 100.0;
    REQUIRE_THAT(mg.step_cost(import_only, 12).total(), Catch::Matchers::WithinAbs(25.0, 1e-12));
}

TEST_CASE("episodes end exactly at the horizon") {
    ToyOptions o;
    o.hours = 72;
    Microgrid mg(toy_config(o));

    StepRecord last;
    for (int i = 0; i < 72; ++i) last = mg.run(balanced_action(mg));
    REQUIRE(last.done);
    REQUIRE(mg.done());
    REQUIRE(mg.step_index() == 72);
    REQUIRE_THROWS_AS(mg.run(ControlAction{}), EpisodeOverError);

    // Terminal observation repeats the last step's exogenous values.
    const Observation term = mg.observation();
    REQUIRE(term.load_now == mg.config().load[71]);
    REQUIRE(term.hour_of_day == 71 % 24);
}

TEST_CASE("infeasible actions are projected and reported") {
    ToyOptions o;
    o.genset = false;
    o.grid = true;
    Microgrid mg(toy_config(o));

    // Leave the balance short by 10 kW with no free asset.
    Observation obs = mg.observation();
    while (obs.load_now <= 20.0) {
        mg.run(balanced_action(mg));
        obs = mg.observation();
    }
    ControlAction a;
    a.pv_to_load = std::min(obs.pv_now, obs.load_now);
    a.grid_import = std::min(obs.load_now - a.pv_to_load, obs.capacities.grid_import_max);
    a.pv_curtailed = obs.pv_now - a.pv_to_load;
    const double removed = std::min(10.0, a.grid_import);
    a.grid_import -= removed;

    const StepRecord rec = mg.run(a);
    REQUIRE(rec.violations.contains(Violation::PowerBalanceLoad));
    REQUIRE_THAT(rec.applied.load_shed, Catch::Matchers::WithinAbs(removed, 1e-9));
    testutil::check_balances(rec.applied, obs.load_now, obs.pv_now, 1e-6);
}

TEST_CASE("fuzzed actions always land on a feasible applied action") {
    for (bool grid : {false, true}) {
        ToyOptions o;
        o.hours = 500;
        o.grid = grid;
        o.weak = grid;
        Microgrid mg(toy_config(o));
        Rng rng(99);

        mg.set_history(false);
        double cost_sum = 0.0;
        while (!mg.done()) {
            const Observation obs = mg.observation();
            const ControlAction raw =
                testutil::random_action(rng, mg.limits(), obs.load_now, obs.pv_now);
            // The projection must land inside the feasible set.
            const ControlAction projected = mg.repair_action(raw);
            REQUIRE(mg.check_action(projected).empty());
            const StepRecord rec = mg.run(raw);
            testutil::check_balances(rec.applied, obs.load_now, obs.pv_now, 1e-6);
            cost_sum += rec.cost.total();

            const double cap = mg.config().battery.capacity;
            REQUIRE(mg.soc() >= mg.config().battery.soc_min * cap - 1e-9);
            REQUIRE(mg.soc() <= mg.config().battery.soc_max * cap + 1e-9);
            REQUIRE(rec.cost.total() ==
                    rec.cost.fuel + rec.cost.import_cost - rec.cost.export_credit +
                        rec.cost.loss_load + rec.cost.curtail);
        }
        REQUIRE_THAT(mg.cumulative_cost(), Catch::Matchers::WithinRel(cost_sum, 1e-6));
    }
}

TEST_CASE("identical action replays give identical records") {
    ToyOptions o;
    o.hours = 300;
    o.grid = true;
    Microgrid mg(toy_config(o));
    Rng rng(5);

    std::vector<ControlAction> actions;
    while (!mg.done()) {
        const Observation obs = mg.observation();
        actions.push_back(testutil::random_action(rng, mg.limits(), obs.load_now, obs.pv_now));
        mg.run(actions.back());
    }
    const double first_cost = mg.cumulative_cost();

    mg.reset(false);
    std::vector<double> costs;
    for (const auto& a : actions) costs.push_back(mg.run(a).cost.total());
    REQUIRE(mg.cumulative_cost() == first_cost);

    mg.reset(false);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        REQUIRE(mg.run(actions[i]).cost.total() == costs[i]);
    }
}

TEST_CASE("config validation") {
    MicrogridConfig cfg = toy_config();
    cfg.battery.soc_min = 0.9;
    cfg.battery.soc_max = 0.2;
    REQUIRE_THROWS_AS(Microgrid(cfg), DomainError);

    MicrogridConfig weak_no_genset = toy_config();
    GridSpec g;
    g.power_import_max = 100.0;
    g.power_export_max = 100.0;
    g.tariff = testutil::flat_tariff(0.2, 0.1);
    g.weak = true;
    g.outage.assign(weak_no_genset.load.size(), false);
    weak_no_genset.grid = g;
    weak_no_genset.genset.reset();
    REQUIRE_THROWS_AS(Microgrid(weak_no_genset), DomainError);

    MicrogridConfig arbitrage = toy_config();
    GridSpec g2;
    g2.power_import_max = 100.0;
    g2.power_export_max = 100.0;
    g2.tariff = testutil::flat_tariff(0.2, 0.3);  // export above import
    arbitrage.grid = g2;
    REQUIRE_THROWS_AS(Microgrid(arbitrage), DomainError);
}

TEST_CASE("observation snapshots") {
    ToyOptions o;
    o.hours = 100;
    Microgrid mg(toy_config(o));
    REQUIRE(mg.observation().soc_fraction == 0.5);

    for (int i = 0; i < 37; ++i) mg.run(balanced_action(mg));
    REQUIRE(mg.observation().hour_of_day == 13);
}
