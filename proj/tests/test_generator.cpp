#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "mgsim/generator.hpp"
#include "mgsim/serialization.hpp"

using namespace mgsim;

TEST_CASE("tariff bands") {
    Rng rng(1);
    const Tariff ca = make_tariff(TariffRegion::california, rng);
    REQUIRE(ca.import_price[18] > ca.import_price[3]);
    for (int h = 0; h < 24; ++h) {
        REQUIRE(ca.export_price[h] <= ca.import_price[h]);
        REQUIRE(ca.import_price[h] >= 0.0);
    }

    const Tariff fr = make_tariff(TariffRegion::france, rng);
    std::set<double> fr_prices(fr.import_price.begin(), fr.import_price.end());
    REQUIRE(fr_prices.size() == 2);
    for (int h = 0; h < 24; ++h) REQUIRE(fr.export_price[h] <= fr.import_price[h]);
}

TEST_CASE("battery sizing covers three to five hours of mean load") {
    Rng rng(42);
    const double mean_load = 1000.0;
    for (int i = 0; i < 10000; ++i) {
        const BatterySpec b = size_battery(mean_load, rng);
        REQUIRE(b.capacity >= 3.0 * mean_load);
        REQUIRE(b.capacity <= 5.0 * mean_load);
        REQUIRE_THAT(b.power_charge_max, Catch::Matchers::WithinRel(b.capacity / 4.0, 1e-12));
        REQUIRE_THAT(b.power_discharge_max, Catch::Matchers::WithinRel(b.capacity / 4.0, 1e-12));
    }
    REQUIRE_THROWS_AS(size_battery(0.0, rng), DomainError);
}

TEST_CASE("outage schedules") {
    Rng rng(7);
    const auto schedule = make_outage_schedule(rng, 2.0, 4.0);
    std::size_t down_hours = 0;
    for (bool o : schedule) down_hours += o ? 1 : 0;
    // Expectation is about 2 outages/week * 52 weeks * 4 h = 416 hours.
    REQUIRE(down_hours > 416 * 0.7);
    REQUIRE(down_hours < 416 * 1.3);

    Rng tiny(7);
    const auto none = make_outage_schedule(tiny, 1e-9, 4.0);
    for (bool o : none) REQUIRE_FALSE(o);

    Rng a(13), b(13);
    REQUIRE(make_outage_schedule(a, 2.0, 4.0) == make_outage_schedule(b, 2.0, 4.0));

    Rng c(1);
    REQUIRE_THROWS_AS(make_outage_schedule(c, 0.0, 4.0), DomainError);
    REQUIRE_THROWS_AS(make_outage_schedule(c, 2.0, -1.0), DomainError);
}

TEST_CASE("generated microgrids honor the sizing rules") {
    Rng rng(100);
    for (int i = 0; i < 12; ++i) {
        const MicrogridConfig cfg = generate_microgrid(rng);
        const double load_peak = cfg.load.max();
        REQUIRE(load_peak >= 100.0);
        REQUIRE(load_peak <= 10000.0);
        const double pen = cfg.pv.max() / load_peak;
        REQUIRE(pen >= 0.3 - 1e-9);
        REQUIRE(pen <= 2.0 + 1e-9);
        const double duration = cfg.battery.capacity / cfg.load.mean();
        REQUIRE(duration >= 3.0 - 1e-9);
        REQUIRE(duration <= 5.0 + 1e-9);
        if (cfg.genset) REQUIRE(cfg.genset->rated_power >= load_peak);
        if (cfg.grid) {
            REQUIRE(cfg.grid->power_import_max > load_peak);
            REQUIRE(cfg.grid->power_export_max > load_peak);
        }
        REQUIRE_NOTHROW(validate(cfg));
    }
}

TEST_CASE("forced architectures are respected") {
    Rng rng(5);
    const MicrogridConfig cfg =
        generate_microgrid(rng, Architecture{true, GridKind::none});
    REQUIRE_FALSE(cfg.grid.has_value());
    REQUIRE(cfg.genset.has_value());
    REQUIRE(cfg.genset->rated_power >= cfg.load.max());

    Rng rng2(5);
    REQUIRE_THROWS_AS(generate_microgrid(rng2, Architecture{false, GridKind::none}),
                      DomainError);
    Rng rng3(5);
    REQUIRE_THROWS_AS(generate_microgrid(rng3, Architecture{false, GridKind::weak}),
                      DomainError);
}

TEST_CASE("csv profiles feed generation through the profile references") {
    Rng prof_rng(55);
    const TimeSeries base = synth_profile(prof_rng, ProfileKind::load, 500.0);
    const std::string path = "gen_profile_override.csv";
    write_profile_csv(base, path);

    GenOptions opt;
    opt.load_profiles.fill(path);
    Rng rng(9);
    const MicrogridConfig cfg = generate_microgrid(rng, Architecture{true, GridKind::none}, opt);
    std::remove(path.c_str());

    // The CSV shape is preserved; only the scale changes.
    const double ratio = cfg.load.max() / base.max();
    for (std::size_t t = 0; t < base.size(); ++t) {
        REQUIRE_THAT(cfg.load.values[t],
                     Catch::Matchers::WithinRel(base.values[t] * ratio, 1e-9));
    }
}

TEST_CASE("generation is a pure function of the seed") {
    Rng a(333), b(333);
    const json ja = json(generate_microgrid(a));
    const json jb = json(generate_microgrid(b));
    REQUIRE(ja.dump() == jb.dump());
}

TEST_CASE("pymgrid25 reproduces the architecture mix for any seed") {
    for (std::uint64_t seed : {0ULL, 1ULL, 7ULL, 99ULL}) {
        const ScenarioSet set = build_scenario_set(Preset::pymgrid25, 25, seed);
        REQUIRE(set.microgrids.size() == 25);
        std::map<std::string, int> histogram;
        for (const auto& cfg : set.microgrids) {
            if (!cfg.grid) {
                ++histogram["genset_only"];
            } else if (cfg.grid->weak) {
                ++histogram["weak"];
            } else if (cfg.genset) {
                ++histogram["grid_genset"];
            } else {
                ++histogram["grid_only"];
            }
        }
        REQUIRE(histogram["genset_only"] == 4);
        REQUIRE(histogram["grid_genset"] == 3);
        REQUIRE(histogram["grid_only"] == 9);
        REQUIRE(histogram["weak"] == 9);
    }
}

TEST_CASE("pymgrid10 is ten identical architectures") {
    const ScenarioSet set = build_scenario_set(Preset::pymgrid10, 10, 3);
    REQUIRE(set.microgrids.size() == 10);
    for (const auto& cfg : set.microgrids) {
        REQUIRE(cfg.genset.has_value());
        REQUIRE_FALSE(cfg.grid.has_value());
    }
}

TEST_CASE("preset counts are enforced") {
    REQUIRE_THROWS_AS(build_scenario_set(Preset::pymgrid10, 25, 0), DomainError);
    REQUIRE_THROWS_AS(build_scenario_set(Preset::pymgrid25, 10, 0), DomainError);
    REQUIRE_THROWS_AS(build_scenario_set(Preset::random, 0, 0), DomainError);
}

TEST_CASE("scenario sets regenerate bit-identically") {
    const ScenarioSet a = build_scenario_set(Preset::pymgrid25, 25, 11);
    const ScenarioSet b = build_scenario_set(Preset::pymgrid25, 25, 11);
    REQUIRE(json(a).dump() == json(b).dump());
}

TEST_CASE("architecture space enumeration") {
    REQUIRE(architecture_space_size() == 175);
    // Dropping the tariff dimension halves only the grid-connected combos:
    // per profile pair 1 + 3*1 = 4 instead of 7.
    REQUIRE(architecture_space_size(5, 5, 1) == 100);
    REQUIRE(architecture_space_size(0, 5, 2) == 0);
}
