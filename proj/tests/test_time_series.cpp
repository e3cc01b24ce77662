#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "mgsim/time_series.hpp"

using namespace mgsim;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& name) : path(name) {}
    ~TempCsv() { std::remove(path.c_str()); }

    void write_rows(std::size_t n, const std::string& value, const std::string& header = "") {
        std::ofstream out(path);
        if (!header.empty()) out << header << '\n';
        for (std::size_t i = 0; i < n; ++i) out << value << '\n';
    }
};

}  // namespace

TEST_CASE("csv ingestion accepts a header and exact row counts") {
    TempCsv f("ts_zeros.csv");
    f.write_rows(kHoursPerYear, "0.0", "kw");
    const TimeSeries ts = load_profile_csv(f.path, ProfileKind::load);
    REQUIRE(ts.size() == kHoursPerYear);
    for (double v : ts.values) REQUIRE(v == 0.0);
}

TEST_CASE("csv ingestion rejects wrong row counts") {
    TempCsv f("ts_short.csv");
    f.write_rows(kHoursPerYear - 1, "1.0");
    REQUIRE_THROWS_AS(load_profile_csv(f.path, ProfileKind::load), LengthError);
}

TEST_CASE("csv ingestion reports the offending row") {
    TempCsv f("ts_negative.csv");
    {
        std::ofstream out(f.path);
        for (std::size_t i = 0; i < kHoursPerYear; ++i) {
            out << (i == 42 ? "-5.0" : "1.0") << '\n';
        }
    }
    try {
        load_profile_csv(f.path, ProfileKind::load);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.row == 42);
    }

    TempCsv g("ts_garbage.csv");
    {
        std::ofstream out(g.path);
        for (std::size_t i = 0; i < kHoursPerYear; ++i) {
            out << (i == 7 ? "oops" : "1.0") << '\n';
        }
    }
    try {
        load_profile_csv(g.path, ProfileKind::load);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.row == 7);
    }

    REQUIRE_THROWS_AS(load_profile_csv("does_not_exist.csv", ProfileKind::load), IoError);
}

TEST_CASE("csv round-trips exactly") {
    Rng rng(3);
    const TimeSeries ts = synth_profile(rng, ProfileKind::load, 123.456);
    TempCsv f("ts_roundtrip.csv");
    write_profile_csv(ts, f.path);
    const TimeSeries back = load_profile_csv(f.path, ProfileKind::load);
    REQUIRE(back.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        REQUIRE(back.values[i] == ts.values[i]);
    }
}

TEST_CASE("synthetic pv is dark at night") {
    Rng rng(7);
    const TimeSeries pv = synth_profile(rng, ProfileKind::pv, 100.0);
    REQUIRE(pv.values[0] == 0.0);

    // No preset produces power outside its daylight window, whatever the seed.
    for (const auto& preset : climate_presets()) {
        for (std::uint64_t seed : {1ULL, 99ULL, 12345ULL}) {
            Rng r(seed);
            const TimeSeries s = synth_profile(r, ProfileKind::pv, 50.0, preset);
            for (std::size_t t = 0; t < s.size(); ++t) {
                const double hour = static_cast<double>(t % kHoursPerDay);
                if (hour < preset.sunrise || hour >= preset.sunset) {
                    REQUIRE(s.values[t] == 0.0);
                }
            }
        }
    }
}

TEST_CASE("synthetic profiles hit the requested peak and are reproducible") {
    Rng a(7);
    const TimeSeries load1 = synth_profile(a, ProfileKind::load, 100.0);
    REQUIRE_THAT(load1.max(), Catch::Matchers::WithinAbs(100.0, 1e-9));

    Rng b(7);
    const TimeSeries load2 = synth_profile(b, ProfileKind::load, 100.0);
    REQUIRE(load1.values == load2.values);

    for (double v : load1.values) REQUIRE(v >= 0.0);

    Rng c(7);
    REQUIRE_THROWS_AS(synth_profile(c, ProfileKind::load, 0.0), DomainError);
}

TEST_CASE("scale_to_peak scales linearly and preserves shape") {
    TimeSeries ts;
    ts.kind = ProfileKind::load;
    ts.values = {10.0, 20.0, 40.0};

    const TimeSeries doubled = scale_to_peak(ts, 80.0);
    REQUIRE(doubled.values == std::vector<double>{20.0, 40.0, 80.0});

    const TimeSeries same = scale_to_peak(ts, 40.0);
    REQUIRE(same.values == ts.values);

    const TimeSeries down = scale_to_peak(ts, 10.0);
    REQUIRE_THAT(down.values[0], Catch::Matchers::WithinAbs(2.5, 1e-12));
    REQUIRE_THAT(down.values[1], Catch::Matchers::WithinAbs(5.0, 1e-12));
    REQUIRE_THAT(down.values[2], Catch::Matchers::WithinAbs(10.0, 1e-12));

    TimeSeries zeros;
    zeros.values.assign(8, 0.0);
    REQUIRE_THROWS_AS(scale_to_peak(zeros, 10.0), DegenerateProfileError);
    REQUIRE_THROWS_AS(scale_to_peak(ts, -1.0), DomainError);
}

TEST_CASE("rescaling composes") {
    Rng rng(11);
    const TimeSeries ts = synth_profile(rng, ProfileKind::load, 55.0);
    const TimeSeries ab = scale_to_peak(scale_to_peak(ts, 300.0), 17.0);
    const TimeSeries direct = scale_to_peak(ts, 17.0);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        REQUIRE_THAT(ab.values[i], Catch::Matchers::WithinAbs(direct.values[i], 1e-9));
    }
}

TEST_CASE("profile stats") {
    Rng rng(5);
    const TimeSeries ts = synth_profile(rng, ProfileKind::load, 250.0);
    const ProfileStats s = profile_stats(ts);
    REQUIRE(s.peak >= s.mean);
    REQUIRE(s.mean >= 0.0);
    REQUIRE_THAT(s.energy, Catch::Matchers::WithinRel(s.mean * 8760.0, 1e-6));
}

TEST_CASE("synth presets resolve by name") {
    Rng rng(2);
    const TimeSeries ts = resolve_profile("synth:climate-3", ProfileKind::pv, 42.0, rng);
    REQUIRE_THAT(ts.max(), Catch::Matchers::WithinAbs(42.0, 1e-9));
    Rng rng2(2);
    REQUIRE_THROWS_AS(resolve_profile("synth:mars", ProfileKind::pv, 42.0, rng2), DomainError);
}
