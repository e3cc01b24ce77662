#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mgsim/errors.hpp"
#include "mgsim/rng.hpp"

namespace mgsim {

/// One year of hourly data.
inline constexpr std::size_t kHoursPerYear = 8760;
inline constexpr std::size_t kHoursPerDay = 24;

enum class ProfileKind { load, pv };

inline const char* to_string(ProfileKind k) {
    return k == ProfileKind::load ? "load" : "pv";
}

/// Hourly power profile in kW. Profiles produced by this module always hold
/// exactly 8760 nonnegative samples at a fixed 1 h step; truncated copies for
/// short benchmark runs are made with truncated().
struct TimeSeries {
    std::vector<double> values;
    ProfileKind kind = ProfileKind::load;

    static constexpr double step_hours = 1.0;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }

    double max() const {
        return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    }
    double mean() const {
        if (values.empty()) return 0.0;
        return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }

    /// First `hours` samples, for truncated benchmark scenarios.
    TimeSeries truncated(std::size_t hours) const {
        TimeSeries out;
        out.kind = kind;
        out.values.assign(values.begin(), values.begin() + std::min(hours, values.size()));
        return out;
    }
};

/// Peak / mean / annual energy summary of a profile.
struct ProfileStats {
    double peak = 0.0;    // kW
    double mean = 0.0;    // kW
    double energy = 0.0;  // kWh over the series
};

inline ProfileStats profile_stats(const TimeSeries& ts) {
    ProfileStats s;
    s.peak = ts.max();
    s.mean = ts.mean();
    s.energy = s.mean * static_cast<double>(ts.size()) * TimeSeries::step_hours;
    return s;
}

namespace detail {

inline bool parse_double(std::string_view text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) --last;
    if (first == last) return false;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace detail

/// Reads a one-column CSV of 8760 hourly kW samples. A non-numeric first row
/// is treated as a header and skipped. Row indices in errors count data rows
/// from zero.
inline TimeSeries load_profile_csv(const std::string& path, ProfileKind kind) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile file: " + path);

    TimeSeries ts;
    ts.kind = kind;
    ts.values.reserve(kHoursPerYear);

    std::string line;
    bool first = true;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        double v = 0.0;
        if (!detail::parse_double(line, v)) {
            if (first) {  // header row
                first = false;
                continue;
            }
            throw ParseError("non-numeric sample '" + line + "'", row);
        }
        first = false;
        if (v < 0.0) throw ParseError("negative sample " + std::to_string(v), row);
        ts.values.push_back(v);
        ++row;
    }
    if (ts.values.size() != kHoursPerYear) {
        throw LengthError("profile '" + path + "' has " + std::to_string(ts.values.size()) +
                          " rows, expected " + std::to_string(kHoursPerYear));
    }
    return ts;
}

/// Writes a profile as one shortest-round-trip value per row. Reading the file
/// back reproduces the samples exactly.
inline void write_profile_csv(const TimeSeries& ts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write profile file: " + path);
    char buf[32];
    for (double v : ts.values) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        (void)ec;
        out.write(buf, ptr - buf);
        out.put('\n');
    }
    if (!out) throw IoError("write failed: " + path);
}

/// Shape parameters for synthetic profiles. The five built-in presets stand in
/// for load/PV data from five climate zones; none of the original third-party
/// datasets are bundled.
struct SynthParams {
    std::string name;

    // load shape
    double base = 0.35;
    double morning_hour = 8.0;
    double morning_amp = 0.5;
    double morning_sigma = 2.5;
    double evening_hour = 19.0;
    double evening_amp = 0.9;
    double evening_sigma = 3.0;
    double weekend_factor = 0.85;
    double load_seasonal_amp = 0.15;
    double load_seasonal_peak_day = 200.0;  // day of year with the seasonal maximum
    double load_noise_sigma = 0.06;

    // pv shape
    double sunrise = 6.0;  // first producing hour
    double sunset = 19.0;  // first dark evening hour
    double pv_seasonal_amp = 0.35;
    double pv_seasonal_peak_day = 172.0;
    double cloud_day_sigma = 0.25;
    double cloud_hour_sigma = 0.08;
};

/// The five bundled presets, "climate-1" .. "climate-5".
inline const std::array<SynthParams, 5>& climate_presets() {
    static const std::array<SynthParams, 5> presets = [] {
        std::array<SynthParams, 5> p{};
        // hot, sunny, strong afternoon AC load
        p[0] = SynthParams{"climate-1", 0.40, 9.0, 0.35, 2.5, 17.0, 1.0, 3.5, 0.90,
                           0.25, 200.0, 0.05, 6.0, 20.0, 0.20, 172.0, 0.15, 0.05};
        // cold north: winter-peaking load, short days, cloudy
        p[1] = SynthParams{"climate-2", 0.45, 8.0, 0.55, 2.0, 19.0, 0.85, 2.5, 0.80,
                           0.20, 15.0, 0.07, 8.0, 17.0, 0.45, 172.0, 0.40, 0.10};
        // temperate coastal
        p[2] = SynthParams{"climate-3", 0.35, 8.0, 0.45, 2.5, 19.0, 0.90, 3.0, 0.85,
                           0.10, 230.0, 0.06, 7.0, 19.0, 0.30, 172.0, 0.30, 0.08};
        // continental: two seasonal peaks approximated by a summer one
        p[3] = SynthParams{"climate-4", 0.38, 7.0, 0.60, 2.0, 18.0, 0.80, 3.0, 0.88,
                           0.18, 190.0, 0.08, 6.0, 19.0, 0.25, 180.0, 0.25, 0.08};
        // arid: high irradiance, mild seasonality
        p[4] = SynthParams{"climate-5", 0.30, 9.0, 0.30, 3.0, 20.0, 0.95, 3.5, 0.92,
                           0.12, 210.0, 0.05, 6.0, 20.0, 0.12, 172.0, 0.08, 0.04};
        return p;
    }();
    return presets;
}

inline const SynthParams& climate_preset(const std::string& name) {
    for (const auto& p : climate_presets()) {
        if (p.name == name) return p;
    }
    throw DomainError("unknown synthetic preset: " + name);
}

namespace detail {

inline double wrapped_gauss(double h, double mu, double sigma) {
    double d = std::fabs(h - mu);
    d = std::min(d, 24.0 - d);
    return std::exp(-0.5 * (d / sigma) * (d / sigma));
}

}  // namespace detail

/// Generates a year of synthetic hourly data with max sample equal to `peak`.
///
/// Load: double-hump diurnal shape, weekday/weekend modulation, a seasonal
/// cosine and multiplicative log-normal noise. PV: a sin^2 daytime bell that
/// is exactly zero outside [sunrise, sunset), seasonal amplitude, and per-day
/// plus per-hour cloud factors capped at clear sky. Deterministic per seed:
/// the stream is consumed in hour order, one normal per hour, plus one per
/// day for pv.
inline TimeSeries synth_profile(Rng& rng, ProfileKind kind, double peak,
                                const SynthParams& params = climate_presets()[0]) {
    if (!(peak > 0.0)) throw DomainError("synth_profile: peak must be > 0");

    TimeSeries ts;
    ts.kind = kind;
    ts.values.resize(kHoursPerYear);

    double day_cloud = 1.0;
    for (std::size_t t = 0; t < kHoursPerYear; ++t) {
        const double hour = static_cast<double>(t % kHoursPerDay);
        const std::size_t day = t / kHoursPerDay;
        if (kind == ProfileKind::load) {
            double shape = params.base +
                           params.morning_amp * detail::wrapped_gauss(hour, params.morning_hour, params.morning_sigma) +
                           params.evening_amp * detail::wrapped_gauss(hour, params.evening_hour, params.evening_sigma);
            const double season =
                1.0 + params.load_seasonal_amp *
                          std::cos(2.0 * M_PI * (static_cast<double>(day) - params.load_seasonal_peak_day) / 365.0);
            const double week = (day % 7 >= 5) ? params.weekend_factor : 1.0;
            const double noise = std::exp(params.load_noise_sigma * rng.normal());
            ts.values[t] = std::max(0.0, shape * season * week * noise);
        } else {
            if (t % kHoursPerDay == 0) {
                day_cloud = std::min(1.0, std::exp(params.cloud_day_sigma * rng.normal()));
            }
            if (hour < params.sunrise || hour >= params.sunset) {
                ts.values[t] = 0.0;
                continue;
            }
            const double x = (hour - params.sunrise) / (params.sunset - params.sunrise);
            const double bell = std::sin(M_PI * x) * std::sin(M_PI * x);
            const double season =
                std::max(0.0, 1.0 + params.pv_seasonal_amp *
                                        std::cos(2.0 * M_PI * (static_cast<double>(day) - params.pv_seasonal_peak_day) / 365.0));
            const double jitter = std::min(1.0, std::exp(params.cloud_hour_sigma * rng.normal()));
            ts.values[t] = std::max(0.0, bell * season * day_cloud * jitter);
        }
    }

    const double m = ts.max();
    if (m <= 0.0) throw DegenerateProfileError("synthetic profile is identically zero");
    const double s = peak / m;
    for (double& v : ts.values) v *= s;
    return ts;
}

/// Rescales a profile so its maximum equals `peak`, preserving shape.
inline TimeSeries scale_to_peak(const TimeSeries& ts, double peak) {
    if (!(peak > 0.0)) throw DomainError("scale_to_peak: peak must be > 0");
    const double m = ts.max();
    if (m <= 0.0) throw DegenerateProfileError("cannot scale an all-zero profile");
    TimeSeries out;
    out.kind = ts.kind;
    out.values.reserve(ts.size());
    const double s = peak / m;
    for (double v : ts.values) out.values.push_back(v * s);
    return out;
}

/// Resolves a profile reference: either a CSV path or "synth:<preset-name>".
/// Synthetic profiles need an rng and a peak; the rng is consumed only in the
/// synth case.
inline TimeSeries resolve_profile(const std::string& ref, ProfileKind kind, double peak, Rng& rng) {
    constexpr std::string_view prefix = "synth:";
    if (ref.rfind(prefix, 0) == 0) {
        return synth_profile(rng, kind, peak, climate_preset(ref.substr(prefix.size())));
    }
    TimeSeries ts = load_profile_csv(ref, kind);
    return scale_to_peak(ts, peak);
}

}  // namespace mgsim
