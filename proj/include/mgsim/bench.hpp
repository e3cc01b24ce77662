#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mgsim/controller.hpp"
#include "mgsim/generator.hpp"
#include "mgsim/serialization.hpp"

namespace mgsim {

/// Seed of the bundled default scenario set. The qualitative controller
/// ordering reported by the benchmark (MPC <= QDT <= RBC <= Q on mean cost)
/// is asserted for this seed only; other seeds can reorder the learned
/// controllers relative to the rule-based baseline.
inline constexpr std::uint64_t kDefaultSeed = 1111;

// ---------------------------------------------------------------------------
// Architecture groups (the row blocks of the result table)
// ---------------------------------------------------------------------------

enum class ArchGroup : int { genset_only = 0, grid_only = 1, grid_genset = 2, weak_grid = 3 };

inline constexpr int kNumArchGroups = 4;

inline ArchGroup classify(const MicrogridConfig& cfg) {
    if (!cfg.grid) return ArchGroup::genset_only;
    if (cfg.grid->weak) return ArchGroup::weak_grid;
    return cfg.genset ? ArchGroup::grid_genset : ArchGroup::grid_only;
}

inline const char* group_key(ArchGroup g) {
    switch (g) {
        case ArchGroup::genset_only: return "genset_only";
        case ArchGroup::grid_only: return "grid_only";
        case ArchGroup::grid_genset: return "grid_genset";
        case ArchGroup::weak_grid: return "weak_grid";
    }
    return "?";
}

inline const char* group_label(ArchGroup g) {
    switch (g) {
        case ArchGroup::genset_only: return "Genset only";
        case ArchGroup::grid_only: return "Grid only";
        case ArchGroup::grid_genset: return "Grid + Genset";
        case ArchGroup::weak_grid: return "Weak grid";
    }
    return "?";
}

/// Column headers of the rendered cost table.
inline std::string controller_label(const std::string& name) {
    if (name == "rbc") return "Rule-based";
    if (name == "mpc") return "MPC";
    if (name == "mpc-full") return "MPC (full)";
    if (name == "q") return "Q-learning";
    if (name == "qdt") return "Q-learning + DT";
    return name;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct GroupStat {
    std::size_t count = 0;
    double total = 0.0;  // $

    double mean() const { return count == 0 ? 0.0 : total / static_cast<double>(count); }
};

struct MicrogridResult {
    std::size_t index = 0;
    ArchGroup group = ArchGroup::genset_only;
    double cost = 0.0;  // $
};

struct EvalReport {
    std::string controller;
    std::uint64_t seed = 0;
    std::vector<MicrogridResult> per_microgrid;  // ordered by index
    std::array<GroupStat, kNumArchGroups> groups{};
    GroupStat all;
};

inline EvalReport aggregate_report(const std::string& controller, std::uint64_t seed,
                                   std::vector<MicrogridResult> results) {
    std::sort(results.begin(), results.end(),
              [](const MicrogridResult& a, const MicrogridResult& b) { return a.index < b.index; });
    EvalReport r;
    r.controller = controller;
    r.seed = seed;
    r.per_microgrid = std::move(results);
    for (const auto& m : r.per_microgrid) {
        auto& g = r.groups[static_cast<int>(m.group)];
        ++g.count;
        g.total += m.cost;
        ++r.all.count;
        r.all.total += m.cost;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Benchmark configuration
// ---------------------------------------------------------------------------

struct BenchmarkConfig {
    // Scenario source: a file, or generation parameters.
    std::string scenario_in;  // empty = generate from preset/seed
    Preset preset = Preset::pymgrid25;
    std::size_t count = 25;
    std::uint64_t seed = kDefaultSeed;
    GenOptions gen;

    std::vector<std::string> controllers = {"rbc", "mpc", "q", "qdt"};
    std::size_t mpc_horizon = 24;
    QLearnParams rl;
    int net_bins = 10;
    int soc_bins = 10;
    int dt_max_depth = 16;
    int dt_min_leaf = 1;
    double train_fraction = 0.67;
    std::size_t truncate_hours = 0;  // 0 = full series
    unsigned threads = 0;            // 0 = hardware concurrency

    // Trained-policy reuse: write tables/trees here after training, or load
    // them instead of training.
    std::string policy_out;
    std::string policy_in;

    // LP debugging: dump the MPC program built at this step of microgrid 0.
    long dump_lp_step = -1;
    std::string dump_lp_path = "lp_dump.txt";
};

inline bool known_controller(const std::string& name) {
    return name == "rbc" || name == "mpc" || name == "mpc-full" || name == "q" || name == "qdt";
}

inline void validate(const BenchmarkConfig& cfg) {
    if (cfg.controllers.empty()) throw ConfigError("no controllers selected");
    for (const auto& c : cfg.controllers) {
        if (!known_controller(c)) throw ConfigError("unknown controller name: " + c);
    }
    if (!(cfg.train_fraction > 0.0) || !(cfg.train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie in (0,1)");
    }
    if (cfg.mpc_horizon < 1) throw ConfigError("mpc horizon must be >= 1");
    if (cfg.net_bins < 1 || cfg.soc_bins < 1) throw ConfigError("bin counts must be >= 1");
}

// ---------------------------------------------------------------------------
// The sweep
// ---------------------------------------------------------------------------

namespace detail {

struct SweepOutput {
    std::vector<std::vector<double>> costs;  // [controller][microgrid]
    std::vector<ArchGroup> groups;
};

inline std::unique_ptr<Controller> make_static_controller(const std::string& name,
                                                          const BenchmarkConfig& cfg) {
    if (name == "rbc") return std::make_unique<RuleBasedController>();
    if (name == "mpc") return std::make_unique<MpcController>(cfg.mpc_horizon);
    if (name == "mpc-full") return std::make_unique<MpcController>(0, true);
    return nullptr;  // q/qdt need training state
}

inline std::string policy_path(const std::string& dir, const char* kind, std::size_t i) {
    return dir + "/" + kind + "_" + std::to_string(i) + ".json";
}

template <typename T>
T load_policy(const std::string& dir, const char* kind, std::size_t i) {
    const std::string path = policy_path(dir, kind, i);
    std::ifstream in(path);
    if (!in) throw IoError("cannot read policy file: " + path);
    json j;
    try {
        in >> j;
        return j.get<T>();
    } catch (const json::exception& e) {
        throw IoError("malformed policy file " + path + ": " + e.what());
    }
}

template <typename T>
void save_policy(const T& policy, const std::string& dir, const char* kind, std::size_t i) {
    const std::string path = policy_path(dir, kind, i);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write policy file: " + path);
    out << json(policy).dump() << '\n';
}

inline void run_one_microgrid(const BenchmarkConfig& cfg, const ScenarioSet& set, std::size_t i,
                              SweepOutput& out) {
    const MicrogridConfig& base = set.microgrids[i];
    Microgrid mg(cfg.truncate_hours > 0 ? truncate_config(base, cfg.truncate_hours) : base);
    mg.train_test_split(cfg.train_fraction);

    const bool needs_q = std::any_of(cfg.controllers.begin(), cfg.controllers.end(),
                                     [](const std::string& c) { return c == "q" || c == "qdt"; });
    const bool needs_dt = std::any_of(cfg.controllers.begin(), cfg.controllers.end(),
                                      [](const std::string& c) { return c == "qdt"; });
    std::optional<QTable> table;
    std::optional<DTModel> tree;
    if (needs_q) {
        if (!cfg.policy_in.empty()) {
            table = load_policy<QTable>(cfg.policy_in, "qtable", i);
            if (needs_dt) tree = load_policy<DTModel>(cfg.policy_in, "dtmodel", i);
        } else {
            const Discretizer disc =
                Discretizer::for_limits(mg.limits(), cfg.net_bins, cfg.soc_bins);
            table = qlearn_train(mg, cfg.rl, disc, derive_seed(set.seed, i));
            if (needs_dt) tree = dt_distill(mg, *table, cfg.dt_max_depth, cfg.dt_min_leaf);
        }
        if (!cfg.policy_out.empty()) {
            save_policy(*table, cfg.policy_out, "qtable", i);
            if (tree) save_policy(*tree, cfg.policy_out, "dtmodel", i);
        }
    }

    for (std::size_t c = 0; c < cfg.controllers.size(); ++c) {
        const std::string& name = cfg.controllers[c];
        std::unique_ptr<Controller> ctrl = make_static_controller(name, cfg);
        if (!ctrl) {
            if (name == "q") {
                ctrl = std::make_unique<QController>(*table);
            } else {
                ctrl = std::make_unique<QdtController>(*tree);
            }
        }
        out.costs[c][i] = evaluate_controller(*ctrl, mg, Phase::test);
    }
}

inline SweepOutput run_sweep(const BenchmarkConfig& cfg, const ScenarioSet& set) {
    const std::size_t n = set.microgrids.size();
    SweepOutput out;
    out.costs.assign(cfg.controllers.size(), std::vector<double>(n, 0.0));
    out.groups.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.groups[i] = classify(set.microgrids[i]);

    unsigned threads = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));

    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) run_one_microgrid(cfg, set, i, out);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    run_one_microgrid(cfg, set, i, out);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

/// Rolls microgrid 0 to the requested test-phase step with the MPC itself and
/// dumps the LP it would solve there.
inline void dump_requested_lp(const BenchmarkConfig& cfg, const ScenarioSet& set) {
    if (set.microgrids.empty()) throw ConfigError("scenario set is empty");
    Microgrid mg(cfg.truncate_hours > 0 ? truncate_config(set.microgrids[0], cfg.truncate_hours)
                                        : set.microgrids[0]);
    mg.train_test_split(cfg.train_fraction);
    mg.reset(Phase::test);
    const std::size_t target = mg.phase_begin() + static_cast<std::size_t>(cfg.dump_lp_step);
    if (target >= mg.phase_end()) throw ConfigError("--dump-lp step outside the test phase");
    while (mg.step_index() < target) {
        mg.run(mpc_decide(mg, cfg.mpc_horizon));
    }
    const std::size_t h = std::min(cfg.mpc_horizon, mg.steps_remaining());
    const LinearProgram lp = mpc_build(mg.observation(), make_forecast(mg, h), mg.soc(), h);
    std::ofstream out(cfg.dump_lp_path);
    if (!out) throw IoError("cannot write " + cfg.dump_lp_path);
    out << dump_lp(lp);
}

}  // namespace detail

/// Builds (or loads) the scenario set, trains the RL controllers per
/// microgrid on the train phase, evaluates everything on the test phase and
/// aggregates per architecture group. Deterministic for a given config,
/// regardless of thread count.
inline std::vector<EvalReport> run_benchmark(const BenchmarkConfig& cfg) {
    validate(cfg);
    const ScenarioSet set = cfg.scenario_in.empty()
                                ? build_scenario_set(cfg.preset, cfg.count, cfg.seed, cfg.gen)
                                : load_scenario_set(cfg.scenario_in);
    if (cfg.dump_lp_step >= 0) detail::dump_requested_lp(cfg, set);

    const detail::SweepOutput out = detail::run_sweep(cfg, set);
    std::vector<EvalReport> reports;
    reports.reserve(cfg.controllers.size());
    for (std::size_t c = 0; c < cfg.controllers.size(); ++c) {
        std::vector<MicrogridResult> results;
        results.reserve(set.microgrids.size());
        for (std::size_t i = 0; i < set.microgrids.size(); ++i) {
            results.push_back({i, out.groups[i], out.costs[c][i]});
        }
        reports.push_back(aggregate_report(cfg.controllers[c], set.seed, std::move(results)));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

/// k$ with thousands separators, e.g. 291086312.4 $ -> "291,086".
inline std::string format_kusd(double usd) {
    long long k = std::llround(usd / 1000.0);
    const bool neg = k < 0;
    unsigned long long mag = neg ? static_cast<unsigned long long>(-k) : static_cast<unsigned long long>(k);
    std::string digits = std::to_string(mag);
    std::string grouped;
    int run = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (run == 3) {
            grouped.push_back(',');
            run = 0;
        }
        grouped.push_back(*it);
        ++run;
    }
    if (neg) grouped.push_back('-');
    std::reverse(grouped.begin(), grouped.end());
    return grouped;
}

struct RowRef {
    std::string arch;
    std::string metric;
    std::vector<double> usd;  // per controller
};

inline std::vector<RowRef> table_rows(const std::vector<EvalReport>& reports) {
    std::vector<RowRef> rows;
    const auto add_pair = [&](const std::string& arch, auto stat_of) {
        RowRef mean{arch, "Mean cost", {}};
        RowRef total{"", "Total cost", {}};
        for (const auto& r : reports) {
            const GroupStat s = stat_of(r);
            mean.usd.push_back(s.mean());
            total.usd.push_back(s.total);
        }
        rows.push_back(std::move(mean));
        rows.push_back(std::move(total));
    };
    add_pair("All", [](const EvalReport& r) { return r.all; });
    for (int g = 0; g < kNumArchGroups; ++g) {
        if (reports.front().groups[g].count == 0) continue;
        add_pair(group_label(static_cast<ArchGroup>(g)),
                 [g](const EvalReport& r) { return r.groups[g]; });
    }
    return rows;
}

}  // namespace detail

/// Text cost table: one Mean/Total row
/// pair per architecture group, one column per controller, integer k$ with
/// thousands separators. The best non-MPC value in each row is starred.
inline std::string render_table(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw DomainError("render_table: no reports");
    const auto rows = detail::table_rows(reports);

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header = {"Architecture", "Metric (k$)"};
    for (const auto& r : reports) header.push_back(controller_label(r.controller));
    cells.push_back(header);

    for (const auto& row : rows) {
        std::vector<std::string> line = {row.arch, row.metric};
        // Star the best non-MPC entry, the table's equivalent of bold.
        int best = -1;
        for (std::size_t c = 0; c < reports.size(); ++c) {
            if (reports[c].controller.rfind("mpc", 0) == 0) continue;
            if (best < 0 || row.usd[c] < row.usd[best]) best = static_cast<int>(c);
        }
        for (std::size_t c = 0; c < reports.size(); ++c) {
            std::string cell = detail::format_kusd(row.usd[c]);
            if (static_cast<int>(c) == best && reports.size() > 1) cell += '*';
            line.push_back(std::move(cell));
        }
        cells.push_back(std::move(line));
    }

    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
    }
    std::ostringstream os;
    for (std::size_t li = 0; li < cells.size(); ++li) {
        const auto& line = cells[li];
        for (std::size_t i = 0; i < line.size(); ++i) {
            const bool right = i >= 2;
            const std::size_t pad = width[i] - line[i].size();
            if (i) os << "  ";
            if (right) os << std::string(pad, ' ');
            os << line[i];
            if (!right && i + 1 < line.size()) os << std::string(pad, ' ');
        }
        os << '\n';
        if (li == 0) {
            std::size_t total = 0;
            for (std::size_t w : width) total += w;
            os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
        }
    }
    return os.str();
}

/// Long-format CSV in raw dollars at full precision.
inline std::string render_csv(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw DomainError("render_csv: no reports");
    std::ostringstream os;
    os << "controller,group,count,total_usd,mean_usd\n";
    for (const auto& r : reports) {
        const auto emit = [&](const char* key, const GroupStat& s) {
            os << r.controller << ',' << key << ',' << s.count << ','
               << detail::format_double(s.total) << ',' << detail::format_double(s.mean()) << '\n';
        };
        emit("all", r.all);
        for (int g = 0; g < kNumArchGroups; ++g) {
            if (r.groups[g].count == 0) continue;
            emit(group_key(static_cast<ArchGroup>(g)), r.groups[g]);
        }
    }
    return os.str();
}

/// JSON report with per-microgrid detail, raw dollars.
inline std::string render_json_report(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw DomainError("render_json_report: no reports");
    json out;
    out["seed"] = reports.front().seed;
    out["controllers"] = json::array();
    for (const auto& r : reports) {
        json jr;
        jr["name"] = r.controller;
        json groups;
        const auto put = [&](const char* key, const GroupStat& s) {
            groups[key] = {{"count", s.count}, {"total_usd", s.total}, {"mean_usd", s.mean()}};
        };
        put("all", r.all);
        for (int g = 0; g < kNumArchGroups; ++g) {
            if (r.groups[g].count == 0) continue;
            put(group_key(static_cast<ArchGroup>(g)), r.groups[g]);
        }
        jr["groups"] = std::move(groups);
        jr["per_microgrid"] = json::array();
        for (const auto& m : r.per_microgrid) {
            jr["per_microgrid"].push_back(
                {{"index", m.index}, {"group", group_key(m.group)}, {"cost_usd", m.cost}});
        }
        out["controllers"].push_back(std::move(jr));
    }
    return out.dump(2) + "\n";
}

enum class ReportFormat { csv, json, table };

inline ReportFormat parse_format(const std::string& s) {
    if (s == "csv") return ReportFormat::csv;
    if (s == "json") return ReportFormat::json;
    if (s == "table") return ReportFormat::table;
    throw ConfigError("unknown report format: " + s);
}

inline std::string render_report(const std::vector<EvalReport>& reports, ReportFormat fmt) {
    switch (fmt) {
        case ReportFormat::csv: return render_csv(reports);
        case ReportFormat::json: return render_json_report(reports);
        case ReportFormat::table: return render_table(reports);
    }
    throw ConfigError("bad report format");
}

}  // namespace mgsim
