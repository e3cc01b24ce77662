#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <tuple>
#include <vector>

#include "mgsim/action_space.hpp"
#include "mgsim/errors.hpp"
#include "mgsim/microgrid.hpp"
#include "mgsim/rng.hpp"

namespace mgsim {

/// Dense table of expected returns over (hour, net-load bin, soc bin) x action.
struct QTable {
    Discretizer disc;
    int actions = kNumActionTemplates;
    std::vector<double> values;
    std::vector<std::uint32_t> visit_counts;

    static QTable make(const Discretizer& d, int num_actions = kNumActionTemplates) {
        QTable t;
        t.disc = d;
        t.actions = num_actions;
        t.values.assign(static_cast<std::size_t>(d.state_count()) * num_actions, 0.0);
        t.visit_counts.assign(t.values.size(), 0);
        return t;
    }

    int state_count() const { return disc.state_count(); }

    double q(int s, int a) const { return values[static_cast<std::size_t>(s) * actions + a]; }
    double& q(int s, int a) { return values[static_cast<std::size_t>(s) * actions + a]; }

    double max_q(int s) const {
        const double* row = values.data() + static_cast<std::size_t>(s) * actions;
        double best = row[0];
        for (int a = 1; a < actions; ++a) best = std::max(best, row[a]);
        return best;
    }

    /// Greedy action; ties resolve to the lowest index.
    int greedy(int s) const {
        const double* row = values.data() + static_cast<std::size_t>(s) * actions;
        int best = 0;
        for (int a = 1; a < actions; ++a) {
            if (row[a] > row[best]) best = a;
        }
        return best;
    }
};

struct QLearnParams {
    int episodes = 2000;
    double alpha = 0.1;
    double gamma = 0.95;
    double eps_start = 1.0;
    double eps_end = 0.02;
    double eps_decay_fraction = 0.8;  // epsilon reaches eps_end after this share of episodes
};

/// Tabular Q-learning over any environment exposing
///   int reset(); std::tuple<int,double,bool> step(int action);
///   int state_count(); int action_count();
/// The update always bootstraps, Q[s,a] += alpha*(r + gamma*max Q[s'] - Q),
/// which treats episode cutoffs as plain truncation.
template <typename Env>
void q_train(Env& env, QTable& table, const QLearnParams& p, Rng& rng) {
    if (!(p.alpha > 0.0) || p.alpha > 1.0) throw DomainError("alpha must be in (0,1]");
    if (p.gamma < 0.0 || p.gamma >= 1.0) throw DomainError("gamma must be in [0,1)");
    if (p.episodes < 0) throw DomainError("episodes must be >= 0");

    const int num_actions = env.action_count();
    const double decay_span = std::max(1.0, p.eps_decay_fraction * p.episodes);
    for (int ep = 0; ep < p.episodes; ++ep) {
        const double frac = std::min(1.0, static_cast<double>(ep) / decay_span);
        const double eps = p.eps_start + (p.eps_end - p.eps_start) * frac;

        int s = env.reset();
        bool done = false;
        while (!done) {
            const int a = rng.uniform() < eps ? static_cast<int>(rng.uniform_int(num_actions))
                                              : table.greedy(s);
            auto [s2, r, fin] = env.step(a);
            const double target = r + p.gamma * table.max_q(s2);
            double& cell = table.q(s, a);
            cell += p.alpha * (target - cell);
            ++table.visit_counts[static_cast<std::size_t>(s) * table.actions + a];
            s = s2;
            done = fin;
        }
    }
}

/// Adapts a Microgrid to the tabular environment interface. Rewards are the
/// negated step cost normalized by the load peak so table magnitudes stay
/// comparable across microgrids.
class MicrogridEnv {
public:
    MicrogridEnv(Microgrid& mg, const Discretizer& disc, Phase phase)
        : mg_(mg), disc_(disc), phase_(phase), scale_(1.0 / std::max(1e-9, mg.limits().load_peak)) {}

    int state_count() const { return disc_.state_count(); }
    int action_count() const { return kNumActionTemplates; }

    int reset() {
        obs_ = mg_.reset(phase_);
        return disc_.index(obs_);
    }

    std::tuple<int, double, bool> step(int action) {
        const StepRecord rec = mg_.run(expand_template(action, obs_));
        obs_ = rec.observation;
        return {disc_.index(obs_), -rec.cost.total() * scale_, rec.done};
    }

    const Observation& observation() const { return obs_; }

private:
    Microgrid& mg_;
    Discretizer disc_;
    Phase phase_;
    double scale_;
    Observation obs_;
};

/// Trains a per-microgrid table on the train phase.
inline QTable qlearn_train(Microgrid& mg, const QLearnParams& params, const Discretizer& disc,
                           std::uint64_t seed) {
    if (!mg.has_split()) throw SplitError("qlearn_train requires train_test_split");
    QTable table = QTable::make(disc);
    MicrogridEnv env(mg, disc, Phase::train);
    Rng rng(seed);
    q_train(env, table, params, rng);
    return table;
}

/// Greedy table lookup expanded to a concrete action.
inline ControlAction q_decide(const QTable& table, const Observation& obs) {
    return expand_template(table.greedy(table.disc.index(obs)), obs);
}

}  // namespace mgsim
