#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>

#include "mgsim/decision_tree.hpp"
#include "mgsim/microgrid.hpp"
#include "mgsim/mpc.hpp"
#include "mgsim/qlearning.hpp"
#include "mgsim/rule_based.hpp"

namespace mgsim {

/// A dispatch policy driving one microgrid episode.
class Controller {
public:
    virtual ~Controller() = default;
    virtual std::string name() const = 0;
    virtual void begin_episode(const Microgrid&) {}
    virtual ControlAction decide(const Microgrid& mg) = 0;
};

class RuleBasedController final : public Controller {
public:
    std::string name() const override { return "rbc"; }
    ControlAction decide(const Microgrid& mg) override { return rbc_decide(mg.observation()); }
};

/// Rolling-horizon MPC with a perfect forecast. When one solve covers the
/// whole remaining phase the plan is kept and replayed, so a full-horizon
/// evaluation costs a single LP.
class MpcController final : public Controller {
public:
    explicit MpcController(std::size_t horizon, bool full_horizon = false)
        : horizon_(horizon), full_(full_horizon) {}

    static MpcController full() { return MpcController(0, true); }

    std::string name() const override { return full_ ? "mpc-full" : "mpc"; }

    void begin_episode(const Microgrid&) override {
        plan_.actions.clear();
        plan_step_ = 0;
    }

    ControlAction decide(const Microgrid& mg) override {
        if (plan_step_ < plan_.actions.size()) return plan_.actions[plan_step_++];
        const std::size_t h = full_ ? mg.steps_remaining() : std::min(horizon_, mg.steps_remaining());
        if (full_ || h >= mg.steps_remaining()) {
            plan_ = mpc_plan(mg, mg.steps_remaining());
            plan_step_ = 0;
            return plan_.actions[plan_step_++];
        }
        return mpc_decide(mg, h);
    }

    /// Optimum of the most recent full-phase LP (oracle lower bound).
    double last_lp_objective() const { return plan_.lp_objective; }

private:
    std::size_t horizon_;
    bool full_;
    MpcPlan plan_;
    std::size_t plan_step_ = 0;
};

class QController final : public Controller {
public:
    explicit QController(QTable table) : table_(std::move(table)) {}
    std::string name() const override { return "q"; }
    ControlAction decide(const Microgrid& mg) override {
        return q_decide(table_, mg.observation());
    }
    const QTable& table() const { return table_; }

private:
    QTable table_;
};

class QdtController final : public Controller {
public:
    explicit QdtController(DTModel model) : model_(std::move(model)) {}
    std::string name() const override { return "qdt"; }
    ControlAction decide(const Microgrid& mg) override {
        return dt_decide(model_, mg.observation());
    }
    const DTModel& model() const { return model_; }

private:
    DTModel model_;
};

/// Resets the microgrid to the phase, loops decide/run to the end, and
/// returns the accumulated cost.
inline double evaluate_controller(Controller& controller, Microgrid& mg, Phase phase) {
    mg.reset(phase);
    controller.begin_episode(mg);
    while (!mg.done()) {
        mg.run(controller.decide(mg));
    }
    return mg.cumulative_cost();
}

}  // namespace mgsim
