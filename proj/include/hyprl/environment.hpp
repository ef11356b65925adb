#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "hyprl/metadataset.hpp"
#include "hyprl/metafeatures.hpp"

namespace hyprl::env {

enum class TerminalReason { None, Budget, Repeat };

const char* terminal_reason_name(TerminalReason r);

// Fully observable state: standardized metafeatures plus the chronological
// (encoded config, reward) history. The history starts with a sentinel
// (zero vector, 0) and is append-only.
struct EnvState {
    Eigen::VectorXd static_features;
    std::vector<std::pair<Eigen::VectorXd, double>> history;
    int step_count = 0;
    int last_action = -1;  // sentinel; never matches a real action
    TerminalReason terminal_reason = TerminalReason::None;

    bool terminal() const { return terminal_reason != TerminalReason::None; }
};

struct StepOutcome {
    EnvState next_state;
    double reward = 0.0;
    bool terminal = false;
    TerminalReason terminal_reason = TerminalReason::None;
};

// The tabular MDP over one MetaDataset. Rewards are negated fold-mean
// losses; an episode ends when the same action is picked twice in a row or
// when the step count reaches the budget. Instances are immutable after
// construction and safe to share across threads.
class Environment {
public:
    Environment(const meta::MetaDataset& md, meta::Scaler scaler, int budget);

    // initial state: sentinel history, step_count 0
    EnvState reset(int dataset_id) const;

    // R(D, a) = -mean_fold(loss[D][a])
    double reward(int dataset_id, int action) const;

    // Appends (encoded(action), reward) to the history and applies the two
    // terminal rules. The reward is computed and reported even on the
    // terminating step. Throws std::logic_error when `state` is already
    // terminal and std::invalid_argument on an out-of-range action.
    StepOutcome step(const EnvState& state, int dataset_id, int action) const;

    int budget() const { return budget_; }
    const meta::MetaDataset& metadataset() const { return *md_; }
    const meta::Scaler& scaler() const { return scaler_; }

private:
    const meta::MetaDataset* md_;
    meta::Scaler scaler_;
    int budget_;
};

// The transition shape shared by training and deployment: returns `state`
// with (encoded, reward) appended. Does not touch the terminal rules.
EnvState advance(const EnvState& state, const Eigen::VectorXd& encoded, double reward, int action);

}  // namespace hyprl::env
