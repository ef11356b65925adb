#include "hyprl/environment.hpp"

#include <stdexcept>

namespace hyprl::env {

const char* terminal_reason_name(TerminalReason r) {
    switch (r) {
        case TerminalReason::None: return "none";
        case TerminalReason::Budget: return "budget";
        case TerminalReason::Repeat: return "repeat";
    }
    return "none";
}

Environment::Environment(const meta::MetaDataset& md, meta::Scaler scaler, int budget)
    : md_(&md), scaler_(std::move(scaler)), budget_(budget) {
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
}

EnvState Environment::reset(int dataset_id) const {
    if (!md_->has_dataset(dataset_id)) {
        throw std::invalid_argument("unknown dataset_id: " + std::to_string(dataset_id));
    }
    EnvState s;
    s.static_features = scaler_.apply(md_->metafeatures(dataset_id));
    s.history.emplace_back(Eigen::VectorXd::Zero(md_->grid.encoded_dim()), 0.0);
    return s;
}

double Environment::reward(int dataset_id, int action) const {
    return -md_->mean_loss(dataset_id, action);
}

StepOutcome Environment::step(const EnvState& state, int dataset_id, int action) const {
    if (state.terminal()) throw std::logic_error("step on a terminal state");
    const double r = reward(dataset_id, action);  // validates action range

    StepOutcome out;
    out.reward = r;
    out.next_state = advance(state, md_->grid.encoded(action), r, action);
    if (action == state.last_action) {
        out.terminal_reason = TerminalReason::Repeat;
    } else if (out.next_state.step_count >= budget_) {
        out.terminal_reason = TerminalReason::Budget;
    }
    out.terminal = out.terminal_reason != TerminalReason::None;
    out.next_state.terminal_reason = out.terminal_reason;
    return out;
}

EnvState advance(const EnvState& state, const Eigen::VectorXd& encoded, double reward, int action) {
    EnvState next = state;
    next.history.emplace_back(encoded, reward);
    next.step_count += 1;
    next.last_action = action;
    return next;
}

}  // namespace hyprl::env
