#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hyprl/environment.hpp"
#include "hyprl/metadataset.hpp"
#include "hyprl/neuralnet.hpp"
#include "hyprl/rng.hpp"
#include "hyprl/trial.hpp"

namespace hyprl::agent {

struct Experience {
    env::EnvState s;
    env::EnvState s_next;  // absorbing when terminal; kept for logging
    int action = 0;
    double reward = 0.0;
    bool terminal = false;
};

// FIFO ring of transition tuples, sampled uniformly.
class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity);

    void push(Experience e);
    size_t size() const { return ring_.size(); }
    size_t capacity() const { return capacity_; }
    size_t inserted() const { return inserted_; }
    bool full() const { return ring_.size() == capacity_; }

    // oldest-first access, for FIFO property tests
    const Experience& at(size_t i) const;

    std::vector<const Experience*> sample(size_t n, Rng& rng) const;

private:
    size_t capacity_;
    size_t head_ = 0;  // index of the oldest element once full
    size_t inserted_ = 0;
    std::vector<Experience> ring_;
};

struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.1;
    // 0 = anneal over 25% of the frames remaining after the buffer fills
    uint64_t anneal_frames = 0;
};

struct TrainConfig {
    double gamma = 0.9;
    int target_update_frequency = 500;  // N_u, in environment steps
    int buffer_capacity = 10000;        // N_b
    int episodes_per_dataset = 100;     // N_e
    int budget = 10;                    // T, actions per episode
    int train_frequency = 4;            // N_train, environment steps per update
    double learning_rate = 1e-3;
    int minibatch_size = 32;
    EpsilonSchedule epsilon;
    uint64_t seed = 0;
    int hidden_units = 16;  // N_h
    int layer_units = 32;   // N_layer
    bool record_traces = false;

    void validate() const;  // throws std::invalid_argument
};

// Epsilon-greedy over Q(s, .); argmax ties break toward the lowest id.
int select_action(const env::EnvState& state, const nn::QNetworkParams& params, double epsilon,
                  Rng& rng);

// Bellman relabeling against the (frozen) target network:
// label = r when s' is terminal, else r + gamma * max_a' Q_target(s', a').
std::vector<nn::QTrainExample> compute_targets(std::span<const Experience* const> batch,
                                               const nn::QNetworkParams& target_params,
                                               double gamma);

// Deep copy; later updates to the source leave the copy untouched.
nn::QNetworkParams sync_target(const nn::QNetworkParams& params);

struct EpisodeLog {
    int episode = 0;
    int dataset_id = 0;
    int steps = 0;
    double episode_return = 0.0;  // includes the terminal step's reward
    double mean_q = 0.0;          // mean Q of the taken actions at selection time
    double epsilon = 0.0;         // value at the episode's first step
    uint64_t frames = 0;          // cumulative environment steps at episode end
    int target_syncs = 0;         // cumulative
};

struct StepTrace {
    int episode = 0;
    int t = 0;
    int dataset_id = 0;
    int action = 0;
    double reward = 0.0;
    env::TerminalReason terminal_reason = env::TerminalReason::None;
};

struct TrainResult {
    nn::QNetworkParams params;
    meta::Scaler scaler;  // fit on the train ids; deployment must reuse it
    std::vector<EpisodeLog> log;
    std::vector<StepTrace> traces;  // empty unless cfg.record_traces
};

// The full training loop: N_e * |train_ids| episodes over datasets sampled
// uniformly from train_ids, epsilon-greedy acting, uniform replay sampling,
// one gradient update per N_train steps once the buffer is full, and target
// sync every N_u steps. Bit-reproducible given (md, train_ids, cfg).
TrainResult train(const meta::MetaDataset& md, const std::vector<int>& train_ids,
                  const TrainConfig& cfg);

// Optional per-episode hook (1-based episode count), used by the CLI for
// periodic checkpointing.
using EpisodeHook =
    std::function<void(int episode, const nn::QNetworkParams&, const meta::Scaler&)>;
TrainResult train(const meta::MetaDataset& md, const std::vector<int>& train_ids,
                  const TrainConfig& cfg, const EpisodeHook& on_episode);

// Greedy rollout for `budget` distinct trials: each trial takes the highest-Q
// action among those not yet selected, so a would-be repeat falls through to
// the next best action. Deterministic. Throws when budget exceeds the grid.
TrialRecord deploy(const nn::QNetworkParams& params, const meta::Scaler& scaler,
                   const meta::MetaDataset& md, int dataset_id, int budget);

}  // namespace hyprl::agent
