#include "hyprl/agent.hpp"

#include <chrono>
#include <set>
#include <stdexcept>

namespace hyprl::agent {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("replay buffer capacity must be >= 1");
    ring_.reserve(capacity);
}

void ReplayBuffer::push(Experience e) {
    if (ring_.size() < capacity_) {
        ring_.push_back(std::move(e));
    } else {
        ring_[head_] = std::move(e);
        head_ = (head_ + 1) % capacity_;
    }
    ++inserted_;
}

const Experience& ReplayBuffer::at(size_t i) const {
    if (i >= ring_.size()) throw std::out_of_range("replay buffer index out of range");
    return ring_[(head_ + i) % ring_.size()];
}

std::vector<const Experience*> ReplayBuffer::sample(size_t n, Rng& rng) const {
    if (ring_.empty()) throw std::logic_error("sampling from an empty replay buffer");
    std::vector<const Experience*> out;
    out.reserve(n);
    for (size_t k = 0; k < n; ++k) {
        out.push_back(&ring_[rng.uniform_int(static_cast<int>(ring_.size()))]);
    }
    return out;
}

void TrainConfig::validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must be in [0,1]");
    if (target_update_frequency < 1) throw std::invalid_argument("target update frequency must be >= 1");
    if (buffer_capacity < 1) throw std::invalid_argument("buffer capacity must be >= 1");
    if (episodes_per_dataset < 0) throw std::invalid_argument("episodes per dataset must be >= 0");
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
    if (train_frequency < 1) throw std::invalid_argument("train frequency must be >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be > 0");
    if (minibatch_size < 1) throw std::invalid_argument("minibatch size must be >= 1");
    if (epsilon.start < 0.0 || epsilon.start > 1.0 || epsilon.end < 0.0 || epsilon.end > 1.0) {
        throw std::invalid_argument("epsilon bounds must be in [0,1]");
    }
    if (hidden_units < 1 || layer_units < 1) throw std::invalid_argument("network sizes must be >= 1");
}

namespace {

int argmax_lowest(const Eigen::VectorXd& q) {
    int best = 0;
    for (int a = 1; a < q.size(); ++a) {
        if (q[a] > q[best]) best = a;
    }
    return best;
}

double epsilon_at(uint64_t frames, bool buffer_filled, uint64_t fill_frame, uint64_t max_frames,
                  const EpsilonSchedule& s) {
    if (!buffer_filled) return s.start;
    uint64_t anneal = s.anneal_frames;
    if (anneal == 0) anneal = max_frames > fill_frame ? (max_frames - fill_frame) / 4 : 0;
    if (anneal == 0) return s.end;
    const uint64_t progressed = frames - fill_frame;
    if (progressed >= anneal) return s.end;
    return s.start + (s.end - s.start) * static_cast<double>(progressed) / static_cast<double>(anneal);
}

}  // namespace

int select_action(const env::EnvState& state, const nn::QNetworkParams& params, double epsilon,
                  Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in [0,1]");
    if (rng.uniform() < epsilon) return rng.uniform_int(params.n_actions());
    return argmax_lowest(nn::q_forward(state, params));
}

std::vector<nn::QTrainExample> compute_targets(std::span<const Experience* const> batch,
                                               const nn::QNetworkParams& target_params,
                                               double gamma) {
    if (batch.empty()) throw std::invalid_argument("compute_targets: empty batch");
    std::vector<nn::QTrainExample> out;
    out.reserve(batch.size());
    for (const Experience* e : batch) {
        double label = e->reward;
        if (!e->terminal) {
            label += gamma * nn::q_forward(e->s_next, target_params).maxCoeff();
        }
        out.push_back({&e->s, e->action, label});
    }
    return out;
}

nn::QNetworkParams sync_target(const nn::QNetworkParams& params) { return params; }

TrainResult train(const meta::MetaDataset& md, const std::vector<int>& train_ids,
                  const TrainConfig& cfg) {
    return train(md, train_ids, cfg, EpisodeHook{});
}

TrainResult train(const meta::MetaDataset& md, const std::vector<int>& train_ids,
                  const TrainConfig& cfg, const EpisodeHook& on_episode) {
    cfg.validate();
    if (train_ids.empty()) throw std::invalid_argument("train split is empty");
    for (int id : train_ids) {
        if (!md.has_dataset(id)) {
            throw std::invalid_argument("train id not in meta-dataset: " + std::to_string(id));
        }
    }

    const std::set<int> fit_ids(train_ids.begin(), train_ids.end());
    meta::Scaler scaler = meta::fit_scaler(md.datasets, fit_ids);
    const env::Environment environment(md, scaler, cfg.budget);

    const int n_actions = md.n_configs();
    Rng rng(cfg.seed);
    nn::QNetworkParams params =
        nn::init_q_network(cfg.hidden_units, md.grid.encoded_dim() + 1, cfg.layer_units,
                           n_actions, meta::kNumMetafeatures, rng.next_u64());
    nn::QNetworkParams target = sync_target(params);
    nn::AdamState adam = nn::make_adam_state(params);
    ReplayBuffer buffer(static_cast<size_t>(cfg.buffer_capacity));

    const long total_episodes = static_cast<long>(cfg.episodes_per_dataset) *
                                static_cast<long>(train_ids.size());
    const uint64_t max_frames =
        static_cast<uint64_t>(total_episodes) * static_cast<uint64_t>(cfg.budget);

    TrainResult result;
    uint64_t frames = 0;
    uint64_t fill_frame = 0;
    bool filled = false;
    int target_syncs = 0;

    for (long ep = 0; ep < total_episodes; ++ep) {
        const int dataset_id = train_ids[rng.uniform_int(static_cast<int>(train_ids.size()))];
        env::EnvState state = environment.reset(dataset_id);

        EpisodeLog log;
        log.episode = static_cast<int>(ep);
        log.dataset_id = dataset_id;
        log.epsilon = epsilon_at(frames, filled, fill_frame, max_frames, cfg.epsilon);
        double q_sum = 0.0;

        while (!state.terminal()) {
            const double eps = epsilon_at(frames, filled, fill_frame, max_frames, cfg.epsilon);
            const int action = select_action(state, params, eps, rng);
            q_sum += nn::q_forward(state, params)[action];

            env::StepOutcome out = environment.step(state, dataset_id, action);
            buffer.push(Experience{state, out.next_state, action, out.reward, out.terminal});
            ++frames;
            if (!filled && buffer.full()) {
                filled = true;
                fill_frame = frames;
            }
            log.episode_return += out.reward;
            ++log.steps;
            if (cfg.record_traces) {
                result.traces.push_back(StepTrace{static_cast<int>(ep), log.steps, dataset_id,
                                                  action, out.reward, out.terminal_reason});
            }

            if (filled && frames % static_cast<uint64_t>(cfg.train_frequency) == 0) {
                const auto batch = buffer.sample(static_cast<size_t>(cfg.minibatch_size), rng);
                const auto labeled = compute_targets(batch, target, cfg.gamma);
                const nn::QNetworkParams grads = nn::q_gradients(labeled, params);
                nn::adam_step(params, grads, adam, cfg.learning_rate);
            }
            if (frames % static_cast<uint64_t>(cfg.target_update_frequency) == 0) {
                target = sync_target(params);
                ++target_syncs;
            }
            state = std::move(out.next_state);
        }

        log.mean_q = log.steps > 0 ? q_sum / log.steps : 0.0;
        log.frames = frames;
        log.target_syncs = target_syncs;
        result.log.push_back(log);
        if (on_episode) on_episode(static_cast<int>(ep) + 1, params, scaler);
    }

    result.params = std::move(params);
    result.scaler = std::move(scaler);
    return result;
}

TrialRecord deploy(const nn::QNetworkParams& params, const meta::Scaler& scaler,
                   const meta::MetaDataset& md, int dataset_id, int budget) {
    const int n_configs = md.n_configs();
    if (budget < 1 || budget > n_configs) {
        throw std::invalid_argument("deploy budget " + std::to_string(budget) +
                                    " exceeds grid size " + std::to_string(n_configs));
    }
    const env::Environment environment(md, scaler, budget);
    env::EnvState state = environment.reset(dataset_id);

    TrialRecord record;
    record.method = "hyp-rl";
    record.dataset_id = dataset_id;
    std::vector<char> used(n_configs, 0);
    for (int t = 1; t <= budget; ++t) {
        const auto start = std::chrono::steady_clock::now();
        const Eigen::VectorXd q = nn::q_forward(state, params);
        int best = -1;
        for (int a = 0; a < n_configs; ++a) {
            if (!used[a] && (best < 0 || q[a] > q[best])) best = a;
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

        used[best] = 1;
        const double loss = md.mean_loss(dataset_id, best);
        record.trials.push_back(Trial{t, best, loss});
        record.suggest_seconds.push_back(elapsed.count());
        state = env::advance(state, md.grid.encoded(best), -loss, best);
    }
    return record;
}

}  // namespace hyprl::agent
