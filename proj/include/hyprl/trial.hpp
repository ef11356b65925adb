#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace hyprl {

struct Trial {
    int t = 0;  // 1-based trial index
    int config_id = 0;
    double loss = 0.0;
};

// Ordered trials produced by one tuning method on one dataset. config_ids
// are distinct within a record.
struct TrialRecord {
    std::string method;
    int split = -1;  // -1 when run outside the benchmark protocol
    int dataset_id = 0;
    uint64_t seed = 0;
    std::vector<Trial> trials;
    std::vector<double> suggest_seconds;  // wall-clock per suggestion; not serialized

    // min loss over trials 1..t
    double best_loss_at(int t) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& trial : trials) {
            if (trial.t <= t) best = std::min(best, trial.loss);
        }
        return best;
    }
};

}  // namespace hyprl
