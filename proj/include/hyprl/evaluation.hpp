#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyprl/metadataset.hpp"
#include "hyprl/trial.hpp"

namespace hyprl::eval {

// A tuning strategy under benchmark. `run` must be deterministic given its
// arguments; `seed` is the only entropy source.
struct TuningMethod {
    std::string name;
    std::function<TrialRecord(const meta::MetaDataset& md, int split, int dataset_id, int budget,
                              uint64_t seed)>
        run;
};

// Average distance to the minimum after trial t: mean over datasets of the
// min-max-normalized loss of the best configuration found within the first t
// trials. Losses and the per-dataset min/max come from `md`, not from the
// records. Datasets with a flat response surface (max == min) are excluded;
// when `degenerate_excluded` is non-null the count is written there.
double adtm(const std::vector<TrialRecord>& per_dataset_records, int t,
            const meta::MetaDataset& md, int* degenerate_excluded = nullptr);

// Ranks methods per dataset by best-so-far loss (rank 1 = lowest loss, ties
// averaged) and returns the per-method mean over datasets.
std::map<std::string, double> average_rank(
    const std::map<std::string, std::map<int, double>>& best_so_far);

struct AdtmRow {
    std::string method;
    int split = 0;
    int t = 0;
    double value = 0.0;  // mean over seeds and test datasets
};

struct RankRow {
    std::string method;
    int dataset_id = 0;
    int t = 0;
    double best_loss = 0.0;  // mean over seeds
    double rank = 0.0;
};

struct TimingRow {
    std::string method;
    double mean_seconds_per_trial = 0.0;
    long n_suggestions = 0;
};

struct BenchmarkReport {
    std::vector<AdtmRow> adtm;
    std::vector<RankRow> ranks;
    std::vector<TimingRow> timing;
    std::vector<TrialRecord> trials;
    int degenerate_excluded = 0;
};

// Runs every method for `budget` trials on each (split, seed, test dataset)
// tuple and aggregates ADTM(t) and rank curves for t = 1..budget. Task seeds
// depend on (seed, split, dataset) only, so registering the same method twice
// reproduces identical records. `jobs` > 1 parallelizes the runs without
// affecting the aggregated output. On failure, completed trial records are
// flushed to `flush_dir` (when given) before the error propagates.
BenchmarkReport run_benchmark(const meta::MetaDataset& md,
                              const std::vector<TuningMethod>& methods, int budget,
                              const std::vector<uint64_t>& seeds,
                              const std::vector<int>& split_ids, int jobs = 1,
                              const std::optional<std::filesystem::path>& flush_dir = {});

// adtm.csv, rank.csv, timing.csv, trials.csv plus adtm.svg / rank.svg (plots
// are skipped for empty tables). CSVs are the source of truth; the SVGs are
// a pure function of the CSV contents.
void emit_report(const BenchmarkReport& report, const std::filesystem::path& dir);

// Plot builders shared by emit_report and the plot command. Return false
// (and write nothing) when rows are empty.
bool write_adtm_svg(const std::filesystem::path& path, const std::vector<AdtmRow>& rows);
bool write_rank_svg(const std::filesystem::path& path, const std::vector<RankRow>& rows);

}  // namespace hyprl::eval
