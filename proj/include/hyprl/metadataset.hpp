#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hyprl/grid.hpp"
#include "hyprl/metafeatures.hpp"

namespace hyprl::meta {

struct SplitDef {
    std::vector<int> train_ids;
    std::vector<int> test_ids;
};

// Complete tabular benchmark: every (dataset, config) pair has a loss for
// every fold. Dataset ids are contiguous 0..N-1 and double as indices.
struct MetaDataset {
    HyperparameterGrid grid;
    std::vector<std::pair<int, MetafeatureVector>> datasets;  // raw (unstandardized)
    std::vector<Eigen::MatrixXd> responses;                   // [dataset_id] -> n_configs x n_folds
    std::vector<SplitDef> splits;
    std::optional<uint64_t> seed;  // set when synthetic

    int n_datasets() const { return static_cast<int>(datasets.size()); }
    int n_configs() const { return static_cast<int>(grid.size()); }
    int n_folds() const { return datasets.empty() ? 0 : static_cast<int>(responses[0].cols()); }

    bool has_dataset(int dataset_id) const {
        return dataset_id >= 0 && dataset_id < n_datasets();
    }
    const MetafeatureVector& metafeatures(int dataset_id) const;

    // fold-mean loss; the value consumed by the environment and the metrics
    double mean_loss(int dataset_id, int config_id) const;

    bool operator==(const MetaDataset& other) const;
};

// Seeded synthetic meta-dataset: each dataset is a latent vector z (dim 8);
// losses are logistic(quadratic(encoded config; z)) plus small fold noise,
// clamped into (0,1); metafeatures are monotone maps of affine functions of
// z, so they carry information about the response surface. Deterministic
// given (seed, n_datasets, grid, n_folds). Builds min(5, n_datasets)
// cross-validation-style splits.
MetaDataset generate_synthetic_metadataset(int n_datasets, const HyperparameterGrid& grid,
                                           int n_folds, uint64_t seed,
                                           double noise_std = 0.01);

// Directory layout: grid.csv, metafeatures.csv, scaler.csv, responses.csv,
// splits.csv, manifest.json. Round trip is lossless.
void save_metadataset(const MetaDataset& md, const std::filesystem::path& dir);
MetaDataset load_metadataset(const std::filesystem::path& dir);

}  // namespace hyprl::meta
