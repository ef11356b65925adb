#pragma once

#include <Eigen/Dense>
#include <array>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace hyprl::meta {

inline constexpr int kNumMetafeatures = 16;

// Fixed metafeature order; indices match kMetafeatureNames.
enum Metafeature : int {
    kNumInstances = 0,
    kLogNumInstances,
    kNumFeatures,
    kLogNumFeatures,
    kDimensionality,
    kLogDimensionality,
    kInvDimensionality,
    kLogInvDimensionality,
    kKurtosisMin,
    kKurtosisMax,
    kKurtosisMean,
    kKurtosisStd,
    kSkewnessMin,
    kSkewnessMax,
    kSkewnessMean,
    kSkewnessStd,
};

extern const std::array<const char*, kNumMetafeatures> kMetafeatureNames;

using MetafeatureVector = Eigen::Matrix<double, kNumMetafeatures, 1>;

// Statistical descriptors of a numeric table (rows = instances, columns =
// features). Skewness is m3/m2^1.5 and kurtosis is excess m4/m2^2 - 3, both
// with population moments; a zero-variance column contributes 0 to both.
// Logs are natural. Throws std::invalid_argument on an empty or non-finite
// table.
MetafeatureVector compute_metafeatures(const Eigen::MatrixXd& table);

// Per-dimension z-score transform fit on a subset of datasets.
struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;  // 0 marks a constant dimension; apply() maps it to 0

    MetafeatureVector apply(const MetafeatureVector& v) const;
};

Scaler fit_scaler(const std::vector<std::pair<int, MetafeatureVector>>& vectors,
                  const std::set<int>& fit_ids);

// Fits on `fit_ids` and transforms every vector with the fitted scaler.
std::pair<std::vector<std::pair<int, MetafeatureVector>>, Scaler>
standardize_metafeatures(const std::vector<std::pair<int, MetafeatureVector>>& vectors,
                         const std::set<int>& fit_ids);

}  // namespace hyprl::meta
