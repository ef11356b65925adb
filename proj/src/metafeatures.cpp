#include "hyprl/metafeatures.hpp"

#include <cmath>
#include <stdexcept>

namespace hyprl::meta {

const std::array<const char*, kNumMetafeatures> kMetafeatureNames = {
    "num_instances",
    "log_num_instances",
    "num_features",
    "log_num_features",
    "dimensionality",
    "log_dimensionality",
    "inv_dimensionality",
    "log_inv_dimensionality",
    "kurtosis_min",
    "kurtosis_max",
    "kurtosis_mean",
    "kurtosis_std",
    "skewness_min",
    "skewness_max",
    "skewness_mean",
    "skewness_std",
};

namespace {

struct ColumnShape {
    double skewness = 0.0;
    double kurtosis = 0.0;
};

ColumnShape column_shape(const Eigen::VectorXd& col) {
    const double mean = col.mean();
    const Eigen::ArrayXd d = col.array() - mean;
    const double m2 = d.square().mean();
    if (m2 <= 0.0) return {};  // zero-variance convention
    const double m3 = d.cube().mean();
    const double m4 = d.square().square().mean();
    ColumnShape s;
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2) - 3.0;
    return s;
}

void aggregate(const Eigen::VectorXd& values, double& mn, double& mx, double& mean, double& sd) {
    mn = values.minCoeff();
    mx = values.maxCoeff();
    mean = values.mean();
    sd = std::sqrt((values.array() - mean).square().mean());
}

}  // namespace

MetafeatureVector compute_metafeatures(const Eigen::MatrixXd& table) {
    if (table.rows() < 1 || table.cols() < 1) throw std::invalid_argument("empty dataset");
    if (!table.allFinite()) throw std::invalid_argument("dataset contains non-finite values");

    const double n_instances = static_cast<double>(table.rows());
    const double n_features = static_cast<double>(table.cols());

    Eigen::VectorXd skew(table.cols()), kurt(table.cols());
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
        const ColumnShape s = column_shape(table.col(j));
        skew[j] = s.skewness;
        kurt[j] = s.kurtosis;
    }

    MetafeatureVector v;
    v[kNumInstances] = n_instances;
    v[kLogNumInstances] = std::log(n_instances);
    v[kNumFeatures] = n_features;
    v[kLogNumFeatures] = std::log(n_features);
    const double dim = n_features / n_instances;
    v[kDimensionality] = dim;
    v[kLogDimensionality] = std::log(dim);
    v[kInvDimensionality] = 1.0 / dim;
    v[kLogInvDimensionality] = std::log(1.0 / dim);
    aggregate(kurt, v[kKurtosisMin], v[kKurtosisMax], v[kKurtosisMean], v[kKurtosisStd]);
    aggregate(skew, v[kSkewnessMin], v[kSkewnessMax], v[kSkewnessMean], v[kSkewnessStd]);
    return v;
}

MetafeatureVector Scaler::apply(const MetafeatureVector& v) const {
    MetafeatureVector out;
    for (int i = 0; i < kNumMetafeatures; ++i) {
        out[i] = stddev[i] > 0.0 ? (v[i] - mean[i]) / stddev[i] : 0.0;
    }
    return out;
}

Scaler fit_scaler(const std::vector<std::pair<int, MetafeatureVector>>& vectors,
                  const std::set<int>& fit_ids) {
    if (fit_ids.empty()) throw std::invalid_argument("fit_ids must be non-empty");
    Eigen::MatrixXd fit(kNumMetafeatures, 0);
    for (const auto& [id, v] : vectors) {
        if (!fit_ids.count(id)) continue;
        fit.conservativeResize(Eigen::NoChange, fit.cols() + 1);
        fit.col(fit.cols() - 1) = v;
    }
    if (fit.cols() == 0) throw std::invalid_argument("no vectors match fit_ids");
    Scaler s;
    s.mean = fit.rowwise().mean();
    s.stddev = (fit.colwise() - s.mean).array().square().rowwise().mean().sqrt().matrix();
    return s;
}

std::pair<std::vector<std::pair<int, MetafeatureVector>>, Scaler>
standardize_metafeatures(const std::vector<std::pair<int, MetafeatureVector>>& vectors,
                         const std::set<int>& fit_ids) {
    Scaler s = fit_scaler(vectors, fit_ids);
    std::vector<std::pair<int, MetafeatureVector>> out;
    out.reserve(vectors.size());
    for (const auto& [id, v] : vectors) out.emplace_back(id, s.apply(v));
    return {std::move(out), std::move(s)};
}

}  // namespace hyprl::meta
