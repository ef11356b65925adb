#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "hyprl/metadataset.hpp"
#include "hyprl/rng.hpp"
#include "hyprl/trial.hpp"

namespace hyprl::baselines {

// Uniform sampling without replacement. Throws when budget exceeds the grid.
std::vector<int> random_search(size_t grid_size, int budget, Rng& rng);

enum class KernelKind { SquaredExponentialArd, Matern52 };

// Zero-prior-mean GP over encoded configurations with per-dimension (ARD)
// length-scales. Callers that want a nonzero prior mean center y themselves.
struct GpSurrogate {
    Eigen::MatrixXd X;  // n x d observed inputs
    Eigen::VectorXd y;  // n observed losses
    KernelKind kernel = KernelKind::SquaredExponentialArd;
    Eigen::VectorXd length_scales;  // d
    double signal_variance = 1.0;
    double noise_variance = 1e-6;
};

double kernel_value(KernelKind kind, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& length_scales, double signal_variance);

// K(X, X), without the noise diagonal.
Eigen::MatrixXd kernel_matrix(const GpSurrogate& sur);

// Caches the Cholesky factorization of K + noise*I (plus escalating jitter up
// to 1e-6; beyond that the constructor throws std::runtime_error).
class GpPredictor {
public:
    explicit GpPredictor(const GpSurrogate& sur);

    // posterior (mean, variance) of the latent function at x
    std::pair<double, double> predict(const Eigen::VectorXd& x) const;

    double log_marginal_likelihood() const;

private:
    const GpSurrogate* sur_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
};

// One-shot convenience wrapper around GpPredictor.
std::pair<double, double> gp_posterior(const GpSurrogate& sur, const Eigen::VectorXd& x_star);

// Ascends the log marginal likelihood in log-space (length-scales, signal
// and noise deviations) for a bounded number of iterations. Applies a
// noise-variance floor of 1e-6.
void fit_gp_hyperparameters(GpSurrogate& sur, int iterations = 50);

// Closed-form expected improvement for minimization; sigma = 0 degenerates
// to max(best - mean, 0).
double expected_improvement(double mean, double variance, double best_loss);

// SMBO: 3 random initial trials, then fit-and-maximize-EI over the
// unevaluated configs (ties break toward the lowest id), re-fitting after
// every selection.
TrialRecord smbo_run(const meta::MetaDataset& md, int dataset_id, int budget, KernelKind kernel,
                     Rng& rng, const std::string& method_name = "smbo");

}  // namespace hyprl::baselines
