#include "hyprl/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hyprl::baselines {

std::vector<int> random_search(size_t grid_size, int budget, Rng& rng) {
    if (budget < 0 || static_cast<size_t>(budget) > grid_size) {
        throw std::invalid_argument("random_search budget " + std::to_string(budget) +
                                    " exceeds grid size " + std::to_string(grid_size));
    }
    std::vector<int> ids(grid_size);
    for (size_t i = 0; i < grid_size; ++i) ids[i] = static_cast<int>(i);
    for (int i = 0; i < budget; ++i) {
        const int j = i + rng.uniform_int(static_cast<int>(grid_size) - i);
        std::swap(ids[i], ids[j]);
    }
    ids.resize(budget);
    return ids;
}

namespace {

constexpr double kSqrt5 = 2.2360679774997896;
constexpr double kMaxJitter = 1e-6;

double scaled_sq_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& ls) {
    return ((a - b).array() / ls.array()).square().sum();
}

double matern52(double r2, double signal_variance) {
    const double r = std::sqrt(r2);
    return signal_variance * (1.0 + kSqrt5 * r + 5.0 / 3.0 * r2) * std::exp(-kSqrt5 * r);
}

}  // namespace

double kernel_value(KernelKind kind, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                    const Eigen::VectorXd& length_scales, double signal_variance) {
    if (a.size() != b.size() || a.size() != length_scales.size()) {
        throw std::invalid_argument("kernel_value: dimension mismatch");
    }
    const double r2 = scaled_sq_distance(a, b, length_scales);
    if (kind == KernelKind::SquaredExponentialArd) return signal_variance * std::exp(-0.5 * r2);
    return matern52(r2, signal_variance);
}

Eigen::MatrixXd kernel_matrix(const GpSurrogate& sur) {
    const int n = static_cast<int>(sur.X.rows());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double k = kernel_value(sur.kernel, sur.X.row(i), sur.X.row(j),
                                          sur.length_scales, sur.signal_variance);
            K(i, j) = k;
            K(j, i) = k;
        }
    }
    return K;
}

GpPredictor::GpPredictor(const GpSurrogate& sur) : sur_(&sur) {
    if (sur.X.rows() < 1) throw std::invalid_argument("GP needs at least one observation");
    if (sur.X.rows() != sur.y.size()) throw std::invalid_argument("GP X/y size mismatch");
    const Eigen::MatrixXd K = kernel_matrix(sur);
    double jitter = 0.0;
    while (true) {
        Eigen::MatrixXd Kn = K;
        Kn.diagonal().array() += sur.noise_variance + jitter;
        llt_.compute(Kn);
        if (llt_.info() == Eigen::Success) break;
        jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
        if (jitter > kMaxJitter) {
            throw std::runtime_error("kernel matrix not positive definite after jitter escalation");
        }
    }
    alpha_ = llt_.solve(sur.y);
}

std::pair<double, double> GpPredictor::predict(const Eigen::VectorXd& x) const {
    const int n = static_cast<int>(sur_->X.rows());
    Eigen::VectorXd k_star(n);
    for (int i = 0; i < n; ++i) {
        k_star[i] = kernel_value(sur_->kernel, sur_->X.row(i), x, sur_->length_scales,
                                 sur_->signal_variance);
    }
    const double mean = k_star.dot(alpha_);
    const Eigen::VectorXd v = llt_.solve(k_star);
    const double variance = std::max(0.0, sur_->signal_variance - k_star.dot(v));
    return {mean, variance};
}

double GpPredictor::log_marginal_likelihood() const {
    const int n = static_cast<int>(sur_->X.rows());
    double log_det = 0.0;
    for (int i = 0; i < n; ++i) log_det += std::log(llt_.matrixLLT()(i, i));
    return -0.5 * sur_->y.dot(alpha_) - log_det - 0.5 * n * std::log(2.0 * M_PI);
}

std::pair<double, double> gp_posterior(const GpSurrogate& sur, const Eigen::VectorXd& x_star) {
    return GpPredictor(sur).predict(x_star);
}

namespace {

// d(LML)/d(theta) for theta = (log ls_1..d, log signal_std, log noise_std)
Eigen::VectorXd lml_gradient(const GpSurrogate& sur) {
    const int n = static_cast<int>(sur.X.rows());
    const int d = static_cast<int>(sur.length_scales.size());

    Eigen::MatrixXd K = kernel_matrix(sur);
    Eigen::MatrixXd Kn = K;
    Kn.diagonal().array() += sur.noise_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(Kn);
    double jitter = 0.0;
    while (llt.info() != Eigen::Success) {
        jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
        if (jitter > kMaxJitter) {
            throw std::runtime_error("kernel matrix not positive definite after jitter escalation");
        }
        Eigen::MatrixXd Kj = Kn;
        Kj.diagonal().array() += jitter;
        llt.compute(Kj);
    }
    const Eigen::VectorXd alpha = llt.solve(sur.y);
    const Eigen::MatrixXd K_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    // 0.5 * tr((alpha alpha^T - K^-1) dK) per hyperparameter
    const Eigen::MatrixXd W = alpha * alpha.transpose() - K_inv;

    Eigen::VectorXd grad(d + 2);
    for (int dim = 0; dim < d; ++dim) {
        Eigen::MatrixXd dK(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                const double diff = (sur.X(i, dim) - sur.X(j, dim)) / sur.length_scales[dim];
                const double dscaled = diff * diff;  // d(r^2)/d(log ls) = -2*dscaled; chain below
                double dk;
                if (sur.kernel == KernelKind::SquaredExponentialArd) {
                    dk = K(i, j) * dscaled;
                } else {
                    const double r2 = scaled_sq_distance(sur.X.row(i), sur.X.row(j), sur.length_scales);
                    const double r = std::sqrt(r2);
                    dk = 5.0 / 3.0 * sur.signal_variance * (1.0 + kSqrt5 * r) *
                         std::exp(-kSqrt5 * r) * dscaled;
                }
                dK(i, j) = dk;
                dK(j, i) = dk;
            }
        }
        grad[dim] = 0.5 * W.cwiseProduct(dK).sum();
    }
    // theta_s = log signal_std: dK/dtheta_s = 2K
    grad[d] = W.cwiseProduct(K).sum();
    // theta_n = log noise_std: dK/dtheta_n = 2*noise*I
    grad[d + 1] = sur.noise_variance * W.trace();
    return grad;
}

}  // namespace

void fit_gp_hyperparameters(GpSurrogate& sur, int iterations) {
    constexpr double kNoiseFloor = 1e-6;
    const int d = static_cast<int>(sur.length_scales.size());
    Eigen::VectorXd theta(d + 2);
    for (int i = 0; i < d; ++i) theta[i] = std::log(std::max(sur.length_scales[i], 1e-3));
    theta[d] = 0.5 * std::log(std::max(sur.signal_variance, 1e-6));
    theta[d + 1] = 0.5 * std::log(std::max(sur.noise_variance, kNoiseFloor));

    // Adam ascent in log space
    Eigen::VectorXd m = Eigen::VectorXd::Zero(d + 2);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d + 2);
    constexpr double lr = 0.1, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const auto apply_theta = [&](const Eigen::VectorXd& t) {
        for (int i = 0; i < d; ++i) sur.length_scales[i] = std::clamp(std::exp(t[i]), 1e-3, 1e3);
        sur.signal_variance = std::clamp(std::exp(2.0 * t[d]), 1e-9, 1e6);
        sur.noise_variance = std::clamp(std::exp(2.0 * t[d + 1]), kNoiseFloor, 1e3);
    };
    apply_theta(theta);

    for (int it = 1; it <= iterations; ++it) {
        const Eigen::VectorXd g = lml_gradient(sur);
        m = beta1 * m + (1.0 - beta1) * g;
        v = (beta2 * v.array() + (1.0 - beta2) * g.array().square()).matrix();
        const double bc1 = 1.0 - std::pow(beta1, it);
        const double bc2 = 1.0 - std::pow(beta2, it);
        theta.array() += lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
        apply_theta(theta);
    }
}

double expected_improvement(double mean, double variance, double best_loss) {
    if (variance < 0.0) throw std::invalid_argument("expected_improvement: negative variance");
    const double improvement = best_loss - mean;
    if (variance == 0.0) return std::max(improvement, 0.0);
    const double sigma = std::sqrt(variance);
    const double z = improvement / sigma;
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    return std::max(improvement * cdf + sigma * pdf, 0.0);
}

TrialRecord smbo_run(const meta::MetaDataset& md, int dataset_id, int budget, KernelKind kernel,
                     Rng& rng, const std::string& method_name) {
    const int n_configs = md.n_configs();
    if (budget < 1 || budget > n_configs) {
        throw std::invalid_argument("smbo budget " + std::to_string(budget) +
                                    " exceeds grid size " + std::to_string(n_configs));
    }
    if (!md.has_dataset(dataset_id)) {
        throw std::invalid_argument("unknown dataset_id: " + std::to_string(dataset_id));
    }
    const int dim = md.grid.encoded_dim();

    TrialRecord record;
    record.method = method_name;
    record.dataset_id = dataset_id;
    std::vector<char> used(n_configs, 0);

    const int n_init = std::min(3, budget);
    {
        const auto start = std::chrono::steady_clock::now();
        const std::vector<int> init = random_search(n_configs, n_init, rng);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        for (int t = 0; t < n_init; ++t) {
            const int id = init[t];
            used[id] = 1;
            record.trials.push_back(Trial{t + 1, id, md.mean_loss(dataset_id, id)});
            record.suggest_seconds.push_back(elapsed.count() / n_init);
        }
    }

    for (int t = n_init + 1; t <= budget; ++t) {
        const auto start = std::chrono::steady_clock::now();

        const int n_obs = static_cast<int>(record.trials.size());
        GpSurrogate sur;
        sur.kernel = kernel;
        sur.X.resize(n_obs, dim);
        sur.y.resize(n_obs);
        double y_mean = 0.0;
        for (int i = 0; i < n_obs; ++i) y_mean += record.trials[i].loss;
        y_mean /= n_obs;
        for (int i = 0; i < n_obs; ++i) {
            sur.X.row(i) = md.grid.encoded(record.trials[i].config_id);
            sur.y[i] = record.trials[i].loss - y_mean;  // prior mean = observed mean
        }
        const double y_std = std::sqrt(sur.y.array().square().mean());
        sur.length_scales = Eigen::VectorXd::Constant(dim, 0.5);
        sur.signal_variance = std::max(y_std * y_std, 1e-4);
        sur.noise_variance = std::max(1e-2 * sur.signal_variance, 1e-6);
        fit_gp_hyperparameters(sur);
        const GpPredictor predictor(sur);

        double best_centered = std::numeric_limits<double>::infinity();
        for (const auto& trial : record.trials) {
            best_centered = std::min(best_centered, trial.loss - y_mean);
        }

        int pick = -1;
        double pick_ei = -1.0;
        for (int id = 0; id < n_configs; ++id) {
            if (used[id]) continue;
            const auto [mean, variance] = predictor.predict(md.grid.encoded(id));
            const double ei = expected_improvement(mean, variance, best_centered);
            if (ei > pick_ei) {
                pick_ei = ei;
                pick = id;
            }
        }
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

        used[pick] = 1;
        record.trials.push_back(Trial{t, pick, md.mean_loss(dataset_id, pick)});
        record.suggest_seconds.push_back(elapsed.count());
    }
    return record;
}

}  // namespace hyprl::baselines
