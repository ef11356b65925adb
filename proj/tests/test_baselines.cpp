#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "hyprl/baselines.hpp"

using namespace hyprl;
using namespace hyprl::baselines;

namespace {

GpSurrogate make_surrogate(KernelKind kind, int n, int d, Rng& rng, double noise = 1e-6) {
    GpSurrogate sur;
    sur.kernel = kind;
    sur.X.resize(n, d);
    sur.y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) sur.X(i, j) = rng.uniform();
        sur.y[i] = rng.normal() * 0.3;
    }
    sur.length_scales = Eigen::VectorXd::Constant(d, 0.7);
    sur.signal_variance = 0.8;
    sur.noise_variance = noise;
    return sur;
}

// quadratic loss surface over a 1-d grid of 20 points
meta::MetaDataset quadratic_md() {
    std::string spec = "x:scalar:";
    for (int i = 0; i < 20; ++i) spec += (i ? "," : "") + std::to_string(i);
    meta::MetaDataset md;
    md.grid = meta::encode_grid(meta::parse_grid_spec(spec));
    md.datasets = {{0, meta::MetafeatureVector::Constant(1.0)}};
    Eigen::MatrixXd resp(20, 1);
    for (int c = 0; c < 20; ++c) {
        const double x = c / 19.0;
        resp(c, 0) = 0.1 + (x - 0.65) * (x - 0.65);  // min near config 12-13
    }
    md.responses.push_back(resp);
    md.splits.push_back({{0}, {0}});
    return md;
}

}  // namespace

TEST_CASE("random search: full budget is a permutation, seeded reproducible") {
    Rng a(4), b(4);
    const auto ids1 = random_search(10, 10, a);
    const auto ids2 = random_search(10, 10, b);
    CHECK(ids1 == ids2);
    std::set<int> seen(ids1.begin(), ids1.end());
    CHECK(seen.size() == 10);
    CHECK_THROWS_AS(random_search(4, 5, a), std::invalid_argument);
}

TEST_CASE("random search: budget-1 frequencies are uniform") {
    std::array<int, 4> counts{};
    for (int s = 0; s < 10000; ++s) {
        Rng rng(1000 + s);
        counts[random_search(4, 1, rng)[0]] += 1;
    }
    for (int c : counts) {
        CHECK(c / 10000.0 > 0.23);
        CHECK(c / 10000.0 < 0.27);
    }
}

TEST_CASE("noiseless single observation interpolates") {
    for (KernelKind kind : {KernelKind::SquaredExponentialArd, KernelKind::Matern52}) {
        GpSurrogate sur;
        sur.kernel = kind;
        sur.X = Eigen::MatrixXd::Constant(1, 2, 0.3);
        sur.y = Eigen::VectorXd::Constant(1, 0.42);
        sur.length_scales = Eigen::VectorXd::Constant(2, 0.5);
        sur.signal_variance = 1.0;
        sur.noise_variance = 0.0;
        const auto [mean, var] = gp_posterior(sur, Eigen::VectorXd::Constant(2, 0.3));
        CHECK(mean == doctest::Approx(0.42).epsilon(1e-9));
        CHECK(var == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("far from the data the posterior reverts to the prior") {
    Rng rng(8);
    for (KernelKind kind : {KernelKind::SquaredExponentialArd, KernelKind::Matern52}) {
        const GpSurrogate sur = make_surrogate(kind, 5, 3, rng);
        const auto [mean, var] = gp_posterior(sur, Eigen::VectorXd::Constant(3, 1e6));
        CHECK(std::abs(mean) < 1e-6);
        CHECK(var == doctest::Approx(sur.signal_variance).epsilon(1e-9));
    }
}

TEST_CASE("posterior matches a dense-solve oracle") {
    Rng rng(21);
    for (KernelKind kind : {KernelKind::SquaredExponentialArd, KernelKind::Matern52}) {
        for (int n : {3, 7, 10}) {
            const GpSurrogate sur = make_surrogate(kind, n, 4, rng, 1e-4);
            Eigen::VectorXd x_star(4);
            for (int j = 0; j < 4; ++j) x_star[j] = rng.uniform();

            // independent dense solve with full-pivot LU
            Eigen::MatrixXd K(n, n);
            Eigen::VectorXd k_star(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    K(i, j) = kernel_value(kind, sur.X.row(i), sur.X.row(j), sur.length_scales,
                                           sur.signal_variance);
                }
                K(i, i) += sur.noise_variance;
                k_star[i] = kernel_value(kind, sur.X.row(i), x_star, sur.length_scales,
                                         sur.signal_variance);
            }
            const Eigen::MatrixXd K_inv = K.fullPivLu().inverse();
            const double mean_oracle = k_star.dot(K_inv * sur.y);
            const double var_oracle = sur.signal_variance - k_star.dot(K_inv * k_star);

            const auto [mean, var] = gp_posterior(sur, x_star);
            CHECK(mean == doctest::Approx(mean_oracle).epsilon(1e-8));
            CHECK(var == doctest::Approx(var_oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("posterior mean interpolates noiseless observations") {
    Rng rng(31);
    const GpSurrogate sur = make_surrogate(KernelKind::SquaredExponentialArd, 6, 3, rng, 0.0);
    const GpPredictor predictor(sur);
    for (int i = 0; i < 6; ++i) {
        const auto [mean, var] = predictor.predict(sur.X.row(i));
        CHECK(mean == doctest::Approx(sur.y[i]).epsilon(1e-6));
    }
}

TEST_CASE("posterior variance never exceeds the prior variance") {
    Rng rng(37);
    for (KernelKind kind : {KernelKind::SquaredExponentialArd, KernelKind::Matern52}) {
        const GpSurrogate sur = make_surrogate(kind, 8, 3, rng, 1e-3);
        const GpPredictor predictor(sur);
        for (int k = 0; k < 200; ++k) {
            Eigen::VectorXd x(3);
            for (int j = 0; j < 3; ++j) x[j] = 2.0 * rng.uniform() - 0.5;
            const auto [mean, var] = predictor.predict(x);
            CHECK(var >= 0.0);
            CHECK(var <= sur.signal_variance + sur.noise_variance + 1e-9);
        }
    }
}

TEST_CASE("kernels stay positive definite on random inputs") {
    Rng rng(43);
    for (KernelKind kind : {KernelKind::SquaredExponentialArd, KernelKind::Matern52}) {
        for (int trial = 0; trial < 10; ++trial) {
            GpSurrogate sur = make_surrogate(kind, 12, 5, rng, 0.0);
            // duplicated rows stress conditioning; jitter must stay <= 1e-6
            sur.X.row(11) = sur.X.row(0);
            Eigen::MatrixXd K = kernel_matrix(sur);
            K.diagonal().array() += 1e-6;
            Eigen::LLT<Eigen::MatrixXd> llt(K);
            CHECK(llt.info() == Eigen::Success);
        }
    }
}

TEST_CASE("expected improvement closed form") {
    CHECK(expected_improvement(0.5, 0.0, 0.5) == 0.0);
    CHECK(expected_improvement(0.7, 0.0, 0.5) == 0.0);
    CHECK(expected_improvement(0.3, 0.0, 0.5) == doctest::Approx(0.2));
    // mu = best, sigma = 1 -> phi(0) = 1/sqrt(2 pi)
    CHECK(expected_improvement(0.5, 1.0, 0.5) == doctest::Approx(0.39894).epsilon(1e-4));
    CHECK_THROWS_AS(expected_improvement(0.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("EI is nondecreasing in sigma when mean >= best") {
    Rng rng(47);
    for (int trial = 0; trial < 200; ++trial) {
        const double best = rng.normal();
        const double mean = best + rng.uniform();  // mean >= best
        const double s1 = rng.uniform() * 2.0;
        const double s2 = s1 + rng.uniform();
        CHECK(expected_improvement(mean, s2 * s2, best) >=
              expected_improvement(mean, s1 * s1, best) - 1e-12);
    }
}

TEST_CASE("EI at evaluated points of a noiseless GP is ~0") {
    Rng rng(53);
    const GpSurrogate sur = make_surrogate(KernelKind::SquaredExponentialArd, 6, 3, rng, 0.0);
    const GpPredictor predictor(sur);
    const double best = sur.y.minCoeff();
    for (int i = 0; i < 6; ++i) {
        const auto [mean, var] = predictor.predict(sur.X.row(i));
        CHECK(expected_improvement(mean, var, best) <= 1e-9);
    }
}

TEST_CASE("marginal likelihood ascent improves the fit") {
    Rng rng(59);
    GpSurrogate sur = make_surrogate(KernelKind::SquaredExponentialArd, 10, 3, rng, 1e-3);
    const double before = GpPredictor(sur).log_marginal_likelihood();
    fit_gp_hyperparameters(sur, 50);
    const double after = GpPredictor(sur).log_marginal_likelihood();
    CHECK(after >= before);
    CHECK(sur.noise_variance >= 1e-6);  // floor holds
}

TEST_CASE("smbo first three trials equal random search") {
    const auto md = quadratic_md();
    Rng a(71), b(71);
    const TrialRecord rec = smbo_run(md, 0, 3, KernelKind::SquaredExponentialArd, a);
    const auto rs = random_search(md.n_configs(), 3, b);
    REQUIRE(rec.trials.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(rec.trials[i].config_id == rs[i]);
}

TEST_CASE("smbo trials are distinct") {
    const auto md = quadratic_md();
    for (KernelKind kind : {KernelKind::SquaredExponentialArd, KernelKind::Matern52}) {
        Rng rng(73);
        const TrialRecord rec = smbo_run(md, 0, 12, kind, rng);
        std::set<int> ids;
        for (const auto& trial : rec.trials) CHECK(ids.insert(trial.config_id).second);
    }
}

TEST_CASE("smbo beats the random-search median on a smooth surface") {
    const auto md = quadratic_md();
    const int budget = 8;
    std::vector<double> rs_best;
    double smbo_total = 0.0;
    const int n_seeds = 20;
    for (int s = 0; s < n_seeds; ++s) {
        Rng rng(100 + s);
        const TrialRecord rec = smbo_run(md, 0, budget, KernelKind::SquaredExponentialArd, rng);
        smbo_total += rec.best_loss_at(budget);
        Rng rs_rng(100 + s);
        const auto ids = random_search(md.n_configs(), budget, rs_rng);
        double best = 1e9;
        for (int id : ids) best = std::min(best, md.mean_loss(0, id));
        rs_best.push_back(best);
    }
    std::sort(rs_best.begin(), rs_best.end());
    const double rs_median = 0.5 * (rs_best[9] + rs_best[10]);
    CHECK(smbo_total / n_seeds <= rs_median + 1e-12);
}
