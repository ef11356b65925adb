#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "hyprl/environment.hpp"

namespace hyprl::nn {

// Single LSTM cell. Weight matrices act on [h_prev; x], so each is
// N_h x (N_h + N_x).
struct LstmParams {
    Eigen::MatrixXd W_f, W_i, W_o, W_c;
    Eigen::VectorXd b_f, b_i, b_o, b_c;

    int hidden_units() const { return static_cast<int>(W_f.rows()); }
    int input_dim() const { return static_cast<int>(W_f.cols() - W_f.rows()); }
};

struct DenseParams {
    Eigen::MatrixXd W;
    Eigen::VectorXd b;
};

// Q network: metafeature projection W0 initializes the LSTM hidden state,
// the LSTM consumes the (encoded config, reward) history, and a ReLU dense
// layer plus linear head map the final hidden state to one Q value per
// action.
struct QNetworkParams {
    Eigen::MatrixXd W0;  // N_h x metafeature_dim
    LstmParams lstm;
    DenseParams dense;  // N_layer x N_h, ReLU
    DenseParams head;   // n_actions x N_layer, linear

    int hidden_units() const { return lstm.hidden_units(); }
    int input_dim() const { return lstm.input_dim(); }
    int layer_units() const { return static_cast<int>(dense.W.rows()); }
    int n_actions() const { return static_cast<int>(head.W.rows()); }
    int metafeature_dim() const { return static_cast<int>(W0.cols()); }
};

// Visits every parameter array in the fixed checkpoint order.
template <class Params, class Fn>
void for_each_array(Params& p, Fn&& fn) {
    fn("W0", p.W0);
    fn("lstm.W_f", p.lstm.W_f);
    fn("lstm.W_i", p.lstm.W_i);
    fn("lstm.W_o", p.lstm.W_o);
    fn("lstm.W_c", p.lstm.W_c);
    fn("lstm.b_f", p.lstm.b_f);
    fn("lstm.b_i", p.lstm.b_i);
    fn("lstm.b_o", p.lstm.b_o);
    fn("lstm.b_c", p.lstm.b_c);
    fn("dense.W", p.dense.W);
    fn("dense.b", p.dense.b);
    fn("head.W", p.head.W);
    fn("head.b", p.head.b);
}

QNetworkParams zeros_like(const QNetworkParams& p);

// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per array, seeded
QNetworkParams init_q_network(int hidden_units, int input_dim, int layer_units, int n_actions,
                              int metafeature_dim, uint64_t seed);

// The five gate equations, evaluated in order f, i, o, c, h. Returns (h, c).
std::pair<Eigen::VectorXd, Eigen::VectorXd> lstm_cell_forward(const Eigen::VectorXd& x,
                                                              const Eigen::VectorXd& h_prev,
                                                              const Eigen::VectorXd& c_prev,
                                                              const LstmParams& p);

// h0 = W0 * d (c0 is zero)
Eigen::VectorXd init_hidden(const Eigen::VectorXd& d, const Eigen::MatrixXd& W0);

// Unrolls the LSTM over the state history in chronological order; each input
// is concat(encoded config, reward). Returns the Q vector over all actions.
Eigen::VectorXd q_forward(const env::EnvState& state, const QNetworkParams& p);

struct QTrainExample {
    const env::EnvState* state = nullptr;
    int action = 0;
    double target = 0.0;
};

// d/dtheta of sum_i (Q(s_i, a_i) - target_i)^2, backpropagated through the
// head, the dense layer, the LSTM unroll, and W0.
QNetworkParams q_gradients(std::span<const QTrainExample> batch, const QNetworkParams& p);

double squared_error(std::span<const QTrainExample> batch, const QNetworkParams& p);

struct AdamState {
    QNetworkParams first_moment;
    QNetworkParams second_moment;
    long step = 0;
};

AdamState make_adam_state(const QNetworkParams& p);

// Bias-corrected Adam with beta1=0.9, beta2=0.999, eps=1e-8.
void adam_step(QNetworkParams& p, const QNetworkParams& grads, AdamState& opt, double lr);

long param_count(const QNetworkParams& p);

// Binary checkpoint: magic, version, shape header, then the arrays in
// for_each_array order followed by the metafeature scaler (mean, std).
// Column-major doubles, native byte order; round trip is exact.
struct Checkpoint {
    QNetworkParams params;
    Eigen::VectorXd scaler_mean;
    Eigen::VectorXd scaler_std;
};

void save_checkpoint(const std::filesystem::path& path, const QNetworkParams& p,
                     const Eigen::VectorXd& scaler_mean, const Eigen::VectorXd& scaler_std);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hyprl::nn
