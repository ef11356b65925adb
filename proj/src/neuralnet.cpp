#include "hyprl/neuralnet.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hyprl/rng.hpp"

namespace hyprl::nn {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

void check_state(const env::EnvState& state, const QNetworkParams& p) {
    if (state.history.empty()) throw std::invalid_argument("state history is empty");
    if (state.static_features.size() != p.metafeature_dim()) {
        throw std::invalid_argument("static feature dimension " +
                                    std::to_string(state.static_features.size()) +
                                    " does not match W0 columns " +
                                    std::to_string(p.metafeature_dim()));
    }
    for (const auto& [enc, r] : state.history) {
        if (static_cast<int>(enc.size()) + 1 != p.input_dim()) {
            throw std::invalid_argument("history entry dimension " + std::to_string(enc.size() + 1) +
                                        " does not match LSTM input dimension " +
                                        std::to_string(p.input_dim()));
        }
    }
}

struct StepCache {
    Eigen::VectorXd x;       // [enc; reward]
    Eigen::VectorXd concat;  // [h_prev; x]
    Eigen::VectorXd f, i, o, g;  // gate activations; g = tanh(candidate)
    Eigen::VectorXd c, tanh_c, h;
};

struct ForwardCache {
    Eigen::VectorXd h0, c0;
    std::vector<StepCache> steps;
    Eigen::VectorXd dense_pre, dense_act;
    Eigen::VectorXd q;
};

ForwardCache forward_cached(const env::EnvState& state, const QNetworkParams& p) {
    check_state(state, p);
    const int n_h = p.hidden_units();
    const int n_x = p.input_dim();

    ForwardCache cache;
    cache.h0 = init_hidden(state.static_features, p.W0);
    cache.c0 = Eigen::VectorXd::Zero(n_h);

    const Eigen::VectorXd* h_prev = &cache.h0;
    const Eigen::VectorXd* c_prev = &cache.c0;
    cache.steps.reserve(state.history.size());
    for (const auto& [enc, reward] : state.history) {
        StepCache s;
        s.x.resize(n_x);
        s.x.head(enc.size()) = enc;
        s.x[n_x - 1] = reward;
        s.concat.resize(n_h + n_x);
        s.concat.head(n_h) = *h_prev;
        s.concat.tail(n_x) = s.x;
        s.f = sigmoid(p.lstm.W_f * s.concat + p.lstm.b_f);
        s.i = sigmoid(p.lstm.W_i * s.concat + p.lstm.b_i);
        s.o = sigmoid(p.lstm.W_o * s.concat + p.lstm.b_o);
        s.g = (p.lstm.W_c * s.concat + p.lstm.b_c).array().tanh().matrix();
        s.c = s.f.cwiseProduct(*c_prev) + s.i.cwiseProduct(s.g);
        s.tanh_c = s.c.array().tanh().matrix();
        s.h = s.o.cwiseProduct(s.tanh_c);
        cache.steps.push_back(std::move(s));
        h_prev = &cache.steps.back().h;
        c_prev = &cache.steps.back().c;
    }

    cache.dense_pre = p.dense.W * *h_prev + p.dense.b;
    cache.dense_act = cache.dense_pre.cwiseMax(0.0);
    cache.q = p.head.W * cache.dense_act + p.head.b;
    return cache;
}

// Accumulates one example's gradient contribution into `grads`.
void backward(const env::EnvState& state, int action, double target, const QNetworkParams& p,
              const ForwardCache& cache, QNetworkParams& grads) {
    const int n_h = p.hidden_units();
    if (action < 0 || action >= p.n_actions()) {
        throw std::invalid_argument("action out of range: " + std::to_string(action));
    }

    const double dq = 2.0 * (cache.q[action] - target);

    // head (only the taken action's row receives gradient)
    grads.head.W.row(action) += dq * cache.dense_act.transpose();
    grads.head.b[action] += dq;
    Eigen::VectorXd d_act = dq * p.head.W.row(action).transpose();

    // dense ReLU layer
    Eigen::VectorXd d_pre =
        d_act.cwiseProduct((cache.dense_pre.array() > 0.0).cast<double>().matrix());
    const Eigen::VectorXd& h_last = cache.steps.back().h;
    grads.dense.W += d_pre * h_last.transpose();
    grads.dense.b += d_pre;

    // BPTT
    Eigen::VectorXd dh = p.dense.W.transpose() * d_pre;
    Eigen::VectorXd dc = Eigen::VectorXd::Zero(n_h);
    for (int t = static_cast<int>(cache.steps.size()) - 1; t >= 0; --t) {
        const StepCache& s = cache.steps[t];
        const Eigen::VectorXd& c_prev = t > 0 ? cache.steps[t - 1].c : cache.c0;

        const Eigen::VectorXd d_o = dh.cwiseProduct(s.tanh_c);
        dc += dh.cwiseProduct(s.o)
                  .cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());

        const Eigen::VectorXd d_f = dc.cwiseProduct(c_prev);
        const Eigen::VectorXd d_i = dc.cwiseProduct(s.g);
        const Eigen::VectorXd d_g = dc.cwiseProduct(s.i);

        const Eigen::VectorXd dz_f =
            d_f.cwiseProduct(s.f).cwiseProduct((1.0 - s.f.array()).matrix());
        const Eigen::VectorXd dz_i =
            d_i.cwiseProduct(s.i).cwiseProduct((1.0 - s.i.array()).matrix());
        const Eigen::VectorXd dz_o =
            d_o.cwiseProduct(s.o).cwiseProduct((1.0 - s.o.array()).matrix());
        const Eigen::VectorXd dz_c = d_g.cwiseProduct((1.0 - s.g.array().square()).matrix());

        grads.lstm.W_f += dz_f * s.concat.transpose();
        grads.lstm.W_i += dz_i * s.concat.transpose();
        grads.lstm.W_o += dz_o * s.concat.transpose();
        grads.lstm.W_c += dz_c * s.concat.transpose();
        grads.lstm.b_f += dz_f;
        grads.lstm.b_i += dz_i;
        grads.lstm.b_o += dz_o;
        grads.lstm.b_c += dz_c;

        const Eigen::VectorXd d_concat = p.lstm.W_f.transpose() * dz_f +
                                         p.lstm.W_i.transpose() * dz_i +
                                         p.lstm.W_o.transpose() * dz_o +
                                         p.lstm.W_c.transpose() * dz_c;
        dh = d_concat.head(n_h);
        dc = dc.cwiseProduct(s.f);
    }

    grads.W0 += dh * state.static_features.transpose();
}

}  // namespace

QNetworkParams zeros_like(const QNetworkParams& p) {
    QNetworkParams z = p;
    for_each_array(z, [](const char*, auto& a) { a.setZero(); });
    return z;
}

QNetworkParams init_q_network(int hidden_units, int input_dim, int layer_units, int n_actions,
                              int metafeature_dim, uint64_t seed) {
    if (hidden_units < 1 || input_dim < 1 || layer_units < 1 || n_actions < 1 ||
        metafeature_dim < 1) {
        throw std::invalid_argument("all network dimensions must be >= 1");
    }
    QNetworkParams p;
    p.W0.resize(hidden_units, metafeature_dim);
    const int concat = hidden_units + input_dim;
    for (auto* w : {&p.lstm.W_f, &p.lstm.W_i, &p.lstm.W_o, &p.lstm.W_c}) {
        w->resize(hidden_units, concat);
    }
    for (auto* b : {&p.lstm.b_f, &p.lstm.b_i, &p.lstm.b_o, &p.lstm.b_c}) {
        b->resize(hidden_units);
    }
    p.dense.W.resize(layer_units, hidden_units);
    p.dense.b.resize(layer_units);
    p.head.W.resize(n_actions, layer_units);
    p.head.b.resize(n_actions);

    Rng rng(seed);
    const auto fill = [&rng](auto& array, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index i = 0; i < array.size(); ++i) {
            array.data()[i] = bound * (2.0 * rng.uniform() - 1.0);
        }
    };
    fill(p.W0, metafeature_dim);
    for (auto* w : {&p.lstm.W_f, &p.lstm.W_i, &p.lstm.W_o, &p.lstm.W_c}) fill(*w, concat);
    for (auto* b : {&p.lstm.b_f, &p.lstm.b_i, &p.lstm.b_o, &p.lstm.b_c}) fill(*b, concat);
    fill(p.dense.W, hidden_units);
    fill(p.dense.b, hidden_units);
    fill(p.head.W, layer_units);
    fill(p.head.b, layer_units);
    return p;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> lstm_cell_forward(const Eigen::VectorXd& x,
                                                              const Eigen::VectorXd& h_prev,
                                                              const Eigen::VectorXd& c_prev,
                                                              const LstmParams& p) {
    const int n_h = p.hidden_units();
    const int n_x = p.input_dim();
    if (x.size() != n_x || h_prev.size() != n_h || c_prev.size() != n_h) {
        throw std::invalid_argument("lstm_cell_forward: shape mismatch");
    }
    Eigen::VectorXd concat(n_h + n_x);
    concat << h_prev, x;
    const Eigen::VectorXd f = sigmoid(p.W_f * concat + p.b_f);
    const Eigen::VectorXd i = sigmoid(p.W_i * concat + p.b_i);
    const Eigen::VectorXd o = sigmoid(p.W_o * concat + p.b_o);
    const Eigen::VectorXd c =
        f.cwiseProduct(c_prev) + i.cwiseProduct((p.W_c * concat + p.b_c).array().tanh().matrix());
    const Eigen::VectorXd h = o.cwiseProduct(c.array().tanh().matrix());
    return {h, c};
}

Eigen::VectorXd init_hidden(const Eigen::VectorXd& d, const Eigen::MatrixXd& W0) {
    if (d.size() != W0.cols()) throw std::invalid_argument("init_hidden: shape mismatch");
    return W0 * d;
}

Eigen::VectorXd q_forward(const env::EnvState& state, const QNetworkParams& p) {
    return forward_cached(state, p).q;
}

QNetworkParams q_gradients(std::span<const QTrainExample> batch, const QNetworkParams& p) {
    if (batch.empty()) throw std::invalid_argument("q_gradients: empty batch");
    QNetworkParams grads = zeros_like(p);
    for (const auto& ex : batch) {
        if (!std::isfinite(ex.target)) throw std::invalid_argument("q_gradients: non-finite target");
        const ForwardCache cache = forward_cached(*ex.state, p);
        backward(*ex.state, ex.action, ex.target, p, cache, grads);
    }
    return grads;
}

double squared_error(std::span<const QTrainExample> batch, const QNetworkParams& p) {
    double loss = 0.0;
    for (const auto& ex : batch) {
        const double err = q_forward(*ex.state, p)[ex.action] - ex.target;
        loss += err * err;
    }
    return loss;
}

AdamState make_adam_state(const QNetworkParams& p) {
    return AdamState{zeros_like(p), zeros_like(p), 0};
}

void adam_step(QNetworkParams& p, const QNetworkParams& grads, AdamState& opt, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    opt.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(opt.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(opt.step));

    // zip the parameter, gradient and moment arrays by flat view
    std::vector<Eigen::Map<Eigen::VectorXd>> pv, gv, mv, vv;
    const auto collect = [](auto& params, std::vector<Eigen::Map<Eigen::VectorXd>>& out) {
        for_each_array(params, [&out](const char*, auto& a) {
            out.emplace_back(const_cast<double*>(a.data()), a.size());
        });
    };
    collect(p, pv);
    collect(const_cast<QNetworkParams&>(grads), gv);
    collect(opt.first_moment, mv);
    collect(opt.second_moment, vv);

    for (size_t k = 0; k < pv.size(); ++k) {
        if (pv[k].size() != gv[k].size()) throw std::invalid_argument("adam_step: shape mismatch");
        mv[k] = beta1 * mv[k] + (1.0 - beta1) * gv[k];
        vv[k] = (beta2 * vv[k].array() + (1.0 - beta2) * gv[k].array().square()).matrix();
        pv[k].array() -= lr * (mv[k].array() / bc1) / ((vv[k].array() / bc2).sqrt() + eps);
    }
}

long param_count(const QNetworkParams& p) {
    long count = 0;
    for_each_array(const_cast<QNetworkParams&>(p),
                   [&count](const char*, auto& a) { count += static_cast<long>(a.size()); });
    return count;
}

// ---------------------------------------------------------------------------
// checkpoint io

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'P', 'R', 'L', 'Q', 'N', '\0'};
constexpr uint32_t kFormatVersion = 1;

template <class T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint truncated");
    return v;
}

void write_array(std::ostream& out, const char* name, const double* data, uint64_t rows,
                 uint64_t cols) {
    const uint32_t len = static_cast<uint32_t>(std::strlen(name));
    write_pod(out, len);
    out.write(name, len);
    write_pod(out, rows);
    write_pod(out, cols);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(rows * cols * sizeof(double)));
}

void read_array(std::istream& in, const char* expected_name, double* data, uint64_t rows,
                uint64_t cols) {
    const uint32_t len = read_pod<uint32_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in || name != expected_name) {
        throw std::runtime_error("checkpoint array order mismatch: expected '" +
                                 std::string(expected_name) + "', found '" + name + "'");
    }
    const uint64_t r = read_pod<uint64_t>(in);
    const uint64_t c = read_pod<uint64_t>(in);
    if (r != rows || c != cols) {
        throw std::runtime_error("checkpoint array shape mismatch for '" + name + "'");
    }
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint truncated");
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const QNetworkParams& p,
                     const Eigen::VectorXd& scaler_mean, const Eigen::VectorXd& scaler_std) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kFormatVersion);
    write_pod(out, static_cast<int32_t>(p.hidden_units()));
    write_pod(out, static_cast<int32_t>(p.input_dim()));
    write_pod(out, static_cast<int32_t>(p.layer_units()));
    write_pod(out, static_cast<int32_t>(p.n_actions()));
    write_pod(out, static_cast<int32_t>(p.metafeature_dim()));
    for_each_array(const_cast<QNetworkParams&>(p), [&out](const char* name, auto& a) {
        write_array(out, name, a.data(), static_cast<uint64_t>(a.rows()),
                    static_cast<uint64_t>(a.cols()));
    });
    write_array(out, "scaler_mean", scaler_mean.data(), static_cast<uint64_t>(scaler_mean.size()), 1);
    write_array(out, "scaler_std", scaler_std.data(), static_cast<uint64_t>(scaler_std.size()), 1);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("not a checkpoint file: " + path.string());
    }
    if (read_pod<uint32_t>(in) != kFormatVersion) {
        throw std::runtime_error("unsupported checkpoint version in " + path.string());
    }
    const int n_h = read_pod<int32_t>(in);
    const int n_x = read_pod<int32_t>(in);
    const int n_layer = read_pod<int32_t>(in);
    const int n_actions = read_pod<int32_t>(in);
    const int meta_dim = read_pod<int32_t>(in);
    if (n_h < 1 || n_x < 1 || n_layer < 1 || n_actions < 1 || meta_dim < 1) {
        throw std::runtime_error("invalid checkpoint header in " + path.string());
    }

    Checkpoint ckpt;
    ckpt.params = init_q_network(n_h, n_x, n_layer, n_actions, meta_dim, 0);
    for_each_array(ckpt.params, [&in](const char* name, auto& a) {
        read_array(in, name, a.data(), static_cast<uint64_t>(a.rows()),
                   static_cast<uint64_t>(a.cols()));
    });
    ckpt.scaler_mean.resize(meta_dim);
    ckpt.scaler_std.resize(meta_dim);
    read_array(in, "scaler_mean", ckpt.scaler_mean.data(), static_cast<uint64_t>(meta_dim), 1);
    read_array(in, "scaler_std", ckpt.scaler_std.data(), static_cast<uint64_t>(meta_dim), 1);
    return ckpt;
}

}  // namespace hyprl::nn
