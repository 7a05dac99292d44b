#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pdm/detail/matrix.hpp"
#include "pdm/detail/rng.hpp"
#include "pdm/detail/zscore.hpp"

namespace pdm {

struct mlp_config {
    int epochs = 150;
    int batch = 32;
    double learning_rate = 1e-3;
    double dropout = 0.25;  // applied to the last two hidden layers
    bool logistic = true;   // cross-entropy on the logit; false trains squared error
    std::uint64_t seed = 0;
};

namespace detail {

// Parameter block offsets for the fixed 128-64-128 architecture with one
// sigmoid output. Weights are stored row-major, each layer as (out x in).
struct mlp_layout {
    int d = 0;
    static constexpr int h1 = 128, h2 = 64, h3 = 128;

    std::size_t w1() const { return 0; }
    std::size_t b1() const { return w1() + static_cast<std::size_t>(h1) * d; }
    std::size_t w2() const { return b1() + h1; }
    std::size_t b2() const { return w2() + static_cast<std::size_t>(h2) * h1; }
    std::size_t w3() const { return b2() + h2; }
    std::size_t b3() const { return w3() + static_cast<std::size_t>(h3) * h2; }
    std::size_t w4() const { return b3() + h3; }
    std::size_t b4() const { return w4() + h3; }
    std::size_t total() const { return b4() + 1; }
};

using erow_mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Batch loss, and the gradient when grad is non-null. Dropout masks carry the
// inverted-dropout scaling (0 or 1/keep) and may be empty to disable dropout;
// forward and backward share them so the gradient matches the sampled network.
inline double mlp_loss_grad(const mlp_layout& L, bool logistic, const std::vector<double>& params,
                            const matrix& Xb, const std::vector<double>& yb,
                            const std::vector<double>& mask2, const std::vector<double>& mask3,
                            std::vector<double>* grad) {
    const auto B = static_cast<Eigen::Index>(Xb.rows());
    const auto d = static_cast<Eigen::Index>(L.d);
    if (Xb.cols() != static_cast<std::size_t>(L.d) || Xb.rows() != yb.size())
        throw std::invalid_argument("mlp: batch shape mismatch");

    using cmap = Eigen::Map<const erow_mat>;
    using cvec = Eigen::Map<const Eigen::VectorXd>;
    const double* p = params.data();
    cmap X(Xb.data().data(), B, d);
    cmap W1(p + L.w1(), L.h1, d), W2(p + L.w2(), L.h2, L.h1), W3(p + L.w3(), L.h3, L.h2),
        W4(p + L.w4(), 1, L.h3);
    cvec b1(p + L.b1(), L.h1), b2(p + L.b2(), L.h2), b3(p + L.b3(), L.h3);
    const double b4 = params[L.b4()];

    erow_mat Z1 = (X * W1.transpose()).rowwise() + b1.transpose();
    erow_mat A1 = Z1.cwiseMax(0.0);
    erow_mat Z2 = (A1 * W2.transpose()).rowwise() + b2.transpose();
    erow_mat A2 = Z2.cwiseMax(0.0);
    if (!mask2.empty()) A2 = A2.cwiseProduct(cmap(mask2.data(), B, L.h2));
    erow_mat Z3 = (A2 * W3.transpose()).rowwise() + b3.transpose();
    erow_mat A3 = Z3.cwiseMax(0.0);
    if (!mask3.empty()) A3 = A3.cwiseProduct(cmap(mask3.data(), B, L.h3));
    Eigen::VectorXd z = A3 * W4.transpose();
    z.array() += b4;

    cvec y(yb.data(), B);
    double loss = 0.0;
    Eigen::VectorXd dz(B);
    if (logistic) {
        // max(z,0) - z*y + log1p(exp(-|z|)) never overflows
        loss = (z.array().max(0.0) - z.array() * y.array() +
                (-z.array().abs()).exp().log1p())
                   .mean();
        if (grad)
            dz = (z.unaryExpr([](double v) {
                     return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                     : std::exp(v) / (1.0 + std::exp(v));
                 }) -
                  y) /
                 static_cast<double>(B);
    } else {
        Eigen::VectorXd s = z.unaryExpr([](double v) {
            return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        });
        loss = (s - y).squaredNorm() / static_cast<double>(B);
        if (grad)
            dz = 2.0 * (s - y).cwiseProduct(s).cwiseProduct(
                     (Eigen::VectorXd::Ones(B) - s)) /
                 static_cast<double>(B);
    }
    if (!grad) return loss;

    grad->assign(params.size(), 0.0);
    double* g = grad->data();
    using map = Eigen::Map<erow_mat>;
    using vmap = Eigen::Map<Eigen::VectorXd>;
    map gW1(g + L.w1(), L.h1, d), gW2(g + L.w2(), L.h2, L.h1), gW3(g + L.w3(), L.h3, L.h2),
        gW4(g + L.w4(), 1, L.h3);
    vmap gb1(g + L.b1(), L.h1), gb2(g + L.b2(), L.h2), gb3(g + L.b3(), L.h3);

    gW4 = dz.transpose() * A3;
    (*grad)[L.b4()] = dz.sum();
    erow_mat dA3 = dz * W4;
    if (!mask3.empty()) dA3 = dA3.cwiseProduct(cmap(mask3.data(), B, L.h3));
    erow_mat dZ3 = dA3.cwiseProduct((Z3.array() > 0.0).cast<double>().matrix());
    gW3 = dZ3.transpose() * A2;
    gb3 = dZ3.colwise().sum();
    erow_mat dA2 = dZ3 * W3;
    if (!mask2.empty()) dA2 = dA2.cwiseProduct(cmap(mask2.data(), B, L.h2));
    erow_mat dZ2 = dA2.cwiseProduct((Z2.array() > 0.0).cast<double>().matrix());
    gW2 = dZ2.transpose() * A1;
    gb2 = dZ2.colwise().sum();
    erow_mat dA1 = dZ2 * W2;
    erow_mat dZ1 = dA1.cwiseProduct((Z1.array() > 0.0).cast<double>().matrix());
    gW1 = dZ1.transpose() * X;
    gb1 = dZ1.colwise().sum();
    return loss;
}

}  // namespace detail

struct mlp_model {
    mlp_config config;
    detail::zscore scaler;
    detail::mlp_layout layout;
    std::vector<double> params;
};

struct adam_state {
    std::vector<double> m, v;
    long t = 0;

    explicit adam_state(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One minibatch update: draw dropout masks, evaluate loss and gradient, apply
// a bias-corrected Adam step. Returns the batch loss before the update.
inline double mlp_train_step(mlp_model& model, adam_state& opt, const matrix& Xb,
                             const std::vector<double>& yb, rng& r) {
    const std::size_t B = Xb.rows();
    std::vector<double> mask2, mask3;
    const double rate = model.config.dropout;
    if (rate > 0.0) {
        const double keep = 1.0 - rate;
        mask2.resize(B * detail::mlp_layout::h2);
        for (auto& v : mask2) v = r.uniform01() >= rate ? 1.0 / keep : 0.0;
        mask3.resize(B * detail::mlp_layout::h3);
        for (auto& v : mask3) v = r.uniform01() >= rate ? 1.0 / keep : 0.0;
    }
    std::vector<double> grad;
    const double loss = detail::mlp_loss_grad(model.layout, model.config.logistic, model.params,
                                              Xb, yb, mask2, mask3, &grad);
    if (!std::isfinite(loss))
        throw std::runtime_error("mlp: training diverged (non-finite batch loss)");

    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++opt.t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(opt.t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(opt.t));
    const double lr = model.config.learning_rate;
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        opt.m[i] = beta1 * opt.m[i] + (1.0 - beta1) * grad[i];
        opt.v[i] = beta2 * opt.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        model.params[i] -= lr * (opt.m[i] / c1) / (std::sqrt(opt.v[i] / c2) + eps);
    }
    return loss;
}

inline mlp_model fit_mlp(const matrix& X, const std::vector<double>& y, const mlp_config& cfg) {
    if (X.empty() || X.rows() != y.size()) throw std::invalid_argument("fit_mlp: bad shapes");
    if (cfg.epochs < 0 || cfg.batch < 1 || !(cfg.dropout >= 0.0 && cfg.dropout < 1.0))
        throw std::invalid_argument("fit_mlp: bad config");
    const std::size_t n = X.rows();

    mlp_model model;
    model.config = cfg;
    model.scaler.fit(X);
    const matrix Xs = model.scaler.apply(X);
    model.layout.d = static_cast<int>(X.cols());
    model.params.assign(model.layout.total(), 0.0);

    rng r(cfg.seed);
    const auto& L = model.layout;
    // He initialization on the ReLU layers, smaller fan-in-only scale on the
    // sigmoid output; biases start at zero
    const double s1 = std::sqrt(2.0 / L.d), s2 = std::sqrt(2.0 / L.h1),
                 s3 = std::sqrt(2.0 / L.h2), s4 = std::sqrt(1.0 / L.h3);
    for (std::size_t i = L.w1(); i < L.b1(); ++i) model.params[i] = r.gaussian() * s1;
    for (std::size_t i = L.w2(); i < L.b2(); ++i) model.params[i] = r.gaussian() * s2;
    for (std::size_t i = L.w3(); i < L.b3(); ++i) model.params[i] = r.gaussian() * s3;
    for (std::size_t i = L.w4(); i < L.b4(); ++i) model.params[i] = r.gaussian() * s4;

    adam_state opt(model.params.size());
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const auto bs = static_cast<std::size_t>(cfg.batch);
    matrix Xb;
    std::vector<double> yb;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        r.shuffle(order);
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t stop = std::min(n, start + bs);
            Xb = matrix(stop - start, Xs.cols());
            yb.resize(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                const auto src = Xs.row(order[i]);
                std::copy(src.begin(), src.end(), Xb.row(i - start).begin());
                yb[i - start] = y[order[i]];
            }
            mlp_train_step(model, opt, Xb, yb, r);
        }
    }
    return model;
}

inline std::vector<double> predict(const mlp_model& m, const matrix& X) {
    const matrix Q = m.scaler.apply(X);
    const auto B = static_cast<Eigen::Index>(Q.rows());
    const auto& L = m.layout;
    using cmap = Eigen::Map<const detail::erow_mat>;
    using cvec = Eigen::Map<const Eigen::VectorXd>;
    const double* p = m.params.data();
    cmap Xq(Q.data().data(), B, L.d);
    cmap W1(p + L.w1(), L.h1, L.d), W2(p + L.w2(), L.h2, L.h1), W3(p + L.w3(), L.h3, L.h2),
        W4(p + L.w4(), 1, L.h3);
    cvec b1(p + L.b1(), L.h1), b2(p + L.b2(), L.h2), b3(p + L.b3(), L.h3);

    detail::erow_mat A1 = ((Xq * W1.transpose()).rowwise() + b1.transpose()).cwiseMax(0.0);
    detail::erow_mat A2 = ((A1 * W2.transpose()).rowwise() + b2.transpose()).cwiseMax(0.0);
    detail::erow_mat A3 = ((A2 * W3.transpose()).rowwise() + b3.transpose()).cwiseMax(0.0);
    Eigen::VectorXd z = A3 * W4.transpose();
    z.array() += m.params[L.b4()];

    std::vector<double> out(Q.rows());
    for (Eigen::Index i = 0; i < B; ++i)
        out[static_cast<std::size_t>(i)] =
            z[i] >= 0.0 ? 1.0 / (1.0 + std::exp(-z[i])) : std::exp(z[i]) / (1.0 + std::exp(z[i]));
    return out;
}

}  // namespace pdm
