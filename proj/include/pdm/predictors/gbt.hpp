#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pdm/detail/matrix.hpp"
#include "pdm/predictors/tree.hpp"

namespace pdm {

struct gbt_config {
    int rounds = 200;
    double learning_rate = 0.1;
    int max_depth = 4;
    int min_leaf = 2;
    bool logistic = true;  // false fits plain squared-error stages
};

struct gbt_model {
    gbt_config config;
    std::size_t input_dim = 0;
    double base = 0.0;  // log-odds when logistic, plain mean otherwise
    std::vector<regression_tree> stages;
};

namespace detail {

inline double sigmoid(double z) {
    // split on sign so exp never overflows
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace detail

inline double gbt_raw(const gbt_model& m, std::span<const double> row) {
    double f = m.base;
    for (const auto& t : m.stages) f += m.config.learning_rate * t.predict_row(row);
    return f;
}

inline double gbt_score(const gbt_model& m, std::span<const double> row) {
    const double f = gbt_raw(m, row);
    if (m.config.logistic) return detail::sigmoid(f);
    return std::clamp(f, 0.0, 1.0);
}

// One boosting stage: fit a squared-error tree to the given residuals and
// append it (the learning-rate scaling happens at evaluation time).
inline void gbt_round(gbt_model& m, const matrix& X, const std::vector<double>& residuals) {
    for (double r : residuals)
        if (!std::isfinite(r)) throw std::invalid_argument("gbt_round: non-finite residual");
    tree_params tp;
    tp.max_depth = m.config.max_depth;
    tp.min_leaf = m.config.min_leaf;
    m.stages.push_back(fit_tree(X, residuals, tp));
}

// Gradient boosting with shallow squared-error trees. Each stage fits the
// current residual: y - sigmoid(F) for the logistic task, y - F otherwise.
// The leaf mean is the exact squared-loss minimizer, and for the logistic
// task it is the usual first-order step on the log-loss gradient.
inline gbt_model fit_gbt(const matrix& X, const std::vector<double>& y, const gbt_config& cfg) {
    if (X.empty() || X.rows() != y.size()) throw std::invalid_argument("fit_gbt: bad shapes");
    if (cfg.rounds < 0 || cfg.learning_rate <= 0.0)
        throw std::invalid_argument("fit_gbt: bad config");
    const std::size_t n = X.rows();

    gbt_model m;
    m.config = cfg;
    m.input_dim = X.cols();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    if (cfg.logistic) {
        const double p = std::clamp(mean, 1e-12, 1.0 - 1e-12);
        m.base = std::log(p / (1.0 - p));
    } else {
        m.base = mean;
    }

    std::vector<double> f(n, m.base);
    std::vector<double> residual(n);
    for (int round = 0; round < cfg.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i)
            residual[i] = y[i] - (cfg.logistic ? detail::sigmoid(f[i]) : f[i]);
        gbt_round(m, X, residual);
        for (std::size_t i = 0; i < n; ++i)
            f[i] += cfg.learning_rate * m.stages.back().predict_row(X.row(i));
    }
    return m;
}

inline std::vector<double> predict(const gbt_model& m, const matrix& X) {
    if (X.cols() != m.input_dim) throw std::invalid_argument("gbt predict: width mismatch");
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = gbt_score(m, X.row(i));
    return out;
}

}  // namespace pdm
