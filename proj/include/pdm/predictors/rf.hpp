#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pdm/detail/matrix.hpp"
#include "pdm/detail/rng.hpp"
#include "pdm/predictors/tree.hpp"

namespace pdm {

struct rf_config {
    int trees = 200;
    int max_depth = 12;
    int feature_subset = 0;  // 0 picks max(1, round(sqrt(dims))) per node
    bool bootstrap = true;
};

struct rf_model {
    rf_config config;
    std::size_t input_dim = 0;
    std::vector<regression_tree> trees;
};

// Bagged regression forest; on 0/1 labels the mean over trees is the vote
// fraction. Reproducible given (data, config, seed).
inline rf_model fit_rf(const matrix& X, const std::vector<double>& y, const rf_config& cfg,
                       std::uint64_t seed) {
    if (X.empty() || X.rows() != y.size()) throw std::invalid_argument("fit_rf: bad shapes");
    if (cfg.trees < 1) throw std::invalid_argument("fit_rf: needs at least one tree");
    const std::size_t n = X.rows();

    tree_params tp;
    tp.max_depth = cfg.max_depth;
    tp.min_leaf = 1;
    tp.feature_subset = cfg.feature_subset > 0
                            ? cfg.feature_subset
                            : std::max(1, static_cast<int>(std::llround(
                                              std::sqrt(static_cast<double>(X.cols())))));

    rng r(seed);
    rf_model m;
    m.config = cfg;
    m.input_dim = X.cols();
    m.trees.reserve(static_cast<std::size_t>(cfg.trees));
    std::vector<std::size_t> rows(n);
    for (int t = 0; t < cfg.trees; ++t) {
        if (cfg.bootstrap) {
            for (auto& idx : rows) idx = static_cast<std::size_t>(r.bounded(n));
        } else {
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        }
        m.trees.push_back(fit_tree(X, y, rows, tp, &r));
    }
    return m;
}

inline double rf_score(const rf_model& m, std::span<const double> row) {
    double sum = 0.0;
    for (const auto& t : m.trees) sum += t.predict_row(row);
    return std::clamp(sum / static_cast<double>(m.trees.size()), 0.0, 1.0);
}

inline std::vector<double> predict(const rf_model& m, const matrix& X) {
    if (X.cols() != m.input_dim) throw std::invalid_argument("rf predict: width mismatch");
    std::vector<double> out(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) out[i] = rf_score(m, X.row(i));
    return out;
}

}  // namespace pdm
