#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "pdm/detail/matrix.hpp"
#include "pdm/detail/zscore.hpp"

namespace pdm {

// k-nearest-neighbours scorer. Features are standardized at fit time so the
// Euclidean metric is not dominated by large-scale columns. Score is the mean
// label of the k nearest training rows; distance ties break toward the lower
// training-row index.
struct knn_model {
    int k = 3;
    detail::zscore scaler;
    matrix train;  // scaled
    std::vector<double> labels;
};

inline knn_model fit_knn(const matrix& X, const std::vector<double>& y, int k) {
    if (X.empty() || X.rows() != y.size()) throw std::invalid_argument("fit_knn: bad shapes");
    if (k < 1) throw std::invalid_argument("fit_knn: k must be positive");
    knn_model m;
    m.k = k;
    m.scaler.fit(X);
    m.train = m.scaler.apply(X);
    m.labels = y;
    return m;
}

inline std::vector<double> predict(const knn_model& m, const matrix& X) {
    const matrix Q = m.scaler.apply(X);
    const std::size_t n = m.train.rows();
    const std::size_t use = std::min<std::size_t>(static_cast<std::size_t>(m.k), n);
    std::vector<double> out(Q.rows());
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t q = 0; q < Q.rows(); ++q) {
        const auto row = Q.row(q);
        for (std::size_t i = 0; i < n; ++i) {
            const auto t = m.train.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < row.size(); ++j) {
                const double d = row[j] - t[j];
                s += d * d;
            }
            dist[i] = {s, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(use),
                          dist.end());
        double sum = 0.0;
        for (std::size_t i = 0; i < use; ++i) sum += m.labels[dist[i].second];
        out[q] = sum / static_cast<double>(use);
    }
    return out;
}

}  // namespace pdm
