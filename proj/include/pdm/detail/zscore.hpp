#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pdm/detail/matrix.hpp"

namespace pdm::detail {

// Column-wise standardization with train-time statistics. Constant columns
// get unit scale so they map to zero instead of NaN.
struct zscore {
    std::vector<double> mean, scale;

    void fit(const matrix& X) {
        const std::size_t n = X.rows(), d = X.cols();
        mean.assign(d, 0.0);
        scale.assign(d, 1.0);
        if (n == 0) return;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) mean[j] += X(i, j);
        for (double& m : mean) m /= static_cast<double>(n);
        std::vector<double> var(d, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double c = X(i, j) - mean[j];
                var[j] += c * c;
            }
        for (std::size_t j = 0; j < d; ++j) {
            const double s = std::sqrt(var[j] / static_cast<double>(n));
            scale[j] = s > 0.0 ? s : 1.0;
        }
    }

    matrix apply(const matrix& X) const {
        if (X.cols() != mean.size()) throw std::invalid_argument("zscore: width mismatch");
        matrix out(X.rows(), X.cols());
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t j = 0; j < X.cols(); ++j)
                out(i, j) = (X(i, j) - mean[j]) / scale[j];
        return out;
    }
};

}  // namespace pdm::detail
