#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "pdm/detail/matrix.hpp"
#include "pdm/detail/zscore.hpp"

namespace pdm {

struct pls_model {
    detail::zscore scaler;
    double y_mean = 0.0;
    std::vector<double> beta;  // on scaled features
    int components = 0;
};

// PLS regression with a single response, built by deflation. Each weight
// vector is the normalized cross-covariance X_d^T y_d, which for one response
// is exactly the dominant (rank-1) singular direction of that cross-
// covariance, so successive components maximize remaining covariance with y.
inline pls_model fit_pls(const matrix& X, const std::vector<double>& y, int components) {
    if (X.empty() || X.rows() != y.size()) throw std::invalid_argument("fit_pls: bad shapes");
    if (components < 0) throw std::invalid_argument("fit_pls: negative component count");
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();

    pls_model m;
    m.scaler.fit(X);
    const matrix Xs = m.scaler.apply(X);
    for (double v : y) m.y_mean += v;
    m.y_mean /= static_cast<double>(n);

    using emat = Eigen::MatrixXd;
    using evec = Eigen::VectorXd;
    emat Xd = Eigen::Map<const emat>(Xs.data().data(), static_cast<Eigen::Index>(d),
                                     static_cast<Eigen::Index>(n))
                  .transpose();  // row-major storage mapped then transposed
    evec yd(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) yd[static_cast<Eigen::Index>(i)] = y[i] - m.y_mean;

    const int kmax = std::min<int>(components, static_cast<int>(d));
    emat W(static_cast<Eigen::Index>(d), kmax), P(static_cast<Eigen::Index>(d), kmax);
    evec q(kmax);
    int k = 0;
    for (; k < kmax; ++k) {
        evec w = Xd.transpose() * yd;
        const double wn = w.norm();
        if (wn < 1e-12) break;  // no covariance left to model
        w /= wn;
        const evec t = Xd * w;
        const double tt = t.squaredNorm();
        if (tt < 1e-12) break;
        const evec p = Xd.transpose() * t / tt;
        const double qk = yd.dot(t) / tt;
        Xd -= t * p.transpose();
        yd -= qk * t;
        W.col(k) = w;
        P.col(k) = p;
        q[k] = qk;
    }
    m.components = k;
    m.beta.assign(d, 0.0);
    if (k > 0) {
        // beta maps raw scaled x to y via the trained latent space
        const emat Wk = W.leftCols(k), Pk = P.leftCols(k);
        const evec beta = Wk * (Pk.transpose() * Wk).partialPivLu().solve(q.head(k));
        for (std::size_t j = 0; j < d; ++j) m.beta[j] = beta[static_cast<Eigen::Index>(j)];
    }
    return m;
}

inline double pls_raw(const pls_model& m, std::span<const double> scaled_row) {
    double s = m.y_mean;
    for (std::size_t j = 0; j < scaled_row.size(); ++j) s += scaled_row[j] * m.beta[j];
    return s;
}

inline std::vector<double> predict(const pls_model& m, const matrix& X) {
    const matrix Q = m.scaler.apply(X);
    std::vector<double> out(Q.rows());
    for (std::size_t i = 0; i < Q.rows(); ++i)
        out[i] = std::clamp(pls_raw(m, Q.row(i)), 0.0, 1.0);
    return out;
}

}  // namespace pdm
