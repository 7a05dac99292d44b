#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdm/detail/matrix.hpp"
#include "pdm/detail/rng.hpp"
#include "pdm/detail/zscore.hpp"
#include "pdm/predictor.hpp"

namespace pdm {

struct relieff_config {
    int k_neighbors = 10;
    std::size_t sample_count = static_cast<std::size_t>(-1);  // >= n means every instance
    double class_threshold = 0.5;  // continuous labels binarize here for hit/miss classes
    std::uint64_t seed = 0;
};

// ReliefF attribute quality. Distances run on z-scored features; the per-
// feature diff |a-b|/(max-min) is affine-invariant, so normalizing by the
// scaled range changes nothing. When a class is smaller than k the available
// neighbours are used and the update divides by that count, keeping each
// instance's contribution bounded and the final weights inside [-1, 1].
inline std::vector<double> relieff_weights(const matrix& X, const std::vector<double>& y,
                                           const relieff_config& cfg) {
    if (X.empty() || X.rows() != y.size())
        throw std::invalid_argument("relieff_weights: bad shapes");
    if (cfg.k_neighbors < 1) throw std::invalid_argument("relieff_weights: k_neighbors < 1");
    const std::size_t n = X.rows(), d = X.cols();

    std::vector<char> cls(n);
    for (std::size_t i = 0; i < n; ++i) cls[i] = y[i] >= cfg.class_threshold ? 1 : 0;
    const std::size_t positives = static_cast<std::size_t>(std::count(cls.begin(), cls.end(), 1));
    if (positives == 0 || positives == n)
        throw std::invalid_argument("relieff_weights: needs both classes");

    detail::zscore sc;
    sc.fit(X);
    const matrix Z = sc.apply(X);

    std::vector<double> lo(d), hi(d);
    for (std::size_t j = 0; j < d; ++j) lo[j] = hi[j] = Z(0, j);
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], Z(i, j));
            hi[j] = std::max(hi[j], Z(i, j));
        }
    std::vector<double> inv_range(d, 0.0);
    for (std::size_t j = 0; j < d; ++j)
        if (hi[j] > lo[j]) inv_range[j] = 1.0 / (hi[j] - lo[j]);  // constant features stay 0

    std::vector<std::size_t> picks;
    if (cfg.sample_count >= n) {
        picks.resize(n);
        std::iota(picks.begin(), picks.end(), 0);
    } else {
        rng r(cfg.seed);
        picks = r.sample_without_replacement(n, cfg.sample_count);
    }
    const double m = static_cast<double>(picks.size());

    std::vector<double> w(d, 0.0);
    std::vector<std::pair<double, std::size_t>> hits, misses;
    const auto k = static_cast<std::size_t>(cfg.k_neighbors);
    for (std::size_t inst : picks) {
        hits.clear();
        misses.clear();
        const auto a = Z.row(inst);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == inst) continue;
            const auto b = Z.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = a[j] - b[j];
                s += diff * diff;
            }
            (cls[i] == cls[inst] ? hits : misses).push_back({s, i});
        }
        const std::size_t kh = std::min(k, hits.size()), km = std::min(k, misses.size());
        // distance ties break toward the lower sample index
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(kh),
                          hits.end());
        std::partial_sort(misses.begin(), misses.begin() + static_cast<std::ptrdiff_t>(km),
                          misses.end());
        for (std::size_t t = 0; t < kh; ++t) {
            const auto b = Z.row(hits[t].second);
            for (std::size_t j = 0; j < d; ++j)
                w[j] -= std::abs(a[j] - b[j]) * inv_range[j] / (static_cast<double>(kh) * m);
        }
        for (std::size_t t = 0; t < km; ++t) {
            const auto b = Z.row(misses[t].second);
            for (std::size_t j = 0; j < d; ++j)
                w[j] += std::abs(a[j] - b[j]) * inv_range[j] / (static_cast<double>(km) * m);
        }
    }
    return w;
}

// Indices of the `kept` best-weighted features, returned in ascending column
// order so selection preserves feature layout. Weight ties rank the lower
// index first.
inline std::vector<std::size_t> top_features(const std::vector<double>& weights,
                                             std::size_t kept) {
    kept = std::min(kept, weights.size());
    std::vector<std::size_t> rank(weights.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    rank.resize(kept);
    std::sort(rank.begin(), rank.end());
    return rank;
}

struct projection {
    std::vector<double> mean;
    matrix basis;          // components x dims, orthonormal rows, variance-ordered
    std::size_t kept = 0;  // leading rows used by transform
    bool zero_variance = false;
};

// Centered PCA via thin SVD of the data matrix itself (never the covariance:
// far better conditioned when dims >> samples). Sign convention: the largest-
// magnitude entry of every component is positive, earliest index on ties.
inline projection pca_fit(const matrix& X) {
    if (X.rows() < 2) throw std::invalid_argument("pca_fit: needs at least 2 samples");
    const std::size_t n = X.rows(), d = X.cols();

    projection p;
    p.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) p.mean[j] += X(i, j);
    for (double& v : p.mean) v /= static_cast<double>(n);

    Eigen::MatrixXd C(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = X(i, j) - p.mean[j];

    Eigen::BDCSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinV);
    const Eigen::MatrixXd& V = svd.matrixV();  // d x min(n,d), orthonormal columns
    const auto comps = static_cast<std::size_t>(V.cols());

    if (svd.singularValues().size() == 0 || svd.singularValues()[0] < 1e-12) {
        p.zero_variance = true;
        p.basis = matrix(d, d);
        for (std::size_t j = 0; j < d; ++j) p.basis(j, j) = 1.0;
        p.kept = d;
        return p;
    }

    p.basis = matrix(comps, d);
    for (std::size_t c = 0; c < comps; ++c) {
        std::size_t arg = 0;
        double mag = -1.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = std::abs(V(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)));
            if (v > mag) {
                mag = v;
                arg = j;
            }
        }
        const double flip =
            V(static_cast<Eigen::Index>(arg), static_cast<Eigen::Index>(c)) < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j)
            p.basis(c, j) = flip * V(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
    }
    p.kept = comps;
    return p;
}

inline matrix pca_transform(const projection& p, const matrix& X) {
    if (X.cols() != p.mean.size()) throw std::invalid_argument("pca_transform: width mismatch");
    matrix out(X.rows(), p.kept);
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t c = 0; c < p.kept; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < X.cols(); ++j)
                s += (X(i, j) - p.mean[j]) * p.basis(c, j);
            out(i, c) = s;
        }
    return out;
}

inline matrix pca_reconstruct(const projection& p, const matrix& reduced) {
    if (reduced.cols() != p.kept) throw std::invalid_argument("pca_reconstruct: width mismatch");
    const std::size_t d = p.mean.size();
    matrix out(reduced.rows(), d);
    for (std::size_t i = 0; i < reduced.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double s = p.mean[j];
            for (std::size_t c = 0; c < p.kept; ++c) s += reduced(i, c) * p.basis(c, j);
            out(i, j) = s;
        }
    return out;
}

struct reduction_choice {
    std::string method;  // none | relieff | pca
    double kept_fraction = 1.0;
    std::size_t kept_count = 0;
};

// A fitted reducer: column subset for relieff, projection for pca, pass-
// through for none.
struct reducer {
    std::string method = "none";
    std::vector<double> weights;     // relieff ranking, kept for inspection
    std::vector<std::size_t> keep;   // relieff: ascending kept columns
    projection proj;                 // pca

    matrix apply(const matrix& X) const {
        if (method == "relieff") return X.select_cols(keep);
        if (method == "pca") return pca_transform(proj, X);
        return X;
    }
};

struct reduction_search_result {
    reduction_choice choice;
    reducer red;
    double best_score = 0.0;
};

// Geometric 20%-cut grid: fractions 0.8^k while the kept feature count stays
// >= 2. The nudge keeps exact products like 100 * 0.8^2 from flooring low.
inline std::vector<double> reduction_grid(std::size_t dims) {
    std::vector<double> grid;
    double f = 1.0;
    while (std::floor(static_cast<double>(dims) * f + 1e-9) >= 2.0) {
        grid.push_back(f);
        f *= 0.8;
    }
    return grid;
}

// Walks the fraction grid from all-features downward, refitting the predictor
// per point and keeping the best validation score; equal scores prefer fewer
// dimensions (the later grid point wins).
inline reduction_search_result search_reduction(
    const matrix& Xtr, const std::vector<double>& ytr, const matrix& Xval,
    const std::vector<double>& yval, const std::string& method,
    const std::function<double(const matrix&, const std::vector<double>&, const matrix&,
                               const std::vector<double>&)>& scorer,
    const relieff_config& rcfg = {}) {
    if (method != "relieff" && method != "pca")
        throw std::invalid_argument("search_reduction: method must be relieff or pca");
    if (Xtr.empty()) throw std::invalid_argument("search_reduction: empty training set");
    const std::size_t dims = Xtr.cols();

    std::vector<double> weights;
    projection proj;
    if (method == "relieff")
        weights = relieff_weights(Xtr, ytr, rcfg);
    else
        proj = pca_fit(Xtr);

    reduction_search_result best;
    bool first = true;
    for (double f : reduction_grid(dims)) {
        const auto kept =
            static_cast<std::size_t>(std::floor(static_cast<double>(dims) * f + 1e-9));
        reducer red;
        red.method = method;
        if (method == "relieff") {
            red.weights = weights;
            red.keep = top_features(weights, kept);
        } else {
            red.proj = proj;
            red.proj.kept = std::min(kept, proj.basis.rows());
        }
        const matrix rtr = red.apply(Xtr), rval = red.apply(Xval);
        const double score = scorer(rtr, ytr, rval, yval);
        if (first || score >= best.best_score) {
            best.choice = {method, f, kept};
            best.red = std::move(red);
            best.best_score = score;
            first = false;
        }
    }
    return best;
}

namespace detail {

// sample-level F1 of thresholded scores against thresholded labels
inline double sample_f1(const std::vector<double>& scores, const std::vector<double>& labels,
                        double threshold) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold, truth = labels[i] >= threshold;
        tp += pred && truth;
        fp += pred && !truth;
        fn += !pred && truth;
    }
    const double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp + fn);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

}  // namespace detail

// Convenience form: fits `cfg` at every grid point and scores sample-level F1
// at threshold 0.5 on the validation split.
inline reduction_search_result search_reduction(const matrix& Xtr, const std::vector<double>& ytr,
                                                const matrix& Xval,
                                                const std::vector<double>& yval,
                                                const predictor_config& cfg,
                                                const std::string& method) {
    return search_reduction(
        Xtr, ytr, Xval, yval, method,
        [&cfg](const matrix& a, const std::vector<double>& ay, const matrix& b,
               const std::vector<double>& by) {
            return detail::sample_f1(predict(fit(cfg, a, ay), b), by, 0.5);
        });
}

}  // namespace pdm
