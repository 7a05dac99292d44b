#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "pdm/detail/matrix.hpp"
#include "pdm/detail/rng.hpp"

namespace pdm {

struct tree_node {
    int feature = -1;       // -1 marks a leaf
    double threshold = 0.0; // go left when x[feature] <= threshold
    int left = -1, right = -1;
    double value = 0.0;     // node sample mean, the prediction at leaves
};

struct regression_tree {
    std::vector<tree_node> nodes;

    double predict_row(std::span<const double> row) const {
        int i = 0;
        while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
            const tree_node& nd = nodes[static_cast<std::size_t>(i)];
            i = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }

    bool operator==(const regression_tree&) const = default;
};

inline bool operator==(const tree_node& a, const tree_node& b) {
    return a.feature == b.feature && a.threshold == b.threshold && a.left == b.left &&
           a.right == b.right && a.value == b.value;
}

struct tree_params {
    int max_depth = 4;
    int min_leaf = 2;
    int feature_subset = 0; // 0 means all features; otherwise sampled per node
};

namespace detail {

// Recursive splitter over per-feature presorted index lists. Partitioning a
// node's lists with a stable pass keeps children sorted without re-sorting,
// so each level costs features x node-size.
class tree_builder {
public:
    tree_builder(const matrix& X, const std::vector<double>& y, const tree_params& p, rng* r)
        : X_(X), y_(y), p_(p), rng_(r) {}

    regression_tree build(std::span<const std::size_t> rows) {
        const std::size_t d = X_.cols();
        std::vector<std::vector<std::uint32_t>> order(d);
        for (std::size_t f = 0; f < d; ++f) {
            auto& ord = order[f];
            ord.assign(rows.begin(), rows.end());
            std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
                return X_(a, f) < X_(b, f);
            });
        }
        tree_.nodes.clear();
        grow(std::move(order), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::vector<std::uint32_t>> order, int depth) {
        const std::size_t n = order.empty() ? 0 : order[0].size();
        const int me = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        double total = 0.0;
        for (std::uint32_t i : order[0]) total += y_[i];
        tree_.nodes[static_cast<std::size_t>(me)].value = total / static_cast<double>(n);

        if (depth >= p_.max_depth || n < 2 * static_cast<std::size_t>(p_.min_leaf)) return me;

        const std::size_t d = X_.cols();
        std::vector<std::size_t> candidates;
        if (p_.feature_subset > 0 && static_cast<std::size_t>(p_.feature_subset) < d && rng_) {
            candidates = rng_->sample_without_replacement(d, static_cast<std::size_t>(p_.feature_subset));
            std::sort(candidates.begin(), candidates.end());
        } else {
            candidates.resize(d);
            for (std::size_t f = 0; f < d; ++f) candidates[f] = f;
        }

        // maximizing sum_L^2/n_L + sum_R^2/n_R minimizes total squared error
        const double no_split = total * total / static_cast<double>(n);
        double best = no_split + 1e-12;
        int best_f = -1;
        double best_thr = 0.0;
        for (std::size_t f : candidates) {
            const auto& ord = order[f];
            double sum_l = 0.0;
            for (std::size_t pos = 0; pos + 1 < n; ++pos) {
                sum_l += y_[ord[pos]];
                const double a = X_(ord[pos], f), b = X_(ord[pos + 1], f);
                if (a == b) continue;
                const auto n_l = pos + 1, n_r = n - n_l;
                if (n_l < static_cast<std::size_t>(p_.min_leaf) ||
                    n_r < static_cast<std::size_t>(p_.min_leaf))
                    continue;
                const double sum_r = total - sum_l;
                const double gain = sum_l * sum_l / static_cast<double>(n_l) +
                                    sum_r * sum_r / static_cast<double>(n_r);
                if (gain > best) {
                    best = gain;
                    best_f = static_cast<int>(f);
                    best_thr = a + (b - a) / 2.0;
                }
            }
        }
        if (best_f < 0) return me;

        std::vector<std::vector<std::uint32_t>> left(d), right(d);
        for (std::size_t f = 0; f < d; ++f) {
            for (std::uint32_t i : order[f]) {
                if (X_(i, static_cast<std::size_t>(best_f)) <= best_thr)
                    left[f].push_back(i);
                else
                    right[f].push_back(i);
            }
        }
        order.clear();

        tree_.nodes[static_cast<std::size_t>(me)].feature = best_f;
        tree_.nodes[static_cast<std::size_t>(me)].threshold = best_thr;
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        tree_.nodes[static_cast<std::size_t>(me)].left = l;
        tree_.nodes[static_cast<std::size_t>(me)].right = r;
        return me;
    }

    const matrix& X_;
    const std::vector<double>& y_;
    tree_params p_;
    rng* rng_;
    regression_tree tree_;
};

}  // namespace detail

// Fits a squared-error regression tree on the given rows (duplicates allowed,
// as bootstrap samples produce). Pass an rng when feature_subset is in play.
inline regression_tree fit_tree(const matrix& X, const std::vector<double>& y,
                                std::span<const std::size_t> rows, const tree_params& params,
                                rng* r = nullptr) {
    if (X.empty() || rows.empty()) throw std::invalid_argument("fit_tree: empty input");
    detail::tree_builder b(X, y, params, r);
    return b.build(rows);
}

inline regression_tree fit_tree(const matrix& X, const std::vector<double>& y,
                                const tree_params& params, rng* r = nullptr) {
    std::vector<std::size_t> rows(X.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return fit_tree(X, y, rows, params, r);
}

}  // namespace pdm
