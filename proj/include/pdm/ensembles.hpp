#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pdm/evaluation.hpp"

namespace pdm {

// Binary votes of exactly three member predictors per prediction anchor,
// with each member's reference F1 alongside.
struct vote_matrix {
    std::vector<std::array<int, 3>> rows;
    std::array<double, 3> member_f1{0.0, 0.0, 0.0};
};

// Episodes and period layout the combined trace is scored against; anchors
// align one-to-one with vote rows.
struct ensemble_context {
    std::vector<int> anchors;
    std::vector<episode> episodes;
    period_spec periods;
};

namespace detail {

inline void check_votes(const vote_matrix& vm, const ensemble_context& ctx) {
    if (vm.rows.size() != ctx.anchors.size())
        throw std::invalid_argument("ensemble: vote rows and anchors disagree");
    for (const auto& r : vm.rows)
        for (int v : r)
            if (v != 0 && v != 1) throw std::invalid_argument("ensemble: votes must be 0 or 1");
}

}  // namespace detail

// Alarm when at least half of the three members vote for one.
inline int simple_majority(const std::array<int, 3>& votes) {
    return votes[0] + votes[1] + votes[2] >= 2 ? 1 : 0;
}

// Members weighted by their share of the summed F1.
inline std::array<double, 3> f1_weights(const std::array<double, 3>& member_f1) {
    double sum = 0.0;
    for (double v : member_f1) {
        if (v < 0.0) throw std::invalid_argument("f1_weights: negative score");
        sum += v;
    }
    if (sum == 0.0) throw std::invalid_argument("f1_weights: all member scores are zero");
    return {member_f1[0] / sum, member_f1[1] / sum, member_f1[2] / sum};
}

// Alarm only when the weighted vote mass strictly exceeds one half.
inline int weighted_vote(const std::array<int, 3>& votes, const std::array<double, 3>& weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += votes[i] ? weights[i] : 0.0;
    return s > 0.5 ? 1 : 0;
}

namespace detail {

template <typename Combine>
double combined_f1(const vote_matrix& vm, const ensemble_context& ctx, Combine&& combine) {
    std::vector<prediction> trace(vm.rows.size());
    for (std::size_t i = 0; i < vm.rows.size(); ++i)
        trace[i] = {ctx.anchors[i], combine(vm.rows[i]) != 0};
    return score(trace, ctx.episodes, ctx.periods).f1;
}

}  // namespace detail

struct dynamic_weights_result {
    std::array<double, 3> weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double f1 = 0.0;
};

// Oracle weighting: exhaustive search of the 0.05-step simplex grid plus the
// exact uniform triple, scored on this very instance. Uniform is evaluated
// first and ties never replace, so "all candidates equal" resolves to uniform.
inline dynamic_weights_result fit_dynamic_weights(const vote_matrix& vm,
                                                  const ensemble_context& ctx) {
    detail::check_votes(vm, ctx);
    dynamic_weights_result best;
    best.f1 = detail::combined_f1(vm, ctx, [&best](const std::array<int, 3>& v) {
        return weighted_vote(v, best.weights);
    });
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20 - i; ++j) {
            const std::array<double, 3> w{i / 20.0, j / 20.0, (20 - i - j) / 20.0};
            const double f1 = detail::combined_f1(
                vm, ctx, [&w](const std::array<int, 3>& v) { return weighted_vote(v, w); });
            if (f1 > best.f1) best = {w, f1};
        }
    return best;
}

struct dynamic_threshold_result {
    int threshold = 3;
    double f1 = 0.0;
};

// Sweep the alarm threshold over {1,2,3} member votes; ties go to the larger
// threshold, which raises fewer alarms.
inline dynamic_threshold_result best_dynamic_threshold(const vote_matrix& vm,
                                                       const ensemble_context& ctx) {
    detail::check_votes(vm, ctx);
    dynamic_threshold_result best;
    bool first = true;
    for (int t = 3; t >= 1; --t) {
        const double f1 = detail::combined_f1(vm, ctx, [t](const std::array<int, 3>& v) {
            return v[0] + v[1] + v[2] >= t ? 1 : 0;
        });
        if (first || f1 > best.f1) {
            best = {t, f1};
            first = false;
        }
    }
    return best;
}

// Regression-side combination: average the members' risk scores per anchor;
// thresholding happens downstream exactly as for a single predictor.
inline std::vector<double> mean_risk(const std::vector<double>& a, const std::vector<double>& b,
                                     const std::vector<double>& c) {
    if (a.size() != b.size() || b.size() != c.size())
        throw std::invalid_argument("mean_risk: length mismatch");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i] + c[i]) / 3.0;
    return out;
}

}  // namespace pdm
