#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "pdm/ensembles.hpp"
#include "pdm/evaluation.hpp"
#include "pdm/predictors/mlp.hpp"
#include "pdm/predictors/pls.hpp"
#include "pdm/predictors/tree.hpp"
#include "pdm/reduction.hpp"
#include "pdm/reg_pipeline.hpp"
#include "pdm/resampling.hpp"

// Fast cross-checks of the numeric core against independent references.
// Everything here reruns in well under a second, so it can gate a fresh
// build or an unfamiliar machine before a long benchmark.

namespace pdm::selftest {

struct check_result {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline std::string count_detail(int ok, int total) {
    return std::to_string(ok) + "/" + std::to_string(total) + " cases agreed";
}

// Day-by-day rescoring of one trace. Builds an explicit per-day zone map by
// walking each episode backward from its target, then tallies the anchors
// against it; no shared arithmetic with pdm::score.
inline eval_outcome naive_score(const std::vector<prediction>& trace,
                                const std::vector<episode>& episodes, const period_spec& spec) {
    enum class zone : char { early, correct, repair, skipped };
    std::map<int, std::pair<std::size_t, zone>> days;
    std::vector<bool> skipped(episodes.size(), false);
    for (std::size_t e = 0; e < episodes.size(); ++e) {
        const episode& ep = episodes[e];
        const int span = ep.target_day - ep.start_day + 1;
        skipped[e] = span < spec.correct_len + spec.repair_len + 1;
        int day = ep.target_day;
        if (skipped[e]) {
            for (; day >= ep.start_day; --day) days[day] = {e, zone::skipped};
            continue;
        }
        for (int i = 0; i <= spec.repair_len; ++i) days[day--] = {e, zone::repair};
        for (int i = 0; i < spec.correct_len; ++i) days[day--] = {e, zone::correct};
        for (; day >= ep.start_day; --day) days[day] = {e, zone::early};
    }

    eval_outcome out;
    std::vector<bool> hit(episodes.size(), false);
    for (const prediction& p : trace) {
        const auto it = days.find(p.anchor_day);
        if (it == days.end()) {
            ++out.ignored;
            continue;
        }
        switch (it->second.second) {
            case zone::skipped:
            case zone::repair: ++out.ignored; break;
            case zone::correct:
                if (p.alarm) hit[it->second.first] = true;
                break;
            case zone::early: p.alarm ? ++out.fp : ++out.tn; break;
        }
    }
    for (std::size_t e = 0; e < episodes.size(); ++e) {
        if (skipped[e])
            ++out.skipped_episodes;
        else
            hit[e] ? ++out.tp : ++out.fn;
    }
    finalize_rates(out);
    return out;
}

struct random_case {
    std::vector<prediction> trace;
    std::vector<int> anchors;
    std::vector<episode> episodes;
    period_spec spec;
};

inline random_case make_case(rng& r) {
    random_case c;
    c.spec.correct_len = 1 + static_cast<int>(r.bounded(8));
    c.spec.repair_len = static_cast<int>(r.bounded(4));
    const std::size_t n_eps = 1 + r.bounded(4);
    int day = static_cast<int>(r.bounded(4));
    for (std::size_t e = 0; e < n_eps; ++e) {
        const int start = day;
        const int target = start + static_cast<int>(r.bounded(26));
        c.episodes.push_back({start, target});
        day = target + 1 + static_cast<int>(r.bounded(5));
    }
    for (int a = 0; a <= day + 5; a += 1 + static_cast<int>(r.bounded(4))) {
        c.anchors.push_back(a);
        c.trace.push_back({a, r.coin() ? 1 : 0});
    }
    return c;
}

}  // namespace detail

// pdm::score against the per-day reference on randomized traces.
inline check_result scoring_reference(int cases = 200) {
    rng r(9001);
    int ok = 0;
    for (int i = 0; i < cases; ++i) {
        const auto c = detail::make_case(r);
        if (score(c.trace, c.episodes, c.spec) == detail::naive_score(c.trace, c.episodes, c.spec))
            ++ok;
    }
    return {"scoring matches a per-day reference", ok == cases, detail::count_detail(ok, cases)};
}

// Sigmoid risk targets: exactly half at the midpoint, strictly falling with
// distance to failure across twice the midpoint.
inline check_result risk_curve_contract() {
    for (const char* name : {"A", "B", "C", "D"}) {
        const window_spec w = settings_preset(name);
        const risk_curve_spec curve = default_risk_curve(w);
        const int m = static_cast<int>(std::lround(curve.midpoint));
        const episode ep{200 - 2 * m, 200};
        if (std::abs(risk_label(200 - m, ep, curve) - 0.5) > 1e-12)
            return {"risk curve centered and monotone", false,
                    std::string("midpoint off-center for setting ") + name};
        double prev = risk_label(200, ep, curve);
        for (int d = 1; d <= 2 * m; ++d) {
            const double v = risk_label(200 - d, ep, curve);
            if (!(v < prev))
                return {"risk curve centered and monotone", false,
                        std::string("not strictly decreasing for setting ") + name};
            prev = v;
        }
    }
    return {"risk curve centered and monotone", true, "4 settings, 1e-12 midpoint tolerance"};
}

// The fitted vote threshold can never lose to the fixed majority rule: the
// sweep includes majority itself as the two-of-three point.
inline check_result threshold_dominates_majority(int cases = 300) {
    rng r(7321);
    int ok = 0;
    for (int i = 0; i < cases; ++i) {
        const auto c = detail::make_case(r);
        vote_matrix vm;
        for (std::size_t a = 0; a < c.anchors.size(); ++a)
            vm.rows.push_back({r.coin() ? 1 : 0, r.coin() ? 1 : 0, r.coin() ? 1 : 0});
        vm.member_f1 = {r.uniform01(), r.uniform01(), r.uniform01()};
        const ensemble_context ctx{c.anchors, c.episodes, c.spec};
        std::vector<prediction> maj;
        for (std::size_t a = 0; a < c.anchors.size(); ++a)
            maj.push_back({c.anchors[a], simple_majority(vm.rows[a])});
        const double maj_f1 = score(maj, c.episodes, c.spec).f1;
        if (best_dynamic_threshold(vm, ctx).f1 >= maj_f1) ++ok;
    }
    return {"threshold sweep dominates majority", ok == cases, detail::count_detail(ok, cases)};
}

namespace detail {

inline std::map<std::vector<double>, int> row_multiset(const matrix& X,
                                                       const std::vector<double>& y) {
    std::map<std::vector<double>, int> out;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        std::vector<double> key(X.row(i).begin(), X.row(i).end());
        key.push_back(y[i]);
        ++out[key];
    }
    return out;
}

inline bool multiset_within(const std::map<std::vector<double>, int>& part,
                            const std::map<std::vector<double>, int>& whole) {
    for (const auto& [key, count] : part) {
        const auto it = whole.find(key);
        if (it == whole.end() || it->second < count) return false;
    }
    return true;
}

}  // namespace detail

// Both resampling modes must land on an exact class balance and move whole
// rows: undersampling draws from the input, oversampling extends it.
inline check_result resampling_contract(int cases = 100) {
    rng r(2718);
    int ok = 0;
    for (int i = 0; i < cases; ++i) {
        const std::size_t n = 4 + r.bounded(57);
        const std::size_t d = 1 + r.bounded(6);
        matrix X;
        std::vector<double> y;
        for (std::size_t row = 0; row < n; ++row) {
            std::vector<double> vals(d);
            for (auto& v : vals) v = static_cast<double>(r.bounded(5));
            X.push_row(vals);
            y.push_back(row < 2 ? static_cast<double>(row % 2) : (r.coin() ? 1.0 : 0.0));
        }
        const auto input = detail::row_multiset(X, y);
        bool good = true;
        for (const char* mode : {"undersample", "oversample"}) {
            resample_plan plan;
            plan.mode = mode;
            plan.seed = r.bounded(1u << 30);
            const auto [rx, ry] = resample(X, y, plan);
            std::size_t pos = 0;
            for (const double v : ry) pos += v >= 0.5 ? 1 : 0;
            if (pos * 2 != ry.size()) good = false;
            const auto output = detail::row_multiset(rx, ry);
            if (plan.mode == "undersample" && !detail::multiset_within(output, input)) good = false;
            if (plan.mode == "oversample" && !detail::multiset_within(input, output)) good = false;
        }
        if (good) ++ok;
    }
    return {"resampling balances classes exactly", ok == cases, detail::count_detail(ok, cases)};
}

// Orthonormal basis rows and a lossless round trip at full rank.
inline check_result pca_orthonormal() {
    rng r(5150);
    matrix X;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> row(12);
        for (auto& v : row) v = r.gaussian();
        X.push_row(row);
    }
    projection p = pca_fit(X);
    double worst = 0.0;
    for (std::size_t a = 0; a < p.basis.rows(); ++a)
        for (std::size_t b = 0; b < p.basis.rows(); ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < p.basis.cols(); ++j) dot += p.basis(a, j) * p.basis(b, j);
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    p.kept = p.basis.rows();
    const matrix back = pca_reconstruct(p, pca_transform(p, X));
    double err = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < X.cols(); ++j) err = std::max(err, std::abs(back(i, j) - X(i, j)));
    const bool pass = worst < 1e-8 && err < 1e-8;
    return {"pca basis orthonormal and lossless at full rank", pass,
            "|BB^T - I| = " + std::to_string(worst) + ", round trip = " + std::to_string(err)};
}

// A noiseless linear map must be recovered once components reach the rank.
// Coefficients stay small so every target sits inside the clamp range.
inline check_result pls_recovery() {
    rng r(6021);
    const std::vector<double> w{0.04, -0.05, 0.01, 0.0, 0.05, -0.02};
    matrix X;
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
        std::vector<double> row(w.size());
        for (auto& v : row) v = r.gaussian();
        double t = 0.5;
        for (std::size_t j = 0; j < w.size(); ++j) t += w[j] * row[j];
        X.push_row(row);
        y.push_back(t);
    }
    const pls_model m = fit_pls(X, y, static_cast<int>(w.size()));
    const std::vector<double> pred = predict(m, X);
    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) err = std::max(err, std::abs(pred[i] - y[i]));
    return {"pls recovers a noiseless linear map", err < 1e-6,
            "max training error = " + std::to_string(err)};
}

// Depth-1 fit vs exhaustive enumeration of every admissible split. Integer
// data keeps all sums exact, so achieved losses must match to the bit.
inline check_result tree_split_exact(int cases = 60) {
    rng r(401);
    int ok = 0;
    for (int i = 0; i < cases; ++i) {
        const std::size_t n = 4 + r.bounded(20);
        const std::size_t d = 1 + r.bounded(3);
        matrix X;
        std::vector<double> y;
        for (std::size_t row = 0; row < n; ++row) {
            std::vector<double> vals(d);
            for (auto& v : vals) v = static_cast<double>(r.uniform_int(0, 9));
            X.push_row(vals);
            y.push_back(static_cast<double>(r.uniform_int(0, 9)));
        }
        tree_params params;
        params.max_depth = 1;
        params.min_leaf = 1 + static_cast<int>(r.bounded(3));
        const regression_tree tree = fit_tree(X, y, params);

        auto sse_of = [](const std::vector<double>& ys) {
            double mean = 0.0;
            for (const double v : ys) mean += v;
            mean /= static_cast<double>(ys.size());
            double s = 0.0;
            for (const double v : ys) s += (v - mean) * (v - mean);
            return s;
        };
        double best = sse_of(y);
        bool splittable = false;
        for (std::size_t f = 0; f < d; ++f) {
            std::set<double> values;
            for (std::size_t row = 0; row < n; ++row) values.insert(X(row, f));
            std::vector<double> sorted(values.begin(), values.end());
            for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
                const double thr = sorted[k] + (sorted[k + 1] - sorted[k]) / 2.0;
                std::vector<double> yl, yr;
                for (std::size_t row = 0; row < n; ++row)
                    (X(row, f) <= thr ? yl : yr).push_back(y[row]);
                if (yl.size() < static_cast<std::size_t>(params.min_leaf) ||
                    yr.size() < static_cast<std::size_t>(params.min_leaf))
                    continue;
                const double s = sse_of(yl) + sse_of(yr);
                if (s < best - 1e-12) {
                    best = s;
                    splittable = true;
                }
            }
        }
        if (!splittable) {
            if (tree.nodes.size() == 1) ++ok;
            continue;
        }
        if (tree.nodes[0].feature < 0) continue;
        std::vector<double> yl, yr;
        for (std::size_t row = 0; row < n; ++row)
            (X(row, static_cast<std::size_t>(tree.nodes[0].feature)) <= tree.nodes[0].threshold
                 ? yl
                 : yr)
                .push_back(y[row]);
        if (sse_of(yl) + sse_of(yr) == best) ++ok;
    }
    return {"tree split matches exhaustive search", ok == cases, detail::count_detail(ok, cases)};
}

namespace detail {

inline double mlp_grad_error(bool logistic) {
    rng r(logistic ? 2024 : 2025);
    const std::size_t n = 10, d = 4;
    matrix X;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(d);
        for (auto& v : row) v = r.uniform_real(-1.5, 1.5);
        X.push_row(row);
    }
    std::vector<double> y(n);
    for (auto& v : y) v = logistic ? (r.coin() ? 1.0 : 0.0) : r.uniform_real(0.1, 0.9);

    pdm::detail::mlp_layout L;
    L.d = static_cast<int>(d);
    std::vector<double> params(L.total(), 0.0);
    const double s1 = std::sqrt(2.0 / L.d), s2 = std::sqrt(2.0 / L.h1),
                 s3 = std::sqrt(2.0 / L.h2), s4 = std::sqrt(1.0 / L.h3);
    for (std::size_t i = L.w1(); i < L.b1(); ++i) params[i] = r.gaussian() * s1;
    for (std::size_t i = L.w2(); i < L.b2(); ++i) params[i] = r.gaussian() * s2;
    for (std::size_t i = L.w3(); i < L.b3(); ++i) params[i] = r.gaussian() * s3;
    for (std::size_t i = L.w4(); i < L.b4(); ++i) params[i] = r.gaussian() * s4;

    const std::vector<double> no_mask;
    std::vector<double> grad;
    pdm::detail::mlp_loss_grad(L, logistic, params, X, y, no_mask, no_mask, &grad);

    std::vector<std::size_t> coords;
    for (std::size_t i = 0; i < L.total(); i += 37) coords.push_back(i);
    for (std::size_t i = L.w4(); i < L.total(); ++i) coords.push_back(i);

    const double h = 1e-5;
    double num2 = 0.0, ana2 = 0.0, diff2 = 0.0;
    for (const std::size_t c : coords) {
        const double keep = params[c];
        params[c] = keep + h;
        const double lp =
            pdm::detail::mlp_loss_grad(L, logistic, params, X, y, no_mask, no_mask, nullptr);
        params[c] = keep - h;
        const double lm =
            pdm::detail::mlp_loss_grad(L, logistic, params, X, y, no_mask, no_mask, nullptr);
        params[c] = keep;
        const double fd = (lp - lm) / (2.0 * h);
        diff2 += (grad[c] - fd) * (grad[c] - fd);
        num2 += fd * fd;
        ana2 += grad[c] * grad[c];
    }
    return std::sqrt(diff2) / std::max({std::sqrt(num2), std::sqrt(ana2), 1e-12});
}

}  // namespace detail

// Analytic gradients against central finite differences for both losses.
inline check_result mlp_gradcheck() {
    const double ce = detail::mlp_grad_error(true);
    const double sq = detail::mlp_grad_error(false);
    return {"mlp gradients match finite differences", ce < 1e-4 && sq < 1e-4,
            "relative error " + std::to_string(ce) + " (cross-entropy), " + std::to_string(sq) +
                " (squared)"};
}

inline std::vector<check_result> run_all() {
    return {scoring_reference(),    risk_curve_contract(), threshold_dominates_majority(),
            resampling_contract(),  pca_orthonormal(),     pls_recovery(),
            tree_split_exact(),     mlp_gradcheck()};
}

}  // namespace pdm::selftest
