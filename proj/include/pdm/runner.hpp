#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdm/class_pipeline.hpp"
#include "pdm/config.hpp"
#include "pdm/ensembles.hpp"
#include "pdm/evaluation.hpp"
#include "pdm/event_log.hpp"
#include "pdm/generator.hpp"
#include "pdm/predictor.hpp"
#include "pdm/reduction.hpp"
#include "pdm/reg_pipeline.hpp"
#include "pdm/resampling.hpp"

namespace pdm {

struct matrix_row {
    std::string algorithm;
    std::string reduction = "none";
};

inline bool operator==(const matrix_row& a, const matrix_row& b) {
    return a.algorithm == b.algorithm && a.reduction == b.reduction;
}

// One benchmark run: a predictor matrix swept over dataset presets, window
// settings and a shared seed list. Tunings (reduction fraction, knn k,
// regression alarm threshold) are chosen by mean score across the seed list,
// on the test split in paper-replication mode and on a train-tail validation
// split in honest-validation mode.
struct experiment_config {
    std::vector<std::string> datasets{"DS1"};
    std::vector<std::string> settings{"A", "B", "C", "D"};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::string pipeline = "class";          // class | reg
    std::string mode = "paper-replication";  // paper-replication | honest-validation
    double validation_fraction = 0.2;        // honest mode: train tail held out for tuning
    std::string out_dir = "results";

    std::vector<matrix_row> rows{{"gbt", "relieff"}, {"rf", "relieff"}, {"knn", "relieff"}};
    bool baselines = true;

    // majority | weighted | dynamic_weights | dynamic_threshold (class pipeline)
    // mean_risk (reg pipeline)
    std::vector<std::string> ensemble_strategies;
    std::array<matrix_row, 3> ensemble_members{
        {{"gbt", "relieff"}, {"rf", "relieff"}, {"knn", "relieff"}}};

    resample_plan resample;       // mode/inflate; seed acts as a salt per instance
    predictor_config predictor;   // hyperparameter defaults; algorithm set per cell
    relieff_config relieff;
    std::vector<int> knn_k_sweep{1, 2, 3, 4, 5};
    std::vector<double> alarm_thresholds{0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
                                         0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90};
};

namespace detail {

inline bool known_reduction(std::string_view r) {
    return r == "none" || r == "relieff" || r == "pca";
}

inline bool known_strategy(std::string_view s) {
    return s == "majority" || s == "weighted" || s == "dynamic_weights" ||
           s == "dynamic_threshold" || s == "mean_risk";
}

}  // namespace detail

inline void validate(const experiment_config& cfg) {
    if (cfg.seeds.empty()) throw std::invalid_argument("experiment: seed list is empty");
    if (cfg.datasets.empty()) throw std::invalid_argument("experiment: no datasets");
    if (cfg.settings.empty()) throw std::invalid_argument("experiment: no settings");
    for (const auto& d : cfg.datasets) preset(d);
    for (const auto& s : cfg.settings) settings_preset(s);
    if (cfg.pipeline != "class" && cfg.pipeline != "reg")
        throw std::invalid_argument("experiment: pipeline must be class or reg");
    if (cfg.mode != "paper-replication" && cfg.mode != "honest-validation")
        throw std::invalid_argument("experiment: unknown mode " + cfg.mode);
    if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 0.9))
        throw std::invalid_argument("experiment: validation_fraction outside (0, 0.9)");
    if (cfg.out_dir.empty()) throw std::invalid_argument("experiment: out_dir is empty");
    auto check_row = [](const matrix_row& r) {
        predictor_config pc;
        pc.algorithm = r.algorithm;
        validate(pc);
        if (!detail::known_reduction(r.reduction))
            throw std::invalid_argument("experiment: unknown reduction " + r.reduction);
    };
    for (const auto& r : cfg.rows) check_row(r);
    for (const auto& r : cfg.ensemble_members) check_row(r);
    for (const auto& s : cfg.ensemble_strategies)
        if (!detail::known_strategy(s))
            throw std::invalid_argument("experiment: unknown ensemble strategy " + s);
    if (cfg.knn_k_sweep.empty()) throw std::invalid_argument("experiment: empty knn sweep");
    for (int k : cfg.knn_k_sweep)
        if (k < 1 || k > 5) throw std::invalid_argument("experiment: knn sweep outside [1,5]");
    if (cfg.alarm_thresholds.empty())
        throw std::invalid_argument("experiment: empty alarm threshold sweep");
    for (double t : cfg.alarm_thresholds)
        if (!(t > 0.0 && t < 1.0))
            throw std::invalid_argument("experiment: alarm thresholds must lie in (0,1)");
    if (cfg.resample.mode != "none" && cfg.resample.mode != "undersample" &&
        cfg.resample.mode != "oversample")
        throw std::invalid_argument("experiment: unknown resample mode " + cfg.resample.mode);
    if (cfg.resample.inflate_factor < 1)
        throw std::invalid_argument("experiment: inflate_factor < 1");
}

// ---------------------------------------------------------------------------
// Results model

struct cell_id {
    std::string dataset;
    std::string setting;
    std::string pipeline;
    std::string algorithm;  // predictor name, baseline name, or "ensemble"
    std::string reduction;
    std::string resample;
    std::string strategy;  // non-empty only for ensemble rows
};

inline bool operator==(const cell_id& a, const cell_id& b) {
    return a.dataset == b.dataset && a.setting == b.setting && a.pipeline == b.pipeline &&
           a.algorithm == b.algorithm && a.reduction == b.reduction && a.resample == b.resample &&
           a.strategy == b.strategy;
}

struct chosen_tuning {
    double kept_fraction = 1.0;
    int knn_k = 0;                 // 0 when the algorithm has no k
    double alarm_threshold = 0.5;
    double mean_tuning_f1 = std::numeric_limits<double>::quiet_NaN();
};

struct cell_result {
    cell_id id;
    std::vector<double> per_seed_f1;       // empty on error
    double mean_f1 = std::numeric_limits<double>::quiet_NaN();
    double min_f1 = std::numeric_limits<double>::quiet_NaN();
    chosen_tuning chosen;
    std::vector<std::size_t> kept_counts;  // per seed, post-reduction width
    std::uint64_t tuning_hash = 0;         // hash of everything tuning was allowed to see
    bool oracle = false;                   // strategy fit on the instance it scores
    std::string error;
};

struct results_table {
    std::string mode;
    std::vector<std::uint64_t> seeds;
    std::vector<cell_result> rows;
};

namespace detail {

inline bool eq_nan(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

inline bool eq_nan(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!eq_nan(a[i], b[i])) return false;
    return true;
}

}  // namespace detail

inline bool operator==(const chosen_tuning& a, const chosen_tuning& b) {
    return detail::eq_nan(a.kept_fraction, b.kept_fraction) && a.knn_k == b.knn_k &&
           detail::eq_nan(a.alarm_threshold, b.alarm_threshold) &&
           detail::eq_nan(a.mean_tuning_f1, b.mean_tuning_f1);
}

inline bool operator==(const cell_result& a, const cell_result& b) {
    return a.id == b.id && detail::eq_nan(a.per_seed_f1, b.per_seed_f1) &&
           detail::eq_nan(a.mean_f1, b.mean_f1) && detail::eq_nan(a.min_f1, b.min_f1) &&
           a.chosen == b.chosen && a.kept_counts == b.kept_counts &&
           a.tuning_hash == b.tuning_hash && a.oracle == b.oracle && a.error == b.error;
}

inline bool operator==(const results_table& a, const results_table& b) {
    return a.mode == b.mode && a.seeds == b.seeds && a.rows == b.rows;
}

// ---------------------------------------------------------------------------
// Hashing and caching

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

class byte_hasher {
public:
    void feed(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= b[i];
            h_ *= 1099511628211ull;
        }
    }
    void feed(const std::vector<double>& v) {
        feed_size(v.size());
        feed(v.data(), v.size() * sizeof(double));
    }
    void feed(const matrix& m) {
        feed_size(m.rows());
        feed_size(m.cols());
        feed(m.data().data(), m.data().size() * sizeof(double));
    }
    void feed_size(std::size_t n) {
        const auto v = static_cast<std::uint64_t>(n);
        feed(&v, sizeof v);
    }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 1469598103934665603ull;
};

}  // namespace detail

// Content-addressed cache for the expensive reducer fits. The three member
// cells of one instance share identical training matrices, so relieff weights
// and pca projections are computed once per instance instead of once per cell.
class reducer_cache {
public:
    std::shared_ptr<const std::vector<double>>
    relieff(std::uint64_t key, const std::function<std::vector<double>()>& compute) {
        return get(weights_, key, compute);
    }

    std::shared_ptr<const projection>
    pca(std::uint64_t key, const std::function<projection()>& compute) {
        return get(projections_, key, compute);
    }

private:
    template <typename Map, typename F>
    auto get(Map& map, std::uint64_t key, const F& compute) -> typename Map::mapped_type {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = map.find(key);
            if (it != map.end()) return it->second;
        }
        auto value = std::make_shared<const typename Map::mapped_type::element_type>(compute());
        std::lock_guard<std::mutex> lock(mutex_);
        auto [it, inserted] = map.emplace(key, std::move(value));
        return it->second;  // a racing first insert wins; values are identical anyway
    }

    std::mutex mutex_;
    std::unordered_map<std::uint64_t, std::shared_ptr<const std::vector<double>>> weights_;
    std::unordered_map<std::uint64_t, std::shared_ptr<const projection>> projections_;
};

// ---------------------------------------------------------------------------
// Per-instance data assembly

struct split_log {
    event_log train;
    event_log test;
    std::uint64_t seed = 0;
};

inline std::vector<split_log> generate_splits(const std::string& dataset,
                                              const std::vector<std::uint64_t>& seeds) {
    const generator_spec spec = preset(dataset);
    std::vector<split_log> out;
    out.reserve(seeds.size());
    for (std::uint64_t s : seeds) {
        auto [log, plan] = generate(spec, s);
        auto [train, test] = split_train_test(log, spec.s_tr, spec.s_te);
        out.push_back({std::move(train), std::move(test), s});
    }
    return out;
}

namespace detail {

struct sample_matrix {
    matrix X;
    std::vector<double> y;
    std::vector<int> anchors;
};

inline sample_matrix to_matrix(const std::vector<labeled_sample>& samples, std::size_t width) {
    sample_matrix out;
    out.X = matrix(0, width);
    for (const labeled_sample& s : samples) {
        out.X.push_row(s.features);
        out.y.push_back(s.label);
        out.anchors.push_back(s.anchor_day);
    }
    return out;
}

}  // namespace detail

// Everything one (dataset instance, setting) pair exposes to fitting and
// scoring. fit_* is what tuning-time fits see (resampled; in honest mode only
// the leading train share), full_* is what the final refit sees, tune_* is the
// split tunings are ranked on and test_* is the held-out evaluation. In
// paper-replication mode fit == full and tune == test.
struct instance_data {
    matrix fit_X, full_X, tune_X, test_X;
    std::vector<double> fit_y, full_y, tune_y, test_y;
    std::vector<int> tune_anchors, test_anchors;
    std::vector<episode> tune_episodes, test_episodes;
    period_spec periods;
    std::uint64_t instance_seed = 0;
    std::uint64_t tuning_hash = 0;  // covers fit_* and tune_* bytes only
};

// Feature width of the instance without featurizing it; the regression width
// needs only the pruning passes.
inline std::size_t instance_width(const experiment_config& cfg, const split_log& split,
                                  const std::string& setting) {
    const window_spec w = settings_preset(setting);
    if (cfg.pipeline == "class")
        return static_cast<std::size_t>(split.train.ft) * (static_cast<std::size_t>(w.X) + 5) + 2;
    const regression_config rcfg = regression_config_for(w);
    const auto target_count = split_episodes(split.train).size();
    if (target_count == 0) throw std::runtime_error("instance: train split has no targets");
    return intersect_kept(prune_rare(split.train, static_cast<int>(target_count),
                                     rcfg.rare_min_ratio),
                          prune_frequent(split.train, rcfg.frequent_max_day_fraction))
        .size();
}

inline instance_data build_instance(const experiment_config& cfg, const split_log& split,
                                    const std::string& setting) {
    const window_spec w = settings_preset(setting);
    instance_data inst;
    inst.instance_seed = split.seed;
    inst.periods = period_spec_for(w);
    inst.test_episodes = split_episodes(split.test);

    std::vector<labeled_sample> train_samples, test_samples;
    std::size_t width = 0;
    if (cfg.pipeline == "class") {
        const auto refs = collect_positive_refs(split.train, w);
        train_samples = build_dataset(split.train, w, refs, true);
        test_samples = build_dataset(split.test, w, refs);
        width = static_cast<std::size_t>(split.train.ft) * (static_cast<std::size_t>(w.X) + 5) + 2;
    } else {
        const regression_config rcfg = regression_config_for(w);
        const risk_curve_spec curve = default_risk_curve(w);
        const auto target_count = split_episodes(split.train).size();
        if (target_count == 0) throw std::runtime_error("instance: train split has no targets");
        const std::vector<int> kept =
            intersect_kept(prune_rare(split.train, static_cast<int>(target_count),
                                      rcfg.rare_min_ratio),
                           prune_frequent(split.train, rcfg.frequent_max_day_fraction));
        train_samples = build_regression_dataset(split.train, kept, rcfg, curve, false);
        test_samples = build_regression_dataset(split.test, kept, rcfg, curve, true);
        width = kept.size();
    }
    if (train_samples.empty()) throw std::runtime_error("instance: no training samples");
    if (test_samples.empty()) throw std::runtime_error("instance: no test samples");

    resample_plan plan = cfg.resample;
    plan.seed = detail::mix64(detail::mix64(split.seed, detail::fnv1a64("resample")),
                              cfg.resample.seed);

    const detail::sample_matrix train = detail::to_matrix(train_samples, width);
    const detail::sample_matrix test = detail::to_matrix(test_samples, width);
    inst.test_X = test.X;
    inst.test_y = test.y;
    inst.test_anchors = test.anchors;

    std::tie(inst.full_X, inst.full_y) = resample(train.X, train.y, plan);
    if (cfg.mode == "paper-replication") {
        inst.fit_X = inst.full_X;
        inst.fit_y = inst.full_y;
        inst.tune_X = test.X;
        inst.tune_y = test.y;
        inst.tune_anchors = test.anchors;
        inst.tune_episodes = inst.test_episodes;
    } else {
        const auto n = train.X.rows();
        const auto cut = static_cast<std::size_t>(
            std::floor(static_cast<double>(n) * (1.0 - cfg.validation_fraction)));
        if (cut == 0 || cut >= n)
            throw std::runtime_error("instance: train split too small for a validation tail");
        std::vector<std::size_t> head(cut), tail(n - cut);
        for (std::size_t i = 0; i < cut; ++i) head[i] = i;
        for (std::size_t i = cut; i < n; ++i) tail[i - cut] = i;
        const matrix head_X = train.X.select_rows(head);
        std::vector<double> head_y(train.y.begin(),
                                   train.y.begin() + static_cast<std::ptrdiff_t>(cut));
        std::tie(inst.fit_X, inst.fit_y) = resample(head_X, head_y, plan);
        inst.tune_X = train.X.select_rows(tail);
        inst.tune_y.assign(train.y.begin() + static_cast<std::ptrdiff_t>(cut), train.y.end());
        inst.tune_anchors.assign(train.anchors.begin() + static_cast<std::ptrdiff_t>(cut),
                                 train.anchors.end());
        // only episodes the validation anchors can reach; earlier ones would
        // count as misses for every candidate alike
        const int front = inst.tune_anchors.front();
        for (const episode& ep : split_episodes(split.train))
            if (ep.target_day >= front) inst.tune_episodes.push_back(ep);
    }

    detail::byte_hasher h;
    h.feed(inst.fit_X);
    h.feed(inst.fit_y);
    h.feed(inst.tune_X);
    h.feed(inst.tune_y);
    inst.tuning_hash = h.digest();
    return inst;
}

// ---------------------------------------------------------------------------
// Member cells

struct member_seed_outcome {
    double test_f1 = 0.0;
    double tuning_f1 = 0.0;                // chosen candidate, tuning split
    std::vector<prediction> trace;         // test alarms at the chosen tuning
    std::vector<double> test_scores;       // raw scores on the test split
    std::vector<double> tune_scores;       // raw scores on the tuning split (tuning-time fit)
    std::vector<int> test_anchors, tune_anchors;
    std::vector<episode> test_episodes, tune_episodes;
    std::size_t kept_count = 0;
};

struct member_cell_outcome {
    chosen_tuning chosen;
    std::vector<member_seed_outcome> per_seed;
    period_spec periods;
    std::uint64_t tuning_hash = 0;  // chained across seeds
    std::string error;
};

namespace detail {

inline double episode_f1(const std::vector<int>& anchors, const std::vector<double>& scores,
                         double threshold, const std::vector<episode>& episodes,
                         const period_spec& periods) {
    std::vector<prediction> trace(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i)
        trace[i] = {anchors[i], scores[i] >= threshold ? 1 : 0};
    return score(trace, episodes, periods).f1;
}

struct tuning_candidate {
    std::size_t fraction_index = 0;
    double fraction = 1.0;
    int knn_k = 0;
    double threshold = 0.5;
};

// On equal mean score: fewer features, then the larger (quieter) threshold,
// then the smaller k.
inline bool candidate_preferred(const tuning_candidate& a, const tuning_candidate& b) {
    if (a.fraction != b.fraction) return a.fraction < b.fraction;
    if (a.threshold != b.threshold) return a.threshold > b.threshold;
    return a.knn_k < b.knn_k;
}

struct fitted_reducer {
    reducer red;
    std::size_t kept_count = 0;
};

// Reducer for one (instance, fraction) pair, through the content cache.
inline fitted_reducer make_reducer(const std::string& method, const instance_data& inst,
                                   const relieff_config& rcfg, double fraction,
                                   reducer_cache& cache) {
    const std::size_t dims = inst.fit_X.cols();
    fitted_reducer out;
    out.red.method = method;
    if (method == "none") {
        out.kept_count = dims;
        return out;
    }
    const auto kept =
        static_cast<std::size_t>(std::floor(static_cast<double>(dims) * fraction + 1e-9));
    byte_hasher h;
    h.feed(inst.fit_X);
    h.feed(inst.fit_y);
    h.feed(method.data(), method.size());
    if (method == "relieff") {
        h.feed_size(static_cast<std::size_t>(rcfg.k_neighbors));
        h.feed_size(rcfg.sample_count);
        h.feed(&rcfg.class_threshold, sizeof(double));
        h.feed_size(rcfg.seed);
        const auto weights = cache.relieff(
            h.digest(), [&] { return relieff_weights(inst.fit_X, inst.fit_y, rcfg); });
        out.red.weights = *weights;
        out.red.keep = top_features(*weights, kept);
        out.kept_count = out.red.keep.size();
    } else {
        const auto proj = cache.pca(h.digest(), [&] { return pca_fit(inst.fit_X); });
        out.red.proj = *proj;
        out.red.proj.kept = std::min(kept, proj->basis.rows());
        out.kept_count = out.red.proj.kept;
    }
    return out;
}

}  // namespace detail

// Fits one predictor matrix row over every seed of one dataset and setting.
// The candidate grid (reduction fraction x knn k x alarm threshold) is shared
// across seeds and the winner maximizes the mean tuning score, mirroring a
// protocol that picks one configuration for the whole instance batch.
inline member_cell_outcome run_member_cell(const experiment_config& cfg,
                                           const std::vector<split_log>& splits,
                                           const std::string& setting,
                                           const std::string& algorithm,
                                           const std::string& reduction,
                                           reducer_cache& cache) {
    member_cell_outcome out;
    out.periods = period_spec_for(settings_preset(setting));
    try {
        if (splits.empty()) throw std::invalid_argument("member cell: no instances");
        const bool classify = cfg.pipeline == "class";

        // axis 1: shared fraction grid (the shortest per-seed grid wins)
        std::vector<double> fractions{1.0};
        if (reduction != "none") {
            std::size_t shortest = std::numeric_limits<std::size_t>::max();
            for (const split_log& split : splits)
                shortest =
                    std::min(shortest, reduction_grid(instance_width(cfg, split, setting)).size());
            if (shortest == 0 || shortest == std::numeric_limits<std::size_t>::max())
                throw std::runtime_error("member cell: too few features to search");
            fractions.clear();
            double f = 1.0;
            for (std::size_t i = 0; i < shortest; ++i, f *= 0.8) fractions.push_back(f);
        }
        // axis 2: per-algorithm hyperparameters
        const std::vector<int> ks = algorithm == "knn" ? cfg.knn_k_sweep : std::vector<int>{0};
        // axis 3: alarm threshold, fixed for classification
        std::vector<double> thresholds = classify ? std::vector<double>{0.5}
                                                  : cfg.alarm_thresholds;
        std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
        thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

        std::vector<detail::tuning_candidate> candidates;
        for (std::size_t fi = 0; fi < fractions.size(); ++fi)
            for (int k : ks)
                for (double t : thresholds) candidates.push_back({fi, fractions[fi], k, t});

        // pass 1: tuning scores, one instance in memory at a time
        std::vector<std::vector<double>> cand_f1(splits.size());
        for (std::size_t s = 0; s < splits.size(); ++s) {
            const instance_data inst = build_instance(cfg, splits[s], setting);
            out.tuning_hash = detail::mix64(out.tuning_hash, inst.tuning_hash);
            auto& f1s = cand_f1[s];
            f1s.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());
            std::size_t c = 0;
            for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
                detail::fitted_reducer fr;
                matrix rfit, rtune;
                bool reducer_ok = true;
                try {
                    fr = detail::make_reducer(reduction, inst, cfg.relieff, fractions[fi], cache);
                    rfit = fr.red.apply(inst.fit_X);
                    rtune = fr.red.apply(inst.tune_X);
                } catch (const std::exception&) {
                    reducer_ok = false;
                }
                for (int k : ks) {
                    std::vector<double> scores;
                    bool fit_ok = reducer_ok;
                    if (fit_ok) {
                        try {
                            predictor_config pc = cfg.predictor;
                            pc.algorithm = algorithm;
                            pc.classification = classify;
                            pc.seed = detail::mix64(inst.instance_seed,
                                                    detail::fnv1a64(algorithm));
                            if (k > 0) pc.knn_k = k;
                            scores = predict(fit(pc, rfit, inst.fit_y), rtune);
                        } catch (const std::exception&) {
                            fit_ok = false;
                        }
                    }
                    for (double t : thresholds) {
                        if (fit_ok)
                            f1s[c] = detail::episode_f1(inst.tune_anchors, scores, t,
                                                        inst.tune_episodes, inst.periods);
                        ++c;
                    }
                }
            }
        }

        // selection: highest mean across seeds; candidates broken on any seed drop out
        std::size_t best = candidates.size();
        double best_mean = 0.0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            double sum = 0.0;
            bool ok = true;
            for (const auto& f1s : cand_f1) {
                ok = ok && !std::isnan(f1s[c]);
                if (!ok) break;
                sum += f1s[c];
            }
            if (!ok) continue;
            const double mean = sum / static_cast<double>(splits.size());
            if (best == candidates.size() || mean > best_mean ||
                (mean == best_mean &&
                 detail::candidate_preferred(candidates[c], candidates[best]))) {
                best = c;
                best_mean = mean;
            }
        }
        if (best == candidates.size())
            throw std::runtime_error("member cell: every tuning candidate failed");
        const detail::tuning_candidate& won = candidates[best];
        out.chosen.kept_fraction = won.fraction;
        out.chosen.knn_k = won.knn_k;
        out.chosen.alarm_threshold = won.threshold;
        out.chosen.mean_tuning_f1 = best_mean;

        // pass 2: final fit and held-out evaluation at the winning candidate
        for (std::size_t s = 0; s < splits.size(); ++s) {
            const instance_data inst = build_instance(cfg, splits[s], setting);
            const detail::fitted_reducer fr =
                detail::make_reducer(reduction, inst, cfg.relieff, won.fraction, cache);
            predictor_config pc = cfg.predictor;
            pc.algorithm = algorithm;
            pc.classification = classify;
            pc.seed = detail::mix64(inst.instance_seed, detail::fnv1a64(algorithm));
            if (won.knn_k > 0) pc.knn_k = won.knn_k;

            member_seed_outcome seed_out;
            seed_out.kept_count = fr.kept_count;
            seed_out.test_anchors = inst.test_anchors;
            seed_out.tune_anchors = inst.tune_anchors;
            seed_out.test_episodes = inst.test_episodes;
            seed_out.tune_episodes = inst.tune_episodes;

            const fitted_model tuned = fit(pc, fr.red.apply(inst.fit_X), inst.fit_y);
            seed_out.tune_scores = predict(tuned, fr.red.apply(inst.tune_X));
            seed_out.tuning_f1 = cand_f1[s][best];

            const fitted_model final_model = fit(pc, fr.red.apply(inst.full_X), inst.full_y);
            seed_out.test_scores = predict(final_model, fr.red.apply(inst.test_X));
            seed_out.trace.resize(inst.test_anchors.size());
            for (std::size_t i = 0; i < inst.test_anchors.size(); ++i)
                seed_out.trace[i] = {inst.test_anchors[i],
                                     seed_out.test_scores[i] >= won.threshold ? 1 : 0};
            seed_out.test_f1 = score(seed_out.trace, inst.test_episodes, inst.periods).f1;
            out.per_seed.push_back(std::move(seed_out));
        }
    } catch (const std::exception& e) {
        out.per_seed.clear();
        out.error = e.what();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Baseline and ensemble cells

namespace detail {

// Baselines never train, so they only need the test-side geometry.
inline std::vector<int> test_anchor_days(const split_log& split, const std::string& setting,
                                         const std::string& pipeline) {
    const window_spec w = settings_preset(setting);
    std::vector<int> anchors;
    if (pipeline == "class") {
        for (const window_slice& s : slice_windows(split.test, w)) anchors.push_back(s.anchor_day);
    } else {
        for (const labeled_sample& s :
             build_regression_dataset(split.test, {}, regression_config_for(w),
                                      default_risk_curve(w), true))
            anchors.push_back(s.anchor_day);
    }
    return anchors;
}

}  // namespace detail

inline cell_result run_baseline_cell(const experiment_config& cfg,
                                     const std::vector<split_log>& splits,
                                     const std::string& dataset, const std::string& setting,
                                     baseline_kind kind) {
    cell_result cell;
    cell.id = {dataset, setting, cfg.pipeline,
               kind == baseline_kind::all_true ? "all_true" : "random",
               "none", "none", ""};
    try {
        const period_spec periods = period_spec_for(settings_preset(setting));
        for (const split_log& split : splits) {
            const std::vector<int> anchors = detail::test_anchor_days(split, setting,
                                                                      cfg.pipeline);
            const std::uint64_t seed = detail::mix64(split.seed, detail::fnv1a64("random"));
            const auto trace = baseline_trace(kind, anchors, seed);
            cell.per_seed_f1.push_back(score(trace, split_episodes(split.test), periods).f1);
        }
    } catch (const std::exception& e) {
        cell.per_seed_f1.clear();
        cell.error = e.what();
    }
    return cell;
}

namespace detail {

inline void check_members_aligned(const member_cell_outcome& a, const member_cell_outcome& b,
                                  const member_cell_outcome& c, std::size_t seeds) {
    for (const auto* m : {&a, &b, &c}) {
        if (!m->error.empty()) throw std::runtime_error("ensemble member failed: " + m->error);
        if (m->per_seed.size() != seeds)
            throw std::runtime_error("ensemble member is missing seeds");
    }
    for (std::size_t s = 0; s < seeds; ++s)
        if (a.per_seed[s].test_anchors != b.per_seed[s].test_anchors ||
            a.per_seed[s].test_anchors != c.per_seed[s].test_anchors)
            throw std::runtime_error("ensemble members disagree on anchors");
}

}  // namespace detail

// Combines three already-fitted member cells under one strategy. The vote
// strategies need the class pipeline; mean_risk needs reg. Dynamic strategies
// are fit on the instance they score and are flagged oracle.
inline cell_result run_ensemble_cell(const experiment_config& cfg, const std::string& dataset,
                                     const std::string& setting, const std::string& strategy,
                                     const member_cell_outcome& m0,
                                     const member_cell_outcome& m1,
                                     const member_cell_outcome& m2) {
    cell_result cell;
    cell.id = {dataset, setting, cfg.pipeline, "ensemble", "none", cfg.resample.mode, strategy};
    cell.oracle = strategy == "dynamic_weights" || strategy == "dynamic_threshold";
    try {
        const bool vote_strategy = strategy != "mean_risk";
        if (vote_strategy && cfg.pipeline != "class")
            throw std::runtime_error("vote ensembles need the class pipeline");
        if (!vote_strategy && cfg.pipeline != "reg")
            throw std::runtime_error("mean_risk needs the reg pipeline");
        detail::check_members_aligned(m0, m1, m2, cfg.seeds.size());

        if (strategy == "mean_risk") {
            // shared threshold chosen like any other tuning: best mean across seeds
            std::vector<double> thresholds = cfg.alarm_thresholds;
            std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
            thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                             thresholds.end());
            double best_mean = -1.0, best_t = thresholds.front();
            for (double t : thresholds) {
                double sum = 0.0;
                for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
                    const auto& a = m0.per_seed[s];
                    const auto combined = mean_risk(a.tune_scores, m1.per_seed[s].tune_scores,
                                                    m2.per_seed[s].tune_scores);
                    sum += detail::episode_f1(a.tune_anchors, combined, t, a.tune_episodes,
                                              m0.periods);
                }
                const double mean = sum / static_cast<double>(cfg.seeds.size());
                if (mean > best_mean) {
                    best_mean = mean;
                    best_t = t;
                }
            }
            cell.chosen.alarm_threshold = best_t;
            cell.chosen.mean_tuning_f1 = best_mean;
            for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
                const auto& a = m0.per_seed[s];
                const auto combined = mean_risk(a.test_scores, m1.per_seed[s].test_scores,
                                                m2.per_seed[s].test_scores);
                cell.per_seed_f1.push_back(detail::episode_f1(a.test_anchors, combined, best_t,
                                                              a.test_episodes, m0.periods));
            }
            return cell;
        }

        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            const auto& a = m0.per_seed[s];
            vote_matrix vm;
            vm.rows.resize(a.test_anchors.size());
            for (std::size_t i = 0; i < vm.rows.size(); ++i)
                vm.rows[i] = {a.trace[i].alarm, m1.per_seed[s].trace[i].alarm,
                              m2.per_seed[s].trace[i].alarm};
            vm.member_f1 = {a.tuning_f1, m1.per_seed[s].tuning_f1, m2.per_seed[s].tuning_f1};
            const ensemble_context ctx{a.test_anchors, a.test_episodes, m0.periods};

            double f1 = 0.0;
            if (strategy == "majority" || strategy == "weighted") {
                std::array<double, 3> w{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
                if (strategy == "weighted") w = f1_weights(vm.member_f1);
                std::vector<prediction> trace(vm.rows.size());
                for (std::size_t i = 0; i < vm.rows.size(); ++i)
                    trace[i] = {ctx.anchors[i], strategy == "majority"
                                                    ? simple_majority(vm.rows[i])
                                                    : weighted_vote(vm.rows[i], w)};
                f1 = score(trace, ctx.episodes, ctx.periods).f1;
            } else if (strategy == "dynamic_weights") {
                f1 = fit_dynamic_weights(vm, ctx).f1;
            } else {
                f1 = best_dynamic_threshold(vm, ctx).f1;
            }
            cell.per_seed_f1.push_back(f1);
        }
    } catch (const std::exception& e) {
        cell.per_seed_f1.clear();
        cell.error = e.what();
    }
    return cell;
}

// ---------------------------------------------------------------------------
// Orchestration

namespace detail {

inline std::size_t worker_count(std::size_t jobs) {
    std::size_t w = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("PDM_BENCH_WORKERS"); env && *env) {
        char* end = nullptr;
        const unsigned long parsed = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && parsed >= 1) w = parsed;
    }
    if (w < 1) w = 1;
    return std::min(w, std::max<std::size_t>(jobs, 1));
}

// Bounded pool over a fixed job list. Jobs write only to their own slots, so
// scheduling order never shows in the results.
inline void run_jobs(std::vector<std::function<void()>>& jobs) {
    const std::size_t workers = worker_count(jobs.size());
    if (workers <= 1) {
        for (auto& job : jobs) job();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                jobs[i]();
            }
        });
    for (auto& t : pool) t.join();
}

inline void aggregate(cell_result& cell) {
    if (!cell.error.empty() || cell.per_seed_f1.empty()) return;
    double sum = 0.0, mn = cell.per_seed_f1.front();
    for (double v : cell.per_seed_f1) {
        sum += v;
        mn = std::min(mn, v);
    }
    cell.mean_f1 = sum / static_cast<double>(cell.per_seed_f1.size());
    cell.min_f1 = mn;
}

}  // namespace detail

inline results_table run_experiment(const experiment_config& cfg) {
    validate(cfg);
    results_table table;
    table.mode = cfg.mode;
    table.seeds = cfg.seeds;

    std::unordered_map<std::string, std::vector<split_log>> splits;
    for (const std::string& d : cfg.datasets) splits.emplace(d, generate_splits(d, cfg.seeds));

    // the member work set: requested rows plus any ensemble members not among them
    std::vector<matrix_row> members = cfg.rows;
    if (!cfg.ensemble_strategies.empty())
        for (const matrix_row& m : cfg.ensemble_members)
            if (std::find(members.begin(), members.end(), m) == members.end())
                members.push_back(m);

    struct member_slot {
        std::string dataset, setting;
        matrix_row row;
        member_cell_outcome outcome;
    };
    std::vector<member_slot> slots;
    for (const std::string& d : cfg.datasets)
        for (const std::string& s : cfg.settings)
            for (const matrix_row& m : members) slots.push_back({d, s, m, {}});

    reducer_cache cache;
    std::vector<std::function<void()>> jobs;
    jobs.reserve(slots.size());
    for (member_slot& slot : slots)
        jobs.emplace_back([&cfg, &splits, &slot, &cache] {
            slot.outcome = run_member_cell(cfg, splits.at(slot.dataset), slot.setting,
                                           slot.row.algorithm, slot.row.reduction, cache);
        });
    detail::run_jobs(jobs);

    auto outcome_of = [&slots](const std::string& d, const std::string& s,
                               const matrix_row& m) -> const member_cell_outcome& {
        for (const member_slot& slot : slots)
            if (slot.dataset == d && slot.setting == s && slot.row == m) return slot.outcome;
        throw std::logic_error("member outcome not computed");
    };

    for (const std::string& d : cfg.datasets)
        for (const std::string& s : cfg.settings) {
            for (const matrix_row& m : cfg.rows) {
                const member_cell_outcome& mo = outcome_of(d, s, m);
                cell_result cell;
                cell.id = {d, s, cfg.pipeline, m.algorithm, m.reduction, cfg.resample.mode, ""};
                cell.error = mo.error;
                cell.chosen = mo.chosen;
                cell.tuning_hash = mo.tuning_hash;
                for (const member_seed_outcome& so : mo.per_seed) {
                    cell.per_seed_f1.push_back(so.test_f1);
                    cell.kept_counts.push_back(so.kept_count);
                }
                table.rows.push_back(std::move(cell));
            }
            for (const std::string& strat : cfg.ensemble_strategies)
                table.rows.push_back(run_ensemble_cell(
                    cfg, d, s, strat, outcome_of(d, s, cfg.ensemble_members[0]),
                    outcome_of(d, s, cfg.ensemble_members[1]),
                    outcome_of(d, s, cfg.ensemble_members[2])));
            if (cfg.baselines) {
                table.rows.push_back(
                    run_baseline_cell(cfg, splits.at(d), d, s, baseline_kind::all_true));
                table.rows.push_back(
                    run_baseline_cell(cfg, splits.at(d), d, s, baseline_kind::random));
            }
        }

    for (cell_result& cell : table.rows) detail::aggregate(cell);
    return table;
}

inline bool any_cell_failed(const results_table& table) {
    for (const cell_result& cell : table.rows)
        if (!cell.error.empty()) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Declarative config file binding

inline experiment_config experiment_from_config(const config_file& file) {
    reject_unknown_sections(file, {"experiment", "matrix", "predictor", "reduction", "reg",
                                   "resample", "ensemble"});
    experiment_config cfg;

    const section_view exp(file, "experiment");
    exp.reject_unknown({"datasets", "settings", "seeds", "pipeline", "mode",
                        "validation_fraction", "out_dir"});
    cfg.datasets = exp.get_list("datasets", cfg.datasets);
    cfg.settings = exp.get_list("settings", cfg.settings);
    cfg.seeds = exp.get_seed_list("seeds", cfg.seeds);
    cfg.pipeline = exp.get_string("pipeline", cfg.pipeline);
    cfg.mode = exp.get_string("mode", cfg.mode);
    cfg.validation_fraction = exp.get_double("validation_fraction", cfg.validation_fraction);
    cfg.out_dir = exp.get_string("out_dir", cfg.out_dir);

    auto parse_row = [](const std::string& token) {
        const std::size_t plus = token.find('+');
        matrix_row row;
        row.algorithm = token.substr(0, plus);
        if (plus != std::string::npos) row.reduction = token.substr(plus + 1);
        return row;
    };

    const section_view mat(file, "matrix");
    mat.reject_unknown({"rows", "baselines"});
    if (mat.has("rows")) {  // `rows =` with no entries means baselines-only runs
        cfg.rows.clear();
        for (const std::string& tok : mat.get_list("rows", {})) cfg.rows.push_back(parse_row(tok));
    }
    cfg.baselines = mat.get_bool("baselines", cfg.baselines);

    const section_view pred(file, "predictor");
    pred.reject_unknown({"knn_k_sweep", "rf_trees", "rf_max_depth", "rf_feature_subset",
                         "rf_bootstrap", "gbt_rounds", "gbt_learning_rate", "gbt_max_depth",
                         "gbt_squared_loss", "pls_components", "mlp_epochs", "mlp_batch"});
    if (const auto ks = pred.get_seed_list("knn_k_sweep", {}); !ks.empty()) {
        cfg.knn_k_sweep.clear();
        for (std::uint64_t k : ks) cfg.knn_k_sweep.push_back(static_cast<int>(k));
    }
    predictor_config& pc = cfg.predictor;
    pc.rf_trees = static_cast<int>(pred.get_int("rf_trees", pc.rf_trees));
    pc.rf_max_depth = static_cast<int>(pred.get_int("rf_max_depth", pc.rf_max_depth));
    pc.rf_feature_subset =
        static_cast<int>(pred.get_int("rf_feature_subset", pc.rf_feature_subset));
    pc.rf_bootstrap = pred.get_bool("rf_bootstrap", pc.rf_bootstrap);
    pc.gbt_rounds = static_cast<int>(pred.get_int("gbt_rounds", pc.gbt_rounds));
    pc.gbt_learning_rate = pred.get_double("gbt_learning_rate", pc.gbt_learning_rate);
    pc.gbt_max_depth = static_cast<int>(pred.get_int("gbt_max_depth", pc.gbt_max_depth));
    pc.gbt_squared_loss = pred.get_bool("gbt_squared_loss", pc.gbt_squared_loss);
    pc.pls_components = static_cast<int>(pred.get_int("pls_components", pc.pls_components));
    pc.mlp_epochs = static_cast<int>(pred.get_int("mlp_epochs", pc.mlp_epochs));
    pc.mlp_batch = static_cast<int>(pred.get_int("mlp_batch", pc.mlp_batch));

    const section_view red(file, "reduction");
    red.reject_unknown({"relieff_k", "relieff_sample_count", "relieff_seed"});
    cfg.relieff.k_neighbors =
        static_cast<int>(red.get_int("relieff_k", cfg.relieff.k_neighbors));
    if (const long long sc = red.get_int("relieff_sample_count", -1); sc >= 0)
        cfg.relieff.sample_count = static_cast<std::size_t>(sc);
    cfg.relieff.seed = static_cast<std::uint64_t>(red.get_int("relieff_seed", 0));

    const section_view reg(file, "reg");
    reg.reject_unknown({"alarm_thresholds"});
    cfg.alarm_thresholds = reg.get_grid("alarm_thresholds", cfg.alarm_thresholds);

    const section_view res(file, "resample");
    res.reject_unknown({"mode", "inflate_factor", "seed"});
    cfg.resample.mode = res.get_string("mode", cfg.resample.mode);
    cfg.resample.inflate_factor =
        static_cast<int>(res.get_int("inflate_factor", cfg.resample.inflate_factor));
    cfg.resample.seed = static_cast<std::uint64_t>(res.get_int("seed", 0));

    const section_view ens(file, "ensemble");
    ens.reject_unknown({"strategies", "members"});
    cfg.ensemble_strategies = ens.get_list("strategies", cfg.ensemble_strategies);
    if (const auto toks = ens.get_list("members", {}); !toks.empty()) {
        if (toks.size() != 3)
            throw config_error("config: ensemble members must list exactly 3 entries");
        for (std::size_t i = 0; i < 3; ++i) cfg.ensemble_members[i] = parse_row(toks[i]);
    }

    validate(cfg);
    return cfg;
}

}  // namespace pdm
