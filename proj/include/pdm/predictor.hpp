#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pdm/detail/matrix.hpp"
#include "pdm/predictors/baselines.hpp"
#include "pdm/predictors/gbt.hpp"
#include "pdm/predictors/knn.hpp"
#include "pdm/predictors/mlp.hpp"
#include "pdm/predictors/pls.hpp"
#include "pdm/predictors/rf.hpp"

namespace pdm {

// One config covers every algorithm; only the block matching `algorithm` is
// read. Seed feeds whichever rng the algorithm uses.
struct predictor_config {
    std::string algorithm = "gbt";  // knn | rf | gbt | pls | mlp | random | all_true
    bool classification = true;

    int knn_k = 3;

    int rf_trees = 200;
    int rf_max_depth = 12;
    int rf_feature_subset = 0;  // 0 = sqrt(dims)
    bool rf_bootstrap = true;

    int gbt_rounds = 200;
    double gbt_learning_rate = 0.1;
    int gbt_max_depth = 4;
    bool gbt_squared_loss = false;  // classification may opt out of the logistic objective

    int pls_components = 8;

    int mlp_epochs = 150;
    int mlp_batch = 32;

    std::uint64_t seed = 0;
};

inline void validate(const predictor_config& cfg) {
    const bool known = cfg.algorithm == "knn" || cfg.algorithm == "rf" || cfg.algorithm == "gbt" ||
                       cfg.algorithm == "pls" || cfg.algorithm == "mlp" ||
                       cfg.algorithm == "random" || cfg.algorithm == "all_true";
    if (!known) throw std::invalid_argument("unknown algorithm: " + cfg.algorithm);
    if (cfg.knn_k < 1 || cfg.knn_k > 5) throw std::invalid_argument("knn_k outside [1,5]");
    if (cfg.rf_trees < 1 || cfg.gbt_rounds < 0 || cfg.pls_components < 0 || cfg.mlp_epochs < 0 ||
        cfg.mlp_batch < 1)
        throw std::invalid_argument("predictor counts must be positive");
}

struct random_model {
    std::uint64_t seed = 0;
};
struct all_true_model {};

struct fitted_model {
    std::string algorithm;
    bool classification = true;
    std::variant<knn_model, rf_model, gbt_model, pls_model, mlp_model, random_model,
                 all_true_model>
        state;
};

inline fitted_model fit(const predictor_config& cfg, const matrix& X,
                        const std::vector<double>& y) {
    validate(cfg);
    if (cfg.algorithm != "random" && cfg.algorithm != "all_true" && X.empty())
        throw std::invalid_argument("fit: empty training set");

    fitted_model m;
    m.algorithm = cfg.algorithm;
    m.classification = cfg.classification;
    if (cfg.algorithm == "knn") {
        m.state = fit_knn(X, y, cfg.knn_k);
    } else if (cfg.algorithm == "rf") {
        rf_config rc;
        rc.trees = cfg.rf_trees;
        rc.max_depth = cfg.rf_max_depth;
        rc.feature_subset = cfg.rf_feature_subset;
        rc.bootstrap = cfg.rf_bootstrap;
        m.state = fit_rf(X, y, rc, cfg.seed);
    } else if (cfg.algorithm == "gbt") {
        gbt_config gc;
        gc.rounds = cfg.gbt_rounds;
        gc.learning_rate = cfg.gbt_learning_rate;
        gc.max_depth = cfg.gbt_max_depth;
        gc.logistic = cfg.classification && !cfg.gbt_squared_loss;
        m.state = fit_gbt(X, y, gc);
    } else if (cfg.algorithm == "pls") {
        m.state = fit_pls(X, y, cfg.pls_components);
    } else if (cfg.algorithm == "mlp") {
        mlp_config mc;
        mc.epochs = cfg.mlp_epochs;
        mc.batch = cfg.mlp_batch;
        mc.logistic = cfg.classification;
        mc.seed = cfg.seed;
        m.state = fit_mlp(X, y, mc);
    } else if (cfg.algorithm == "random") {
        m.state = random_model{cfg.seed};
    } else {
        m.state = all_true_model{};
    }
    return m;
}

inline std::vector<double> predict(const fitted_model& m, const matrix& X) {
    return std::visit(
        [&X](const auto& s) -> std::vector<double> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, random_model>)
                return random_scores(X.rows(), s.seed);
            else if constexpr (std::is_same_v<T, all_true_model>)
                return all_true_scores(X.rows());
            else
                return predict(s, X);
        },
        m.state);
}

}  // namespace pdm
