#pragma once

#include <string>

#include <json.hpp>

#include "pdm/predictor.hpp"

namespace pdm {

// Versioned JSON envelope for fitted models so runner caches survive across
// runs. Doubles round-trip exactly (shortest-representation printing).
namespace detail {

using njson = nlohmann::json;

inline njson to_json(const zscore& z) { return {{"mean", z.mean}, {"scale", z.scale}}; }

inline zscore zscore_from(const njson& j) {
    zscore z;
    z.mean = j.at("mean").get<std::vector<double>>();
    z.scale = j.at("scale").get<std::vector<double>>();
    return z;
}

inline njson to_json(const matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline matrix matrix_from(const njson& j) {
    matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.rows() * m.cols()) throw std::runtime_error("model: matrix size mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) = data[i * m.cols() + c];
    return m;
}

inline njson to_json(const regression_tree& t) {
    njson nodes = njson::array();
    for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return nodes;
}

inline regression_tree tree_from(const njson& j) {
    regression_tree t;
    for (const auto& n : j) {
        tree_node nd;
        nd.feature = n.at(0).get<int>();
        nd.threshold = n.at(1).get<double>();
        nd.left = n.at(2).get<int>();
        nd.right = n.at(3).get<int>();
        nd.value = n.at(4).get<double>();
        t.nodes.push_back(nd);
    }
    return t;
}

}  // namespace detail

inline std::string save_model(const fitted_model& m) {
    using detail::njson;
    njson state;
    std::visit(
        [&state](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, knn_model>) {
                state = {{"k", s.k},
                         {"scaler", detail::to_json(s.scaler)},
                         {"train", detail::to_json(s.train)},
                         {"labels", s.labels}};
            } else if constexpr (std::is_same_v<T, rf_model>) {
                njson trees = njson::array();
                for (const auto& t : s.trees) trees.push_back(detail::to_json(t));
                state = {{"trees", std::move(trees)},
                         {"input_dim", s.input_dim},
                         {"max_depth", s.config.max_depth},
                         {"feature_subset", s.config.feature_subset},
                         {"bootstrap", s.config.bootstrap}};
            } else if constexpr (std::is_same_v<T, gbt_model>) {
                njson stages = njson::array();
                for (const auto& t : s.stages) stages.push_back(detail::to_json(t));
                state = {{"stages", std::move(stages)},
                         {"input_dim", s.input_dim},
                         {"base", s.base},
                         {"learning_rate", s.config.learning_rate},
                         {"logistic", s.config.logistic},
                         {"max_depth", s.config.max_depth},
                         {"min_leaf", s.config.min_leaf}};
            } else if constexpr (std::is_same_v<T, pls_model>) {
                state = {{"scaler", detail::to_json(s.scaler)},
                         {"y_mean", s.y_mean},
                         {"beta", s.beta},
                         {"components", s.components}};
            } else if constexpr (std::is_same_v<T, mlp_model>) {
                state = {{"scaler", detail::to_json(s.scaler)},
                         {"input_dim", s.layout.d},
                         {"logistic", s.config.logistic},
                         {"params", s.params}};
            } else if constexpr (std::is_same_v<T, random_model>) {
                state = {{"seed", s.seed}};
            } else {
                state = njson::object();
            }
        },
        m.state);
    const njson j = {{"format", "pdm-model"},
                     {"version", 1},
                     {"algorithm", m.algorithm},
                     {"task", m.classification ? "classification" : "regression"},
                     {"state", std::move(state)}};
    return j.dump();
}

inline fitted_model load_model(const std::string& text) {
    using detail::njson;
    njson j;
    try {
        j = njson::parse(text);
    } catch (const njson::parse_error& e) {
        throw std::runtime_error(std::string("model: invalid JSON: ") + e.what());
    }
    if (j.value("format", "") != "pdm-model") throw std::runtime_error("model: wrong format tag");
    if (j.value("version", 0) != 1) throw std::runtime_error("model: unsupported version");

    fitted_model m;
    m.algorithm = j.at("algorithm").get<std::string>();
    m.classification = j.at("task").get<std::string>() == "classification";
    const njson& s = j.at("state");
    if (m.algorithm == "knn") {
        knn_model k;
        k.k = s.at("k").get<int>();
        k.scaler = detail::zscore_from(s.at("scaler"));
        k.train = detail::matrix_from(s.at("train"));
        k.labels = s.at("labels").get<std::vector<double>>();
        m.state = std::move(k);
    } else if (m.algorithm == "rf") {
        rf_model r;
        r.input_dim = s.at("input_dim").get<std::size_t>();
        r.config.max_depth = s.at("max_depth").get<int>();
        r.config.feature_subset = s.at("feature_subset").get<int>();
        r.config.bootstrap = s.at("bootstrap").get<bool>();
        for (const auto& t : s.at("trees")) r.trees.push_back(detail::tree_from(t));
        r.config.trees = static_cast<int>(r.trees.size());
        m.state = std::move(r);
    } else if (m.algorithm == "gbt") {
        gbt_model g;
        g.input_dim = s.at("input_dim").get<std::size_t>();
        g.base = s.at("base").get<double>();
        g.config.learning_rate = s.at("learning_rate").get<double>();
        g.config.logistic = s.at("logistic").get<bool>();
        g.config.max_depth = s.at("max_depth").get<int>();
        g.config.min_leaf = s.at("min_leaf").get<int>();
        for (const auto& t : s.at("stages")) g.stages.push_back(detail::tree_from(t));
        g.config.rounds = static_cast<int>(g.stages.size());
        m.state = std::move(g);
    } else if (m.algorithm == "pls") {
        pls_model p;
        p.scaler = detail::zscore_from(s.at("scaler"));
        p.y_mean = s.at("y_mean").get<double>();
        p.beta = s.at("beta").get<std::vector<double>>();
        p.components = s.at("components").get<int>();
        m.state = std::move(p);
    } else if (m.algorithm == "mlp") {
        mlp_model n;
        n.scaler = detail::zscore_from(s.at("scaler"));
        n.layout.d = s.at("input_dim").get<int>();
        n.config.logistic = s.at("logistic").get<bool>();
        n.params = s.at("params").get<std::vector<double>>();
        if (n.params.size() != n.layout.total())
            throw std::runtime_error("model: mlp parameter count mismatch");
        m.state = std::move(n);
    } else if (m.algorithm == "random") {
        m.state = random_model{s.at("seed").get<std::uint64_t>()};
    } else if (m.algorithm == "all_true") {
        m.state = all_true_model{};
    } else {
        throw std::runtime_error("model: unknown algorithm " + m.algorithm);
    }
    return m;
}

}  // namespace pdm
