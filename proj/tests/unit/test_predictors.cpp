#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pdm/predictors/baselines.hpp"
#include "pdm/predictors/gbt.hpp"
#include "pdm/predictors/knn.hpp"
#include "pdm/predictors/pls.hpp"
#include "pdm/predictors/rf.hpp"

namespace {

pdm::matrix random_matrix(std::size_t n, std::size_t d, pdm::rng& r) {
    pdm::matrix m;
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : row) v = r.uniform_real(-2.0, 2.0);
        m.push_row(row);
    }
    return m;
}

std::vector<double> random_binary(std::size_t n, pdm::rng& r) {
    std::vector<double> y(n);
    for (auto& v : y) v = r.coin() ? 1.0 : 0.0;
    return y;
}

}  // namespace

TEST_CASE("knn with k=1 reproduces training labels on training points") {
    pdm::rng r(21);
    const auto X = random_matrix(40, 5, r);
    const auto y = random_binary(40, r);
    const auto m = pdm::fit_knn(X, y, 1);
    const auto p = pdm::predict(m, X);
    for (std::size_t i = 0; i < 40; ++i) REQUIRE(p[i] == y[i]);
}

TEST_CASE("knn averages the k nearest labels") {
    // 1-D points 0..4, labels 1,1,1,0,0; query at 1.0 with k=5 sees 3/5.
    pdm::matrix X;
    for (int i = 0; i < 5; ++i) X.push_row(std::vector<double>{static_cast<double>(i)});
    std::vector<double> y{1, 1, 1, 0, 0};
    const auto m = pdm::fit_knn(X, y, 5);
    pdm::matrix q;
    q.push_row(std::vector<double>{1.0});
    REQUIRE(pdm::predict(m, q)[0] == 0.6);
}

TEST_CASE("knn k larger than the training set uses everything") {
    pdm::matrix X;
    X.push_row(std::vector<double>{0.0});
    X.push_row(std::vector<double>{1.0});
    std::vector<double> y{0, 1};
    const auto m = pdm::fit_knn(X, y, 10);
    pdm::matrix q;
    q.push_row(std::vector<double>{0.2});
    REQUIRE(pdm::predict(m, q)[0] == 0.5);
}

TEST_CASE("knn standardization makes column scale irrelevant") {
    pdm::rng r(99);
    pdm::matrix X = random_matrix(30, 3, r);
    const auto y = random_binary(30, r);
    pdm::matrix Q = random_matrix(8, 3, r);

    pdm::matrix Xs = X, Qs = Q;
    for (std::size_t i = 0; i < Xs.rows(); ++i) Xs(i, 1) *= 1024.0;  // power of 2: exact
    for (std::size_t i = 0; i < Qs.rows(); ++i) Qs(i, 1) *= 1024.0;

    const auto a = pdm::predict(pdm::fit_knn(X, y, 3), Q);
    const auto b = pdm::predict(pdm::fit_knn(Xs, y, 3), Qs);
    REQUIRE(a == b);
}

TEST_CASE("rf prediction is the clamped mean of its trees") {
    pdm::rng r(5);
    const auto X = random_matrix(50, 4, r);
    const auto y = random_binary(50, r);
    pdm::rf_config cfg;
    cfg.trees = 15;
    cfg.max_depth = 4;
    const auto m = pdm::fit_rf(X, y, cfg, 77);
    REQUIRE(m.trees.size() == 15);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double sum = 0.0;
        for (const auto& t : m.trees) sum += t.predict_row(X.row(i));
        REQUIRE(pdm::rf_score(m, X.row(i)) == std::clamp(sum / 15.0, 0.0, 1.0));
    }
}

TEST_CASE("rf with one tree, no bootstrap, all features equals a plain tree") {
    pdm::rng r(6);
    const auto X = random_matrix(60, 3, r);
    const auto y = random_binary(60, r);
    pdm::rf_config cfg;
    cfg.trees = 1;
    cfg.max_depth = 6;
    cfg.bootstrap = false;
    cfg.feature_subset = 3;  // all of them, so no per-node sampling happens
    const auto forest = pdm::fit_rf(X, y, cfg, 1);

    pdm::tree_params tp;
    tp.max_depth = 6;
    tp.min_leaf = 1;
    const auto tree = pdm::fit_tree(X, y, tp);
    REQUIRE(forest.trees[0] == tree);
}

TEST_CASE("rf refit with the same seed is bit-identical") {
    pdm::rng r(7);
    const auto X = random_matrix(40, 6, r);
    const auto y = random_binary(40, r);
    pdm::rf_config cfg;
    cfg.trees = 25;
    cfg.max_depth = 8;
    const auto a = pdm::fit_rf(X, y, cfg, 123);
    const auto b = pdm::fit_rf(X, y, cfg, 123);
    REQUIRE(pdm::predict(a, X) == pdm::predict(b, X));
    const auto c = pdm::fit_rf(X, y, cfg, 124);
    REQUIRE(pdm::predict(a, X) != pdm::predict(c, X));
}

TEST_CASE("gbt with zero rounds predicts the clamped base rate") {
    pdm::matrix X;
    for (int i = 0; i < 8; ++i) X.push_row(std::vector<double>{static_cast<double>(i)});
    std::vector<double> y{1, 1, 1, 0, 0, 0, 0, 0};
    pdm::gbt_config cfg;
    cfg.rounds = 0;
    const auto m = pdm::fit_gbt(X, y, cfg);
    const auto p = pdm::predict(m, X);
    for (double v : p) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(0.375, 1e-15));
}

TEST_CASE("gbt squared-error stage recovers a clean step in one round") {
    // balanced 0/1 labels, lr=1: base 0.5, leaf means -0.5 and +0.5 exactly
    pdm::matrix X;
    for (int i = 0; i < 8; ++i) X.push_row(std::vector<double>{static_cast<double>(i)});
    std::vector<double> y{0, 0, 0, 0, 1, 1, 1, 1};
    pdm::gbt_config cfg;
    cfg.rounds = 1;
    cfg.learning_rate = 1.0;
    cfg.max_depth = 1;
    cfg.logistic = false;
    const auto m = pdm::fit_gbt(X, y, cfg);
    REQUIRE(m.stages.size() == 1);
    REQUIRE(m.stages[0].nodes[0].feature == 0);
    REQUIRE(m.stages[0].nodes[0].threshold == 3.5);
    const auto p = pdm::predict(m, X);
    for (std::size_t i = 0; i < 8; ++i) REQUIRE(p[i] == y[i]);
}

TEST_CASE("gbt squared training loss never increases over rounds") {
    pdm::rng r(31);
    const auto X = random_matrix(80, 5, r);
    std::vector<double> y(80);
    for (std::size_t i = 0; i < 80; ++i)
        y[i] = 0.5 + 0.3 * std::sin(X(i, 0)) + 0.1 * X(i, 2) * X(i, 3);
    pdm::gbt_config cfg;
    cfg.rounds = 40;
    cfg.learning_rate = 0.3;
    cfg.max_depth = 3;
    cfg.logistic = false;
    const auto m = pdm::fit_gbt(X, y, cfg);

    // replay the ensemble stage by stage
    std::vector<double> f(80, m.base);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& stage : m.stages) {
        for (std::size_t i = 0; i < 80; ++i)
            f[i] += cfg.learning_rate * stage.predict_row(X.row(i));
        double sse = 0.0;
        for (std::size_t i = 0; i < 80; ++i) sse += (y[i] - f[i]) * (y[i] - f[i]);
        REQUIRE(sse <= prev + 1e-12);
        prev = sse;
    }
}

TEST_CASE("gbt logistic task separates an easy dataset") {
    pdm::rng r(41);
    pdm::matrix X;
    std::vector<double> y;
    for (int i = 0; i < 100; ++i) {
        const double x0 = r.uniform_real(-1, 1), x1 = r.uniform_real(-1, 1);
        X.push_row(std::vector<double>{x0, x1});
        y.push_back(x0 + x1 > 0 ? 1.0 : 0.0);
    }
    pdm::gbt_config cfg;
    cfg.rounds = 60;
    const auto m = pdm::fit_gbt(X, y, cfg);
    const auto p = pdm::predict(m, X);
    std::size_t right = 0;
    for (std::size_t i = 0; i < 100; ++i)
        if ((p[i] >= 0.5) == (y[i] >= 0.5)) ++right;
    REQUIRE(right >= 97);
    for (double v : p) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("gbt refits are deterministic") {
    pdm::rng r(51);
    const auto X = random_matrix(50, 4, r);
    const auto y = random_binary(50, r);
    pdm::gbt_config cfg;
    cfg.rounds = 20;
    const auto a = pdm::fit_gbt(X, y, cfg);
    const auto b = pdm::fit_gbt(X, y, cfg);
    REQUIRE(pdm::predict(a, X) == pdm::predict(b, X));
}

TEST_CASE("pls recovers a noiseless linear map") {
    pdm::rng r(61);
    const std::size_t n = 50, d = 6;
    const auto X = random_matrix(n, d, r);
    std::vector<double> coef(d);
    for (auto& c : coef) c = r.uniform_real(-0.05, 0.05);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.5;
        for (std::size_t j = 0; j < d; ++j) s += coef[j] * X(i, j);
        y[i] = s;
    }
    for (double v : y) {  // keep targets inside the clamp range
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
    }
    const auto m = pdm::fit_pls(X, y, static_cast<int>(d));
    REQUIRE(m.components == static_cast<int>(d));
    const auto fit = pdm::predict(m, X);
    for (std::size_t i = 0; i < n; ++i)
        REQUIRE_THAT(fit[i], Catch::Matchers::WithinAbs(y[i], 1e-6));

    const auto Q = random_matrix(10, d, r);
    const auto out = pdm::predict(m, Q);
    for (std::size_t i = 0; i < 10; ++i) {
        double s = 0.5;
        for (std::size_t j = 0; j < d; ++j) s += coef[j] * Q(i, j);
        REQUIRE_THAT(out[i], Catch::Matchers::WithinAbs(s, 1e-6));
    }
}

TEST_CASE("pls with zero components predicts the label mean") {
    pdm::rng r(71);
    const auto X = random_matrix(20, 3, r);
    std::vector<double> y(20);
    for (auto& v : y) v = r.uniform_real(0.2, 0.8);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= 20.0;
    const auto m = pdm::fit_pls(X, y, 0);
    REQUIRE(m.components == 0);
    for (double v : pdm::predict(m, X))
        REQUIRE_THAT(v, Catch::Matchers::WithinAbs(mean, 1e-15));
}

TEST_CASE("pls component count is capped by the feature count") {
    pdm::rng r(81);
    const auto X = random_matrix(30, 4, r);
    std::vector<double> y(30);
    for (auto& v : y) v = r.uniform_real(0.0, 1.0);
    const auto m = pdm::fit_pls(X, y, 50);
    REQUIRE(m.components <= 4);
}

TEST_CASE("pls never leaves the unit interval") {
    pdm::rng r(91);
    const auto X = random_matrix(40, 5, r);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i) y[i] = X(i, 0) * 3.0;  // wild targets
    const auto m = pdm::fit_pls(X, y, 5);
    for (double v : pdm::predict(m, random_matrix(20, 5, r))) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("knn survives externally scaling one feature by ten") {
    pdm::rng r(111);
    pdm::matrix X = random_matrix(30, 3, r);
    const auto y = random_binary(30, r);
    pdm::matrix Q = random_matrix(8, 3, r);
    pdm::matrix Xs = X, Qs = Q;
    for (std::size_t i = 0; i < Xs.rows(); ++i) Xs(i, 0) *= 10.0;
    for (std::size_t i = 0; i < Qs.rows(); ++i) Qs(i, 0) *= 10.0;
    // neighbour sets are tie-free on random reals, so the discrete k-label
    // means match exactly despite rounding in the 10x products
    const auto a = pdm::predict(pdm::fit_knn(X, y, 3), Q);
    const auto b = pdm::predict(pdm::fit_knn(Xs, y, 3), Qs);
    REQUIRE(a == b);
}

TEST_CASE("gbt_round on constant residuals appends a single-leaf tree") {
    pdm::rng r(121);
    const auto X = random_matrix(12, 2, r);
    pdm::gbt_model m;
    m.input_dim = 2;
    pdm::gbt_round(m, X, std::vector<double>(12, 0.25));
    REQUIRE(m.stages.size() == 1);
    REQUIRE(m.stages[0].nodes.size() == 1);
    REQUIRE(m.stages[0].nodes[0].value == 0.25);
}

TEST_CASE("gbt_round rejects non-finite residuals") {
    pdm::rng r(122);
    const auto X = random_matrix(4, 2, r);
    pdm::gbt_model m;
    std::vector<double> bad{0.0, 1.0, std::numeric_limits<double>::quiet_NaN(), 0.5};
    REQUIRE_THROWS_AS(pdm::gbt_round(m, X, bad), std::invalid_argument);
}

TEST_CASE("predict rejects feature-width mismatches") {
    pdm::rng r(131);
    const auto X = random_matrix(20, 4, r);
    const auto y = random_binary(20, r);
    const auto narrow = random_matrix(3, 3, r);

    REQUIRE_THROWS_AS(pdm::predict(pdm::fit_knn(X, y, 3), narrow), std::invalid_argument);
    REQUIRE_THROWS_AS(pdm::predict(pdm::fit_rf(X, y, pdm::rf_config{.trees = 3}, 1), narrow),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(pdm::predict(pdm::fit_gbt(X, y, pdm::gbt_config{.rounds = 2}), narrow),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(pdm::predict(pdm::fit_pls(X, y, 2), narrow), std::invalid_argument);
}

TEST_CASE("baselines behave as advertised") {
    const auto ones = pdm::all_true_scores(7);
    REQUIRE(ones == std::vector<double>(7, 1.0));

    const auto a = pdm::random_scores(1000, 42);
    const auto b = pdm::random_scores(1000, 42);
    REQUIRE(a == b);
    const auto c = pdm::random_scores(1000, 43);
    REQUIRE(a != c);
    std::size_t heads = 0;
    for (double v : a) {
        REQUIRE((v == 0.0 || v == 1.0));
        heads += v == 1.0;
    }
    REQUIRE(heads > 400);
    REQUIRE(heads < 600);
}
