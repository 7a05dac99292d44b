#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pdm/reduction.hpp"

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

// Straight-line ReliefF reference: full sorts, no partial_sort, explicit
// z-scoring, every instance visited in order.
std::vector<double> naive_relieff(const pdm::matrix& X, const std::vector<double>& y, int k,
                                  double thr) {
    const std::size_t n = X.rows(), d = X.cols();
    pdm::detail::zscore sc;
    sc.fit(X);
    const pdm::matrix Z = sc.apply(X);

    std::vector<double> lo(d, 1e300), hi(d, -1e300);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            lo[j] = std::min(lo[j], Z(i, j));
            hi[j] = std::max(hi[j], Z(i, j));
        }

    std::vector<double> w(d, 0.0);
    for (std::size_t inst = 0; inst < n; ++inst) {
        std::vector<std::pair<double, std::size_t>> hits, misses;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == inst) continue;
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                s += (Z(inst, j) - Z(i, j)) * (Z(inst, j) - Z(i, j));
            const bool same =
                (y[i] >= thr) == (y[inst] >= thr);
            (same ? hits : misses).push_back({s, i});
        }
        std::sort(hits.begin(), hits.end());
        std::sort(misses.begin(), misses.end());
        const std::size_t kh = std::min<std::size_t>(k, hits.size());
        const std::size_t km = std::min<std::size_t>(k, misses.size());
        for (std::size_t t = 0; t < kh; ++t)
            for (std::size_t j = 0; j < d; ++j) {
                if (hi[j] <= lo[j]) continue;
                w[j] -= std::abs(Z(inst, j) - Z(hits[t].second, j)) / (hi[j] - lo[j]) /
                        (static_cast<double>(kh) * static_cast<double>(n));
            }
        for (std::size_t t = 0; t < km; ++t)
            for (std::size_t j = 0; j < d; ++j) {
                if (hi[j] <= lo[j]) continue;
                w[j] += std::abs(Z(inst, j) - Z(misses[t].second, j)) / (hi[j] - lo[j]) /
                        (static_cast<double>(km) * static_cast<double>(n));
            }
    }
    return w;
}

// Cyclic Jacobi eigensolver for small symmetric matrices; returns descending
// eigenvalues. Completely independent of the SVD route under test.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> A) {
    const std::size_t d = A.size();
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += A[p][q] * A[p][q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) {
                if (std::abs(A[p][q]) < 1e-300) continue;
                const double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t i = 0; i < d; ++i) {
                    const double aip = A[i][p], aiq = A[i][q];
                    A[i][p] = c * aip - s * aiq;
                    A[i][q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < d; ++i) {
                    const double api = A[p][i], aqi = A[q][i];
                    A[p][i] = c * api - s * aqi;
                    A[q][i] = s * api + c * aqi;
                }
            }
    }
    std::vector<double> ev(d);
    for (std::size_t i = 0; i < d; ++i) ev[i] = A[i][i];
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

}  // namespace

TEST_CASE("relieff matches a brute-force reference on small data") {
    pdm::rng r(600);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 8 + r.bounded(13);  // up to 20 samples
        const std::size_t d = 2 + r.bounded(4);
        const auto X = random_matrix(n, d, r);
        std::vector<double> y(n);
        for (auto& v : y) v = r.coin() ? 1.0 : 0.0;
        const std::size_t pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1.0));
        if (pos == 0 || pos == n) continue;

        pdm::relieff_config cfg;
        cfg.k_neighbors = 1 + static_cast<int>(r.bounded(4));
        const auto got = pdm::relieff_weights(X, y, cfg);
        const auto want = naive_relieff(X, y, cfg.k_neighbors, cfg.class_threshold);
        REQUIRE(got.size() == want.size());
        for (std::size_t j = 0; j < d; ++j)
            REQUIRE_THAT(got[j], Catch::Matchers::WithinAbs(want[j], 1e-12));
    }
}

TEST_CASE("relieff ranks a label-copy feature first") {
    pdm::rng r(601);
    const std::size_t n = 200, noise = 6;
    pdm::matrix X;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = r.coin() ? 1.0 : 0.0;
        std::vector<double> row{y[i]};
        for (std::size_t j = 0; j < noise; ++j) row.push_back(r.uniform_real(-1, 1));
        X.push_row(row);
    }
    const auto w = pdm::relieff_weights(X, y, pdm::relieff_config{});
    for (std::size_t j = 1; j <= noise; ++j) REQUIRE(w[0] > w[j]);
    for (double v : w) {
        REQUIRE(v >= -1.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("constant features get weight exactly zero") {
    pdm::rng r(602);
    pdm::matrix X;
    std::vector<double> y;
    for (int i = 0; i < 30; ++i) {
        X.push_row(std::vector<double>{r.uniform_real(0, 1), 7.25, r.uniform_real(0, 1)});
        y.push_back(r.coin() ? 1.0 : 0.0);
    }
    const auto w = pdm::relieff_weights(X, y, pdm::relieff_config{});
    REQUIRE(w[1] == 0.0);
}

TEST_CASE("relieff weights ignore sample order") {
    pdm::rng r(603);
    const std::size_t n = 40;
    const auto X = random_matrix(n, 4, r);
    std::vector<double> y(n);
    for (auto& v : y) v = r.coin() ? 1.0 : 0.0;
    const auto base = pdm::relieff_weights(X, y, pdm::relieff_config{});

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    r.shuffle(perm);
    const pdm::matrix Xp = X.select_rows(perm);
    std::vector<double> yp(n);
    for (std::size_t i = 0; i < n; ++i) yp[i] = y[perm[i]];
    const auto shuffled = pdm::relieff_weights(Xp, yp, pdm::relieff_config{});
    for (std::size_t j = 0; j < 4; ++j)
        REQUIRE_THAT(shuffled[j], Catch::Matchers::WithinAbs(base[j], 1e-12));
}

TEST_CASE("relieff requires both classes and positive k") {
    pdm::rng r(604);
    const auto X = random_matrix(10, 2, r);
    REQUIRE_THROWS_AS(pdm::relieff_weights(X, std::vector<double>(10, 1.0), pdm::relieff_config{}),
                      std::invalid_argument);
    std::vector<double> y(10, 0.0);
    y[0] = 1.0;
    pdm::relieff_config bad;
    bad.k_neighbors = 0;
    REQUIRE_THROWS_AS(pdm::relieff_weights(X, y, bad), std::invalid_argument);
    // a 1-member class just uses the neighbours it has
    REQUIRE_NOTHROW(pdm::relieff_weights(X, y, pdm::relieff_config{}));
}

TEST_CASE("subsampled relieff is reproducible by seed") {
    pdm::rng r(605);
    const auto X = random_matrix(60, 3, r);
    std::vector<double> y(60);
    for (auto& v : y) v = r.coin() ? 1.0 : 0.0;
    pdm::relieff_config cfg;
    cfg.sample_count = 20;
    cfg.seed = 9;
    const auto a = pdm::relieff_weights(X, y, cfg);
    const auto b = pdm::relieff_weights(X, y, cfg);
    REQUIRE(a == b);
}

TEST_CASE("top_features keeps the best-weighted columns in ascending order") {
    const std::vector<double> w{0.1, 0.9, -0.2, 0.9, 0.4};
    const auto top3 = pdm::top_features(w, 3);
    REQUIRE(top3 == std::vector<std::size_t>{1, 3, 4});
    const auto top2 = pdm::top_features(w, 2);  // tie at 0.9 prefers lower index
    REQUIRE(top2 == std::vector<std::size_t>{1, 3});
    REQUIRE(pdm::top_features(w, 99).size() == 5);
}

TEST_CASE("pca of axis-aligned variation returns the axis with positive sign") {
    pdm::matrix X;
    for (int i = 0; i < 20; ++i)
        X.push_row(std::vector<double>{static_cast<double>(i) - 9.5, 3.0});
    const auto p = pdm::pca_fit(X);
    REQUIRE_THAT(p.basis(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(p.basis(0, 1), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("pca basis is orthonormal and dominant entries are positive") {
    pdm::rng r(606);
    const auto X = random_matrix(40, 7, r);
    const auto p = pdm::pca_fit(X);
    const std::size_t c = p.basis.rows();
    double worst = 0.0;
    for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < c; ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < 7; ++j) dot += p.basis(a, j) * p.basis(b, j);
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    REQUIRE(worst < 1e-8);
    for (std::size_t a = 0; a < c; ++a) {
        std::size_t arg = 0;
        double mag = -1.0;
        for (std::size_t j = 0; j < 7; ++j)
            if (std::abs(p.basis(a, j)) > mag) {
                mag = std::abs(p.basis(a, j));
                arg = j;
            }
        REQUIRE(p.basis(a, arg) > 0.0);
    }
}

TEST_CASE("full-rank transform then reconstruct is lossless") {
    pdm::rng r(607);
    const auto X = random_matrix(50, 6, r);
    const auto p = pdm::pca_fit(X);
    REQUIRE(p.kept == 6);
    const auto back = pdm::pca_reconstruct(p, pdm::pca_transform(p, X));
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (std::size_t j = 0; j < 6; ++j)
            REQUIRE_THAT(back(i, j), Catch::Matchers::WithinAbs(X(i, j), 1e-8));
}

TEST_CASE("pca component variances equal covariance eigenvalues") {
    pdm::rng r(608);
    const std::size_t n = 60, d = 5;
    const auto X = random_matrix(n, d, r);
    const auto p = pdm::pca_fit(X);
    const auto scores = pdm::pca_transform(p, X);

    std::vector<std::vector<double>> C(d, std::vector<double>(d, 0.0));
    std::vector<double> mu(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mu[j] += X(i, j) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                C[a][b] += (X(i, a) - mu[a]) * (X(i, b) - mu[b]) / static_cast<double>(n - 1);
    const auto ev = jacobi_eigenvalues(C);

    for (std::size_t c = 0; c < d; ++c) {
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += scores(i, c) * scores(i, c);
        var /= static_cast<double>(n - 1);  // scores are centered by construction
        REQUIRE_THAT(var, Catch::Matchers::WithinAbs(ev[c], 1e-8));
    }
}

TEST_CASE("identical rows trip the zero-variance path") {
    pdm::matrix X;
    for (int i = 0; i < 5; ++i) X.push_row(std::vector<double>{4.0, -1.0, 2.5});
    const auto p = pdm::pca_fit(X);
    REQUIRE(p.zero_variance);
    REQUIRE(p.kept == 3);
    const auto t = pdm::pca_transform(p, X);  // identity on centered data
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j) REQUIRE(t(i, j) == 0.0);
}

TEST_CASE("transforming the mean row gives the zero vector") {
    pdm::rng r(609);
    const auto X = random_matrix(25, 4, r);
    const auto p = pdm::pca_fit(X);
    pdm::matrix mean_row;
    mean_row.push_row(p.mean);
    const pdm::matrix t = pdm::pca_transform(p, mean_row);
    for (double v : t.row(0)) REQUIRE_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("kept=0 transform has zero width and projection contracts norms") {
    pdm::rng r(610);
    const auto X = random_matrix(30, 5, r);
    auto p = pdm::pca_fit(X);
    p.kept = 0;
    REQUIRE(pdm::pca_transform(p, X).cols() == 0);

    p.kept = 2;
    const auto t = pdm::pca_transform(p, X);
    for (std::size_t i = 0; i < X.rows(); ++i) {
        double reduced = 0.0, full = 0.0;
        for (std::size_t c = 0; c < 2; ++c) reduced += t(i, c) * t(i, c);
        for (std::size_t j = 0; j < 5; ++j) {
            const double v = X(i, j) - p.mean[j];
            full += v * v;
        }
        REQUIRE(reduced <= full + 1e-12);
    }
}

TEST_CASE("pca rejects undersized or mismatched input") {
    pdm::matrix one;
    one.push_row(std::vector<double>{1.0, 2.0});
    REQUIRE_THROWS_AS(pdm::pca_fit(one), std::invalid_argument);

    pdm::rng r(611);
    const auto X = random_matrix(10, 3, r);
    const auto p = pdm::pca_fit(X);
    const auto narrow = random_matrix(4, 2, r);
    REQUIRE_THROWS_AS(pdm::pca_transform(p, narrow), std::invalid_argument);
}

TEST_CASE("the 20%-cut grid for 1352 features has 30 points") {
    const auto grid = pdm::reduction_grid(1352);
    REQUIRE(grid.size() == 30);
    REQUIRE(grid.front() == 1.0);
    REQUIRE(std::floor(1352.0 * grid.back() + 1e-9) == 2.0);
    // one more cut would drop below 2 features
    REQUIRE(std::floor(1352.0 * grid.back() * 0.8 + 1e-9) < 2.0);
}

TEST_CASE("score-invariant predictor makes the search pick the smallest fraction") {
    pdm::rng r(612);
    const auto X = random_matrix(30, 10, r);
    std::vector<double> y(30);
    for (auto& v : y) v = r.coin() ? 1.0 : 0.0;
    const auto grid = pdm::reduction_grid(10);
    const auto res = pdm::search_reduction(
        X, y, X, y, "relieff",
        [](const pdm::matrix&, const std::vector<double>&, const pdm::matrix&,
           const std::vector<double>&) { return 0.5; });
    REQUIRE(res.choice.kept_fraction == grid.back());
    REQUIRE(res.choice.method == "relieff");
    REQUIRE(std::find(grid.begin(), grid.end(), res.choice.kept_fraction) != grid.end());
}

TEST_CASE("search keeps enough features on a planted problem") {
    // 100 features, only the first 5 carry the label
    pdm::rng r(613);
    const std::size_t n = 160, d = 100;
    pdm::matrix X;
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(d);
        for (auto& v : row) v = r.uniform_real(-1, 1);
        double s = 0.0;
        for (std::size_t j = 0; j < 5; ++j) s += row[j];
        y.push_back(s > 0 ? 1.0 : 0.0);
        X.push_row(row);
    }
    pdm::matrix Xtr, Xval;
    std::vector<double> ytr, yval;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < 120) {
            Xtr.push_row(X.row(i));
            ytr.push_back(y[i]);
        } else {
            Xval.push_row(X.row(i));
            yval.push_back(y[i]);
        }
    }
    pdm::predictor_config cfg;
    cfg.algorithm = "knn";
    cfg.knn_k = 3;
    const auto res = pdm::search_reduction(Xtr, ytr, Xval, yval, cfg, "relieff");
    REQUIRE(res.choice.kept_count >= 5);
    REQUIRE(res.choice.kept_count <= 64);
    REQUIRE(res.red.apply(Xtr).cols() == res.red.keep.size());
}

TEST_CASE("pca search reducers report grid fractions and apply cleanly") {
    pdm::rng r(614);
    const auto X = random_matrix(40, 8, r);
    std::vector<double> y(40);
    for (auto& v : y) v = r.coin() ? 1.0 : 0.0;
    pdm::predictor_config cfg;
    cfg.algorithm = "knn";
    const auto res = pdm::search_reduction(X, y, X, y, cfg, "pca");
    const auto grid = pdm::reduction_grid(8);
    REQUIRE(std::find(grid.begin(), grid.end(), res.choice.kept_fraction) != grid.end());
    REQUIRE(res.red.apply(X).cols() == res.red.proj.kept);

    REQUIRE_THROWS_AS(pdm::search_reduction(X, y, X, y, cfg, "none"), std::invalid_argument);
}
