#pragma once

#include <cstdint>
#include <vector>

#include "pdm/detail/matrix.hpp"
#include "pdm/detail/rng.hpp"

namespace pdm {

// Reference floors for every comparison: alarm always, or flip a fair coin
// per row. The coin stream restarts from the seed on each call so a rerun of
// the same batch reproduces the same guesses.
inline std::vector<double> all_true_scores(std::size_t rows) {
    return std::vector<double>(rows, 1.0);
}

inline std::vector<double> random_scores(std::size_t rows, std::uint64_t seed) {
    rng r(seed);
    std::vector<double> out(rows);
    for (auto& v : out) v = r.coin() ? 1.0 : 0.0;
    return out;
}

}  // namespace pdm
