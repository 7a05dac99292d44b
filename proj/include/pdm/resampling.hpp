#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdm/detail/matrix.hpp"
#include "pdm/detail/rng.hpp"

namespace pdm {

struct resample_plan {
    std::string mode = "none";  // none | undersample | oversample
    int inflate_factor = 1;     // whole-set replication after balancing
    double class_threshold = 0.5;  // continuous labels binarize here
    std::uint64_t seed = 0;
};

// Row indices (with multiplicity) into the input that realize the plan. Only
// multiplicity ever changes; rows are never synthesized or altered.
// undersample keeps the minority whole and draws majority rows without
// replacement; oversample keeps everything and duplicates minority draws.
// Retained originals stay in ascending order, duplicates follow in draw
// order, and inflation repeats the whole balanced block.
inline std::vector<std::size_t> resample_indices(const std::vector<double>& y,
                                                 const resample_plan& plan) {
    if (plan.inflate_factor < 1) throw std::invalid_argument("resample: inflate_factor < 1");
    const std::size_t n = y.size();
    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    if (plan.mode == "none") return identity;
    if (plan.mode != "undersample" && plan.mode != "oversample")
        throw std::invalid_argument("resample: unknown mode " + plan.mode);

    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i)
        (y[i] >= plan.class_threshold ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("resample: both classes must be present");

    auto& minority = pos.size() <= neg.size() ? pos : neg;
    auto& majority = pos.size() <= neg.size() ? neg : pos;

    rng r(plan.seed);
    std::vector<std::size_t> out;
    if (plan.mode == "undersample") {
        out = minority;
        for (std::size_t slot : r.sample_without_replacement(majority.size(), minority.size()))
            out.push_back(majority[slot]);
        std::sort(out.begin(), out.end());
    } else {
        out = identity;
        const std::size_t need = majority.size() - minority.size();
        for (std::size_t i = 0; i < need; ++i)
            out.push_back(minority[static_cast<std::size_t>(r.bounded(minority.size()))]);
    }
    if (plan.inflate_factor > 1) {
        const std::vector<std::size_t> block = out;
        out.reserve(block.size() * static_cast<std::size_t>(plan.inflate_factor));
        for (int k = 1; k < plan.inflate_factor; ++k)
            out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

inline std::pair<matrix, std::vector<double>> resample(const matrix& X,
                                                       const std::vector<double>& y,
                                                       const resample_plan& plan) {
    if (X.rows() != y.size()) throw std::invalid_argument("resample: shape mismatch");
    const auto idx = resample_indices(y, plan);
    std::vector<double> ry(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) ry[i] = y[idx[i]];
    return {X.select_rows(idx), std::move(ry)};
}

}  // namespace pdm
