#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "pdm/class_pipeline.hpp"
#include "pdm/event_log.hpp"

namespace pdm {

// Sigmoid risk shape: risk 0.5 exactly midpoint days before the target,
// approaching 1 at the target and 0 far from it.
struct risk_curve_spec {
    double midpoint = 0.0;
    double steepness = 1.0;
};

// Day-by-type binary presence matrix over a log span. Column order follows
// kept_types, which never contains the target type.
struct day_matrix {
    int days = 0;
    std::vector<int> kept_types;
    std::vector<char> bits; // days * kept_types.size(), row-major

    char& at(int day, std::size_t type_idx) {
        return bits[static_cast<std::size_t>(day) * kept_types.size() + type_idx];
    }
    char at(int day, std::size_t type_idx) const {
        return bits[static_cast<std::size_t>(day) * kept_types.size() + type_idx];
    }
};

inline bool operator==(const day_matrix& a, const day_matrix& b) {
    return a.days == b.days && a.kept_types == b.kept_types && a.bits == b.bits;
}

struct regression_config {
    int N = 1;               // group length, paired to the classification OW
    int step = 1;
    double alarm_threshold = 0.5;
    double rare_min_ratio = 0.5;
    double frequent_max_day_fraction = 0.3;
};

inline regression_config regression_config_for(const window_spec& w) {
    regression_config cfg;
    cfg.N = w.ow_length();
    cfg.step = w.step;
    return cfg;
}

// Paper-calibrated curve for a paired window setting: midpoint = prediction
// window length, steepness 0.7.
inline risk_curve_spec default_risk_curve(const window_spec& w) {
    return {static_cast<double>(w.Y), 0.7};
}

// Keeps non-target types occurring at least rare_min_ratio times as often as
// the target. Ratio 0 keeps everything.
inline std::vector<int> prune_rare(const event_log& log, int target_count,
                                   double rare_min_ratio) {
    if (target_count <= 0) throw std::invalid_argument("prune_rare needs target_count > 0");
    std::vector<std::size_t> counts(static_cast<std::size_t>(log.ft), 0);
    for (const event_record& r : log.records) ++counts[static_cast<std::size_t>(r.event_type)];
    std::vector<int> kept;
    const double cutoff = rare_min_ratio * target_count;
    for (int t = 0; t < log.ft; ++t) {
        if (t == log.target_type) continue;
        if (static_cast<double>(counts[static_cast<std::size_t>(t)]) >= cutoff) kept.push_back(t);
    }
    return kept;
}

// Keeps non-target types present on at most the given fraction of all days.
inline std::vector<int> prune_frequent(const event_log& log, double frequent_max_day_fraction) {
    std::vector<std::vector<char>> seen(static_cast<std::size_t>(log.ft));
    for (auto& v : seen) v.assign(static_cast<std::size_t>(log.horizon_days), 0);
    for (const event_record& r : log.records)
        seen[static_cast<std::size_t>(r.event_type)][static_cast<std::size_t>(r.day)] = 1;
    std::vector<int> kept;
    const double limit = frequent_max_day_fraction * log.horizon_days;
    for (int t = 0; t < log.ft; ++t) {
        if (t == log.target_type) continue;
        std::size_t present = 0;
        for (char c : seen[static_cast<std::size_t>(t)]) present += c;
        if (static_cast<double>(present) <= limit) kept.push_back(t);
    }
    return kept;
}

inline std::vector<int> intersect_kept(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Entry (d, j) = 1 iff kept_types[j] occurs at least once on day d.
inline day_matrix binarize_days(const event_log& log, const std::vector<int>& kept_types) {
    day_matrix m;
    m.days = log.horizon_days;
    m.kept_types = kept_types;
    m.bits.assign(static_cast<std::size_t>(m.days) * kept_types.size(), 0);
    std::vector<std::ptrdiff_t> col(static_cast<std::size_t>(log.ft), -1);
    for (std::size_t j = 0; j < kept_types.size(); ++j)
        col[static_cast<std::size_t>(kept_types[j])] = static_cast<std::ptrdiff_t>(j);
    for (const event_record& r : log.records) {
        const std::ptrdiff_t j = col[static_cast<std::size_t>(r.event_type)];
        if (j >= 0) m.at(r.day, static_cast<std::size_t>(j)) = 1;
    }
    return m;
}

// Keeps only the first day of each maximal run of consecutive presence days.
inline day_matrix collapse_consecutive(const day_matrix& m) {
    day_matrix out = m;
    for (std::size_t j = 0; j < m.kept_types.size(); ++j)
        for (int d = 1; d < m.days; ++d)
            if (m.at(d, j) && m.at(d - 1, j)) out.at(d, j) = 0;
    return out;
}

// Risk d days before the target: 1 / (1 + exp(s * (d - m))).
inline double risk_label(int day, const episode& ep, const risk_curve_spec& curve) {
    if (day < ep.start_day || day > ep.target_day)
        throw std::domain_error("risk_label: day outside episode");
    const double d = ep.target_day - day;
    return 1.0 / (1.0 + std::exp(curve.steepness * (d - curve.midpoint)));
}

inline int alarm(double score, double threshold) { return score >= threshold ? 1 : 0; }

// N-day groups stepped like the paired classification windows; features are
// the OR of the collapsed presence rows, the label is the risk on the group's
// last day. Anchors past the final target have no defined risk: dropped when
// keep_tail is off (training), emitted with label -1 when on (test scoring).
inline std::vector<labeled_sample> build_regression_dataset(const event_log& log,
                                                            const std::vector<int>& kept_types,
                                                            const regression_config& cfg,
                                                            const risk_curve_spec& curve,
                                                            bool keep_tail) {
    const day_matrix collapsed = collapse_consecutive(binarize_days(log, kept_types));
    const std::vector<episode> episodes = split_episodes(log);
    std::vector<labeled_sample> out;
    for (int start = 0; start + cfg.N <= log.horizon_days; start += cfg.step) {
        const int anchor = start + cfg.N - 1;
        const episode* home = nullptr;
        for (const episode& ep : episodes)
            if (ep.start_day <= anchor && anchor <= ep.target_day) {
                home = &ep;
                break;
            }
        if (!home && !keep_tail) continue;
        labeled_sample s;
        s.anchor_day = anchor;
        s.label = home ? risk_label(anchor, *home, curve) : -1.0;
        s.features.assign(kept_types.size(), 0.0);
        for (int d = start; d < start + cfg.N; ++d)
            for (std::size_t j = 0; j < kept_types.size(); ++j)
                if (collapsed.at(d, j)) s.features[j] = 1.0;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace pdm
