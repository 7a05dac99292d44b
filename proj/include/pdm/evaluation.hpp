#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pdm/class_pipeline.hpp"
#include "pdm/detail/rng.hpp"
#include "pdm/event_log.hpp"

namespace pdm {

// Episode segmentation lengths. An alarm is timely inside the correct_len
// days that precede the repair span; earlier alarms are false positives;
// alarms during repair carry no information.
struct period_spec {
    int correct_len = 1;
    int repair_len = 0;
};

inline period_spec period_spec_for(const window_spec& w) { return {w.Y, w.Z}; }

struct prediction {
    int anchor_day = 0;
    int alarm = 0;
};

// Day geometry of one episode. Repair spans [repair_begin, repair_end]
// inclusive of the target day itself; correct and early are half-open and
// the three ranges tile [start_day, target_day]. Episodes too short to hold
// the correct and repair spans are skipped.
struct episode_segments {
    int early_begin = 0, early_end = 0;     // [early_begin, early_end)
    int correct_begin = 0, correct_end = 0; // [correct_begin, correct_end)
    int repair_begin = 0, repair_end = 0;   // [repair_begin, repair_end]
    bool skipped = false;
};

inline episode_segments segment(const episode& ep, const period_spec& spec) {
    if (spec.correct_len < 1 || spec.repair_len < 0)
        throw std::invalid_argument("period spec: correct_len >= 1, repair_len >= 0");
    episode_segments g;
    g.skipped = ep.target_day - ep.start_day < spec.correct_len + spec.repair_len;
    g.repair_end = ep.target_day;
    g.repair_begin = ep.target_day - spec.repair_len;
    g.correct_end = g.repair_begin;
    g.correct_begin = g.correct_end - spec.correct_len;
    g.early_end = g.correct_begin;
    g.early_begin = ep.start_day;
    return g;
}

struct eval_outcome {
    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
    std::size_t ignored = 0;          // repair-period anchors + anchors outside evaluated episodes
    std::size_t skipped_episodes = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
};

inline bool operator==(const eval_outcome& a, const eval_outcome& b) {
    return a.tp == b.tp && a.fn == b.fn && a.fp == b.fp && a.tn == b.tn &&
           a.ignored == b.ignored && a.skipped_episodes == b.skipped_episodes &&
           a.precision == b.precision && a.recall == b.recall && a.f1 == b.f1;
}

inline double f1_score(double precision, double recall) {
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

inline void finalize_rates(eval_outcome& o) {
    o.precision = o.tp + o.fp == 0 ? 0.0
                                   : static_cast<double>(o.tp) / static_cast<double>(o.tp + o.fp);
    o.recall = o.tp + o.fn == 0 ? 0.0
                                : static_cast<double>(o.tp) / static_cast<double>(o.tp + o.fn);
    o.f1 = f1_score(o.precision, o.recall);
}

// Episode-based confusion counting. Each evaluated episode contributes one
// TP (some alarm in its correct period) or one FN; early alarms count FP
// one by one, early silences TN; everything in repair or outside an
// evaluated episode is ignored. Silent anchors in the correct period carry
// no signal either way and touch no counter.
inline eval_outcome score(const std::vector<prediction>& trace,
                          const std::vector<episode>& episodes, const period_spec& spec) {
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i].anchor_day <= trace[i - 1].anchor_day)
            throw std::invalid_argument("prediction anchors must be strictly increasing");

    std::vector<episode_segments> segs;
    segs.reserve(episodes.size());
    for (const episode& ep : episodes) segs.push_back(segment(ep, spec));

    eval_outcome out;
    std::vector<char> hit(episodes.size(), 0);
    for (const prediction& p : trace) {
        const int day = p.anchor_day;
        std::size_t owner = episodes.size();
        for (std::size_t i = 0; i < episodes.size(); ++i)
            if (episodes[i].start_day <= day && day <= episodes[i].target_day) {
                owner = i;
                break;
            }
        if (owner == episodes.size() || segs[owner].skipped) {
            ++out.ignored;
            continue;
        }
        const episode_segments& g = segs[owner];
        if (day >= g.correct_begin && day < g.correct_end) {
            if (p.alarm) hit[owner] = 1;
        } else if (day >= g.early_begin && day < g.early_end) {
            p.alarm ? ++out.fp : ++out.tn;
        } else {
            ++out.ignored; // repair span, target day included
        }
    }
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        if (segs[i].skipped) {
            ++out.skipped_episodes;
            continue;
        }
        hit[i] ? ++out.tp : ++out.fn;
    }
    finalize_rates(out);
    return out;
}

enum class baseline_kind { random, all_true };

// The two dummy predictors everything must beat: a fair coin and a constant
// alarm.
inline std::vector<prediction> baseline_trace(baseline_kind kind, const std::vector<int>& anchors,
                                              std::uint64_t seed) {
    std::vector<prediction> out;
    out.reserve(anchors.size());
    rng r(seed);
    for (int a : anchors)
        out.push_back({a, kind == baseline_kind::all_true ? 1 : (r.coin() ? 1 : 0)});
    return out;
}

}  // namespace pdm
