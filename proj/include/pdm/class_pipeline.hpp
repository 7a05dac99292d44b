#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdm/event_log.hpp"

namespace pdm {

// Sliding-window geometry: an observation window of X sub-windows of M days,
// an optional buffer of Z days, then a prediction window of Y days.
struct window_spec {
    int X = 1;
    int M = 1;
    int Y = 1;
    int Z = 0;
    int step = 1;

    int ow_length() const { return X * M; }
};

// A, B vary the window sizes; C, D add a 3-day buffer. Step is half the
// prediction window, rounded up.
inline window_spec settings_preset(std::string_view name) {
    window_spec w;
    if (name == "A" || name == "C") {
        w.Y = 16;
        w.X = 4;
        w.M = 4;
    } else if (name == "B" || name == "D") {
        w.Y = 6;
        w.X = 3;
        w.M = 2;
    } else {
        throw std::invalid_argument("unknown setting '" + std::string(name) + "'");
    }
    w.Z = (name == "C" || name == "D") ? 3 : 0;
    w.step = (w.Y + 1) / 2;
    return w;
}

struct window_slice {
    int ow_start = 0;
    int ow_end = 0;   // exclusive
    int pw_start = 0; // = ow_end + Z
    int pw_end = 0;   // exclusive
    int anchor_day = 0; // last OW day, the day the prediction is made
};

struct labeled_sample {
    std::vector<double> features;
    double label = 0.0;
    int anchor_day = 0;
};

// Emits slices from day 0 forward while the prediction window still fits.
// A horizon too short for one full slice yields an empty sequence.
inline std::vector<window_slice> slice_windows(const event_log& log, const window_spec& spec) {
    std::vector<window_slice> out;
    for (int start = 0;; start += spec.step) {
        window_slice s;
        s.ow_start = start;
        s.ow_end = start + spec.ow_length();
        s.pw_start = s.ow_end + spec.Z;
        s.pw_end = s.pw_start + spec.Y;
        s.anchor_day = s.ow_end - 1;
        if (s.pw_end > log.horizon_days) break;
        out.push_back(s);
    }
    return out;
}

// True iff the target fails inside [pw_start, pw_end). Buffer days between
// the observation and prediction windows never contribute.
inline int label_window(const window_slice& s, const event_log& log) {
    for (const event_record& r : log.records) {
        if (r.day >= s.pw_end) break;
        if (r.day >= s.pw_start && r.event_type == log.target_type) return 1;
    }
    return 0;
}

// Per-sub-window event-type frequency counts, concatenated in time order:
// entry j*ft + t counts type-t events in sub-window j.
inline std::vector<double> basic_features(const window_slice& s, const event_log& log,
                                          const window_spec& spec, int ft) {
    std::vector<double> v(static_cast<std::size_t>(spec.X) * ft, 0.0);
    for (const event_record& r : log.records) {
        if (r.day >= s.ow_end) break;
        if (r.day < s.ow_start) continue;
        const int j = (r.day - s.ow_start) / spec.M;
        v[static_cast<std::size_t>(j) * ft + r.event_type] += 1.0;
    }
    return v;
}

// Five summary numbers per event type: occurrence distances to the start of
// the prediction window (min, max, mean) and gaps between consecutive
// occurrences (mean, population std). Absent types and undefined gap stats
// are the -1 sentinel, distinguishable since real distances are >= 1.
inline std::vector<double> statistical_features(const window_slice& s, const event_log& log,
                                                int ft) {
    std::vector<std::vector<int>> occ(static_cast<std::size_t>(ft));
    for (const event_record& r : log.records) {
        if (r.day >= s.ow_end) break;
        if (r.day < s.ow_start) continue;
        occ[static_cast<std::size_t>(r.event_type)].push_back(r.day);
    }
    std::vector<double> v(5u * ft, -1.0);
    for (int t = 0; t < ft; ++t) {
        const auto& days = occ[static_cast<std::size_t>(t)];
        if (days.empty()) continue;
        double mn = 1e300, mx = -1e300, sum = 0.0;
        for (int d : days) {
            const double dist = s.pw_start - d;
            mn = std::min(mn, dist);
            mx = std::max(mx, dist);
            sum += dist;
        }
        const std::size_t base = 5u * static_cast<std::size_t>(t);
        v[base + 0] = mn;
        v[base + 1] = mx;
        v[base + 2] = sum / static_cast<double>(days.size());
        if (days.size() >= 2) {
            double gsum = 0.0;
            for (std::size_t i = 1; i < days.size(); ++i) gsum += days[i] - days[i - 1];
            const double gmean = gsum / static_cast<double>(days.size() - 1);
            double var = 0.0;
            for (std::size_t i = 1; i < days.size(); ++i) {
                const double d = (days[i] - days[i - 1]) - gmean;
                var += d * d;
            }
            v[base + 3] = gmean;
            v[base + 4] = std::sqrt(var / static_cast<double>(days.size() - 1));
        }
    }
    return v;
}

// Sorted set of distinct event types observed in the slice's OW.
inline std::vector<int> window_type_set(const window_slice& s, const event_log& log) {
    std::vector<int> types;
    for (const event_record& r : log.records) {
        if (r.day >= s.ow_end) break;
        if (r.day < s.ow_start) continue;
        types.push_back(r.event_type);
    }
    std::sort(types.begin(), types.end());
    types.erase(std::unique(types.begin(), types.end()), types.end());
    return types;
}

inline double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++inter;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Distinct target days inside the slice's prediction window, ascending: the
// failures this window is predicting.
inline std::vector<int> pw_target_days(const window_slice& s, const event_log& log) {
    std::vector<int> days;
    for (const event_record& r : log.records) {
        if (r.day >= s.pw_end) break;
        if (r.day >= s.pw_start && r.event_type == log.target_type) days.push_back(r.day);
    }
    days.erase(std::unique(days.begin(), days.end()), days.end());
    return days;
}

// A positive training window's type set plus the failures that made it
// positive. The target days identify which windows were born from the same
// failure occurrence.
struct positive_ref {
    std::vector<int> types;        // sorted distinct OW types of the source window
    std::vector<int> target_days;  // targets inside the source window's PW, ascending

    bool operator==(const positive_ref&) const = default;
};

namespace detail {

inline bool shares_day(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j])
            ++i;
        else
            ++j;
    }
    return false;
}

}  // namespace detail

// (max, mean) Jaccard similarity against the positive reference windows.
// No references means no signal: both entries 0.
inline std::vector<double> similarity_features(const window_slice& s, const event_log& log,
                                               const std::vector<std::vector<int>>& positive_refs) {
    const std::vector<int> types = window_type_set(s, log);
    double best = 0.0, sum = 0.0;
    for (const auto& ref : positive_refs) {
        const double sim = jaccard(types, ref);
        best = std::max(best, sim);
        sum += sim;
    }
    if (positive_refs.empty()) return {0.0, 0.0};
    return {best, sum / static_cast<double>(positive_refs.size())};
}

// Same aggregation over provenance-carrying references. exclude_target_days
// drops every reference born from one of those failures: overlapping windows
// of the same episode share the injected pattern itself, so scoring a
// training window against its own episode's references degenerates into a
// label marker that does not survive to held-out data.
inline std::vector<double> similarity_features(const window_slice& s, const event_log& log,
                                               const std::vector<positive_ref>& positive_refs,
                                               const std::vector<int>* exclude_target_days = nullptr) {
    const std::vector<int> types = window_type_set(s, log);
    double best = 0.0, sum = 0.0;
    std::size_t counted = 0;
    for (const positive_ref& ref : positive_refs) {
        if (exclude_target_days != nullptr && detail::shares_day(ref.target_days, *exclude_target_days))
            continue;
        const double sim = jaccard(types, ref.types);
        best = std::max(best, sim);
        sum += sim;
        ++counted;
    }
    if (counted == 0) return {0.0, 0.0};
    return {best, sum / static_cast<double>(counted)};
}

// References from this log's positively labeled windows; feeds
// similarity_features for both this log (training) and a held-out log (test).
inline std::vector<positive_ref> collect_positive_refs(const event_log& log,
                                                       const window_spec& spec) {
    std::vector<positive_ref> refs;
    for (const window_slice& s : slice_windows(log, spec))
        if (label_window(s, log) == 1)
            refs.push_back({window_type_set(s, log), pw_target_days(s, log)});
    return refs;
}

// One labeled sample per slice: basic, statistical and similarity features
// concatenated (X*ft + 5*ft + 2 entries). Pass training-log references when
// featurizing a test log so nothing leaks from test labels. Set
// refs_include_self when the references were collected from this very log:
// each positive window then scores only against references from other
// failures, never its own episode's.
inline std::vector<labeled_sample> build_dataset(const event_log& log, const window_spec& spec,
                                                 const std::vector<positive_ref>& positive_refs,
                                                 bool refs_include_self = false) {
    std::vector<labeled_sample> out;
    for (const window_slice& s : slice_windows(log, spec)) {
        labeled_sample sample;
        sample.anchor_day = s.anchor_day;
        sample.label = label_window(s, log);
        sample.features = basic_features(s, log, spec, log.ft);
        std::vector<double> stat = statistical_features(s, log, log.ft);
        std::vector<double> sim;
        if (refs_include_self && sample.label == 1.0) {
            const std::vector<int> own = pw_target_days(s, log);
            sim = similarity_features(s, log, positive_refs, &own);
        } else {
            sim = similarity_features(s, log, positive_refs);
        }
        sample.features.insert(sample.features.end(), stat.begin(), stat.end());
        sample.features.insert(sample.features.end(), sim.begin(), sim.end());
        out.push_back(std::move(sample));
    }
    return out;
}

}  // namespace pdm
