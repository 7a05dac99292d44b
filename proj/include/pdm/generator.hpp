#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pdm/detail/rng.hpp"
#include "pdm/event_log.hpp"

namespace pdm {

// Synthetic-log recipe. Warning patterns of pl elements are injected before
// target events; each element is realized by one member of its event-type
// family. pc controls how many instances are distorted or decoyed, pps how
// much a distorted instance loses.
struct generator_spec {
    int ft = 0;
    int s_tr = 0;
    int s_te = 0;
    int pl = 0;
    int min_f = 1, max_f = 1;
    int min_t = 0, max_t = 0;
    int min_p = 1, max_p = 1;
    double pc = 1.0;
    double pps = 0.0;
    bool shuffle = false;
    int target_count = 1; // intended occurrences over the full span
};

class generation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// DS1 and DS2 are the base recipes; DS3-DS6 are the documented variations
// (10x event types, shuffled elements, halved target count).
inline generator_spec preset(std::string_view name) {
    generator_spec ds1;
    ds1.ft = 150;
    ds1.s_tr = 1094;
    ds1.s_te = 730;
    ds1.pl = 6;
    ds1.min_f = 1;
    ds1.max_f = 3;
    ds1.min_t = 1;
    ds1.max_t = 5;
    ds1.min_p = 1;
    ds1.max_p = 2;
    ds1.pc = 0.90;
    ds1.pps = 0.50;
    ds1.shuffle = false;
    ds1.target_count = 50;

    generator_spec ds2 = ds1;
    ds2.pl = 4;
    ds2.min_f = 3;
    ds2.max_f = 4;

    if (name == "DS1") return ds1;
    if (name == "DS2") return ds2;
    if (name == "DS3") {
        ds1.ft = 1500;
        return ds1;
    }
    if (name == "DS4") {
        ds2.ft = 1500;
        return ds2;
    }
    if (name == "DS5") {
        ds2.shuffle = true;
        return ds2;
    }
    if (name == "DS6") {
        ds2.shuffle = true;
        ds2.target_count = 25;
        return ds2;
    }
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

struct weibull_params {
    double shape = 1.0;
    double scale = 1.0;
};

// Inverse-CDF draw: scale * (-ln(1-u))^(1/shape), u uniform in (0,1).
inline double sample_weibull(const weibull_params& p, rng& r) {
    if (!(p.shape > 0.0) || !(p.scale > 0.0))
        throw std::invalid_argument("weibull params must be positive");
    double u;
    do {
        u = r.uniform01();
    } while (u == 0.0);
    return p.scale * std::pow(-std::log1p(-u), 1.0 / p.shape);
}

// One injected pattern occurrence as actually emitted into the log.
// Decoys have no associated target (target_day = -1); partial instances
// emit fewer than pl elements.
struct pattern_instance {
    std::vector<int> element_days;  // ascending
    std::vector<int> element_types; // parallel to element_days
    int target_day = -1;
    bool partial = false;
    bool decoy = false;
};

inline bool operator==(const pattern_instance& a, const pattern_instance& b) {
    return a.element_days == b.element_days && a.element_types == b.element_types &&
           a.target_day == b.target_day && a.partial == b.partial && a.decoy == b.decoy;
}

// Ground-truth bookkeeping for one generated log. Consumed by tests and the
// plan sidecar file, never by the prediction pipelines.
struct pattern_plan {
    std::vector<std::vector<int>> families;
    std::vector<pattern_instance> instances;
};

inline bool operator==(const pattern_plan& a, const pattern_plan& b) {
    return a.families == b.families && a.instances == b.instances;
}

namespace detail {

inline void validate(const generator_spec& s) {
    auto bad = [](const char* msg) { throw std::invalid_argument(msg); };
    if (s.pl < 1) bad("pl must be >= 1");
    if (s.min_t < 0 || s.max_t < s.min_t) bad("need 0 <= min_t <= max_t");
    if (s.min_p < 1 || s.max_p < s.min_p) bad("need 0 < min_p <= max_p");
    if (s.min_f < 1 || s.max_f < s.min_f) bad("need 1 <= min_f <= max_f");
    if (s.pl * s.max_f + 1 > s.ft) bad("families plus target exceed the type space");
    if (s.pc < 0.0 || s.pc > 1.0) bad("pc must be in [0,1]");
    if (s.pps < 0.0 || s.pps > 1.0) bad("pps must be in [0,1]");
    if (s.s_tr < 0 || s.s_te < 0) bad("spans must be nonnegative");
    if (s.target_count < 1) bad("target_count must be >= 1");
}

// Element days for an instance whose last element sits on last_day, walking
// gaps backwards: earliest day first, family order = position order.
inline std::vector<int> pattern_days(const generator_spec& s, int last_day, rng& r) {
    std::vector<int> days(static_cast<std::size_t>(s.pl));
    days[s.pl - 1] = last_day;
    for (int i = s.pl - 2; i >= 0; --i)
        days[i] = days[i + 1] - static_cast<int>(r.uniform_int(s.min_p, s.max_p));
    return days;
}

// Element types: position j realizes family j, or a permuted family when
// shuffling. The permutation draw happens only when shuffle is on.
inline std::vector<int> pattern_types(const generator_spec& s,
                                      const std::vector<std::vector<int>>& families, rng& r) {
    std::vector<int> order(static_cast<std::size_t>(s.pl));
    for (int i = 0; i < s.pl; ++i) order[i] = i;
    if (s.shuffle) r.shuffle(order);
    std::vector<int> types(static_cast<std::size_t>(s.pl));
    for (int j = 0; j < s.pl; ++j) {
        const auto& fam = families[order[j]];
        types[j] = fam[static_cast<std::size_t>(r.bounded(fam.size()))];
    }
    return types;
}

}  // namespace detail

// Builds one log of s_tr + s_te days plus its injection bookkeeping.
// Draw order is fixed (families, target schedule, distortion picks, per-target
// instances, decoys, background) so equal (spec, seed) replay byte-identically.
inline std::pair<event_log, pattern_plan> generate(const generator_spec& spec,
                                                   std::uint64_t seed) {
    detail::validate(spec);
    const int span = spec.s_tr + spec.s_te;
    const int min_gap = spec.max_t + spec.pl * spec.max_p + 1; // full pattern fits
    if (span <= min_gap)
        throw generation_error("span too short to fit a pattern episode");

    rng r(detail::mix64(seed));
    pattern_plan plan;

    plan.families.resize(static_cast<std::size_t>(spec.pl));
    {
        std::vector<int> sizes(static_cast<std::size_t>(spec.pl));
        int total = 0;
        for (int i = 0; i < spec.pl; ++i) {
            sizes[i] = static_cast<int>(r.uniform_int(spec.min_f, spec.max_f));
            total += sizes[i];
        }
        auto picks = r.sample_without_replacement(static_cast<std::size_t>(spec.ft - 1),
                                                  static_cast<std::size_t>(total));
        std::size_t k = 0;
        for (int i = 0; i < spec.pl; ++i) {
            for (int j = 0; j < sizes[i]; ++j)
                plan.families[i].push_back(1 + static_cast<int>(picks[k++]));
            std::sort(plan.families[i].begin(), plan.families[i].end());
        }
    }

    const double g = static_cast<double>(span) / spec.target_count;
    std::vector<int> targets;
    {
        const weibull_params gap_dist{2.0, g / std::tgamma(1.5)};
        int prev = -1;
        for (;;) {
            int gap = std::max(min_gap,
                               static_cast<int>(std::floor(sample_weibull(gap_dist, r))));
            int next = prev + gap;
            if (next >= span) break;
            targets.push_back(next);
            prev = next;
        }
    }
    const std::size_t n = targets.size();

    std::vector<char> is_partial(n, 0);
    {
        const auto partial_count =
            static_cast<std::size_t>(std::llround((1.0 - spec.pc) * static_cast<double>(n)));
        for (std::size_t idx : r.sample_without_replacement(n, partial_count)) is_partial[idx] = 1;
    }

    std::vector<event_record> records;
    for (int t : targets) records.push_back({t, 0});

    const int remove_count = static_cast<int>(std::ceil(spec.pps * spec.pl));
    for (std::size_t ti = 0; ti < n; ++ti) {
        pattern_instance inst;
        inst.target_day = targets[ti];
        const int d_t = static_cast<int>(r.uniform_int(spec.min_t, spec.max_t));
        inst.element_days = detail::pattern_days(spec, targets[ti] - d_t, r);
        inst.element_types = detail::pattern_types(spec, plan.families, r);
        if (is_partial[ti] && remove_count > 0) {
            inst.partial = true;
            auto removed = r.sample_without_replacement(static_cast<std::size_t>(spec.pl),
                                                        static_cast<std::size_t>(remove_count));
            std::vector<char> gone(static_cast<std::size_t>(spec.pl), 0);
            for (std::size_t p : removed) gone[p] = 1;
            pattern_instance kept;
            kept.target_day = inst.target_day;
            kept.partial = true;
            for (int j = 0; j < spec.pl; ++j)
                if (!gone[j]) {
                    kept.element_days.push_back(inst.element_days[j]);
                    kept.element_types.push_back(inst.element_types[j]);
                }
            inst = std::move(kept);
        }
        for (std::size_t j = 0; j < inst.element_days.size(); ++j)
            records.push_back({inst.element_days[j], inst.element_types[j]});
        plan.instances.push_back(std::move(inst));
    }

    {
        // tiny nudge so exact fractions like 0.1*50 floor to 5, not 4
        const int decoy_count =
            static_cast<int>(std::floor((1.0 - spec.pc) * spec.target_count + 1e-9));
        for (int d = 0; d < decoy_count; ++d) {
            bool placed = false;
            for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
                const int anchor = static_cast<int>(r.uniform_int(0, span - 1));
                auto days = detail::pattern_days(spec, anchor, r);
                auto types = detail::pattern_types(spec, plan.families, r);
                if (days.front() < 0) continue;
                bool near_target = false;
                for (int t : targets)
                    if (t >= anchor && t <= anchor + spec.max_t) near_target = true;
                if (near_target) continue;
                pattern_instance inst;
                inst.decoy = true;
                inst.element_days = std::move(days);
                inst.element_types = std::move(types);
                for (std::size_t j = 0; j < inst.element_days.size(); ++j)
                    records.push_back({inst.element_days[j], inst.element_types[j]});
                plan.instances.push_back(std::move(inst));
                placed = true;
            }
            if (!placed) throw generation_error("could not place a decoy pattern");
        }
    }

    {
        std::vector<char> in_family(static_cast<std::size_t>(spec.ft), 0);
        for (const auto& fam : plan.families)
            for (int t : fam) in_family[static_cast<std::size_t>(t)] = 1;
        for (int b = 1; b < spec.ft; ++b) {
            weibull_params wp;
            if (in_family[static_cast<std::size_t>(b)]) {
                wp = {1.0, 4.0 * g}; // family types stay mostly quiet outside patterns
            } else {
                const double shape = r.uniform_real(0.8, 1.6);
                const double mean = r.uniform_real(20.0, 120.0);
                wp = {shape, mean / std::tgamma(1.0 + 1.0 / shape)};
            }
            double t = 0.0;
            for (;;) {
                t += sample_weibull(wp, r);
                const int day = static_cast<int>(std::floor(t));
                if (day >= span) break;
                records.push_back({day, b});
            }
        }
    }

    event_log log;
    log.ft = spec.ft;
    log.target_type = 0;
    log.horizon_days = span;
    log.records = std::move(records);
    std::stable_sort(log.records.begin(), log.records.end(),
                     [](const event_record& a, const event_record& b) { return a.day < b.day; });
    return {std::move(log), std::move(plan)};
}

}  // namespace pdm
