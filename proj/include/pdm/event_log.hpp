#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pdm/detail/dates.hpp"

namespace pdm {

// One logged incident: an event of some type on some day.
struct event_record {
    int day = 0;        // day index within the owning log, >= 0
    int event_type = 0; // in [0, ft)
};

inline bool operator==(const event_record& a, const event_record& b) {
    return a.day == b.day && a.event_type == b.event_type;
}

// A maximal span of days ending with a target-event occurrence.
struct episode {
    int start_day = 0;
    int target_day = 0;
};

inline bool operator==(const episode& a, const episode& b) {
    return a.start_day == b.start_day && a.target_day == b.target_day;
}

// Timestamped discrete event log over a day-granularity horizon. Records are
// kept sorted by day (stable for same-day ties); intra-day order carries no
// meaning. Immutable by convention once built.
struct event_log {
    std::vector<event_record> records;
    int horizon_days = 0;
    int ft = 0;          // number of distinct event types
    int target_type = 0; // the failure event the pipelines learn to predict
};

inline bool operator==(const event_log& a, const event_log& b) {
    return a.records == b.records && a.horizon_days == b.horizon_days && a.ft == b.ft &&
           a.target_type == b.target_type;
}

class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline int parse_int_strict(std::string_view s, int line_no, const char* what) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw parse_error("line " + std::to_string(line_no) + ": bad " + what + " '" +
                          std::string(s) + "'");
    return v;
}

}  // namespace detail

inline constexpr std::string_view default_csv_epoch = "2020-01-01";

// Renders the log as `date,event_id` lines preceded by a metadata header.
// Day 0 maps to `epoch_date`; output is LF-terminated and day-sorted.
inline std::string write_csv(const event_log& log,
                             std::string_view epoch_date = default_csv_epoch) {
    const std::int64_t epoch = detail::parse_iso_date(epoch_date);
    std::string out;
    out += "# ft=" + std::to_string(log.ft) + " target=" + std::to_string(log.target_type) +
           " epoch=" + std::string(epoch_date) + " horizon=" + std::to_string(log.horizon_days) +
           "\n";
    for (const event_record& r : log.records) {
        out += detail::format_iso_date(epoch + r.day);
        out += ',';
        out += std::to_string(r.event_type);
        out += '\n';
    }
    return out;
}

// Parses `date,event_id` CSV text into an event_log. An optional first line
// `# ft=<n> target=<id> epoch=<date> horizon=<days>` fixes the metadata;
// without it, ft = 1 + max id, target = 0, and day 0 is the earliest date.
inline event_log ingest_csv(std::string_view text) {
    event_log log;
    std::optional<std::int64_t> epoch;
    std::optional<int> declared_ft, declared_horizon;

    std::vector<std::pair<std::int64_t, int>> raw;  // (absolute day, type)
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line_no != 1) throw parse_error("line " + std::to_string(line_no) +
                                                ": metadata header allowed only on line 1");
            std::size_t i = 1;
            while (i < line.size()) {
                while (i < line.size() && line[i] == ' ') ++i;
                std::size_t sp = line.find(' ', i);
                std::string_view tok = line.substr(i, sp == std::string_view::npos ? sp : sp - i);
                i = sp == std::string_view::npos ? line.size() : sp + 1;
                if (tok.empty()) continue;
                std::size_t eq = tok.find('=');
                if (eq == std::string_view::npos)
                    throw parse_error("line 1: bad header token '" + std::string(tok) + "'");
                std::string_view key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "ft") declared_ft = detail::parse_int_strict(val, 1, "ft");
                else if (key == "target") log.target_type = detail::parse_int_strict(val, 1, "target");
                else if (key == "epoch") epoch = detail::parse_iso_date(val);
                else if (key == "horizon") declared_horizon = detail::parse_int_strict(val, 1, "horizon");
                else throw parse_error("line 1: unknown header key '" + std::string(key) + "'");
            }
            continue;
        }
        std::size_t comma = line.find(',');
        if (comma == std::string_view::npos)
            throw parse_error("line " + std::to_string(line_no) + ": expected 'date,event_id'");
        std::string_view date_part = line.substr(0, comma);
        std::string_view id_part = line.substr(comma + 1);
        std::int64_t abs_day;
        try {
            abs_day = detail::parse_iso_date(date_part);
        } catch (const std::invalid_argument& e) {
            throw parse_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        int id = detail::parse_int_strict(id_part, line_no, "event id");
        if (id < 0) throw parse_error("line " + std::to_string(line_no) + ": negative event id");
        raw.emplace_back(abs_day, id);
    }

    if (!raw.empty()) {
        std::int64_t base;
        if (epoch) {
            base = *epoch;
        } else {
            base = raw.front().first;
            for (const auto& [d, t] : raw) base = std::min(base, d);
        }
        int max_day = 0, max_type = 0;
        log.records.reserve(raw.size());
        for (const auto& [d, t] : raw) {
            if (d < base) throw parse_error("record date precedes declared epoch");
            log.records.push_back({static_cast<int>(d - base), t});
            max_day = std::max(max_day, log.records.back().day);
            max_type = std::max(max_type, t);
        }
        std::stable_sort(log.records.begin(), log.records.end(),
                         [](const event_record& a, const event_record& b) { return a.day < b.day; });
        log.ft = declared_ft.value_or(max_type + 1);
        log.horizon_days = declared_horizon.value_or(max_day + 1);
        if (max_type >= log.ft) throw parse_error("event id exceeds declared ft");
        if (max_day >= log.horizon_days) throw parse_error("record day exceeds declared horizon");
    } else {
        log.ft = declared_ft.value_or(0);
        log.horizon_days = declared_horizon.value_or(0);
    }
    if (log.ft > 0 && log.target_type >= log.ft)
        throw parse_error("target id exceeds declared ft");
    return log;
}

// Splits into a training log of the first s_tr days and a test log of the
// next s_te days (re-based to day 0). Both inherit ft and target_type.
inline std::pair<event_log, event_log> split_train_test(const event_log& log, int s_tr, int s_te) {
    if (s_tr < 0 || s_te < 0 || s_tr + s_te > log.horizon_days)
        throw std::out_of_range("split_train_test: spans exceed log horizon");
    event_log train, test;
    train.ft = test.ft = log.ft;
    train.target_type = test.target_type = log.target_type;
    train.horizon_days = s_tr;
    test.horizon_days = s_te;
    for (const event_record& r : log.records) {
        if (r.day < s_tr)
            train.records.push_back(r);
        else if (r.day < s_tr + s_te)
            test.records.push_back({r.day - s_tr, r.event_type});
    }
    return {std::move(train), std::move(test)};
}

// One episode per distinct target-event day: episode i spans from the day
// after target i-1 (day 0 for the first) through target i. Same-day duplicate
// target records collapse into one occurrence; days after the last target
// belong to no episode.
inline std::vector<episode> split_episodes(const event_log& log) {
    std::vector<episode> out;
    int prev_end = -1;
    for (const event_record& r : log.records) {
        if (r.event_type != log.target_type) continue;
        if (r.day == prev_end) continue;  // same-day duplicate
        out.push_back({prev_end + 1, r.day});
        prev_end = r.day;
    }
    return out;
}

}  // namespace pdm
