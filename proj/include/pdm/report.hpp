#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pdm/runner.hpp"

namespace pdm {

namespace detail {

// Shortest text that parses back to the same double; empty for NaN so missing
// values stay visibly blank in the CSV.
inline std::string csv_num(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double round_trip = 0.0;
    std::sscanf(buf, "%lf", &round_trip);
    if (round_trip == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
            std::sscanf(shorter, "%lf", &round_trip);
            if (round_trip == v) return shorter;
        }
    }
    return buf;
}

inline std::string csv_field(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return out;
}

inline std::string row_label(const cell_result& cell) {
    if (!cell.id.strategy.empty()) {
        std::string label = "ensemble " + cell.id.strategy;
        if (cell.oracle) label += " (oracle)";
        return label;
    }
    if (cell.id.reduction == "none") return cell.id.algorithm;
    return cell.id.algorithm + "+" + cell.id.reduction;
}

inline std::string md_cell(double v) {
    if (std::isnan(v)) return "err";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace detail

inline constexpr std::string_view results_csv_header =
    "dataset,setting,pipeline,algorithm,reduction,resample,strategy,mode,seed,f1,"
    "mean_f1,min_f1,tuning_f1_mean,kept_fraction,kept_count,knn_k,alarm_threshold,"
    "oracle,tuning_hash,error";

// Long-form CSV: one row per (cell, seed); cells that failed emit a single
// row with blank seed and f1 columns and the error message in the last field.
inline std::string render_csv(const results_table& table) {
    std::string out(results_csv_header);
    out += '\n';
    for (const cell_result& cell : table.rows) {
        const std::string prefix = detail::csv_field(cell.id.dataset) + "," +
                                   detail::csv_field(cell.id.setting) + "," +
                                   detail::csv_field(cell.id.pipeline) + "," +
                                   detail::csv_field(cell.id.algorithm) + "," +
                                   detail::csv_field(cell.id.reduction) + "," +
                                   detail::csv_field(cell.id.resample) + "," +
                                   detail::csv_field(cell.id.strategy) + "," +
                                   detail::csv_field(table.mode) + ",";
        const std::string suffix =
            detail::csv_num(cell.mean_f1) + "," + detail::csv_num(cell.min_f1) + "," +
            detail::csv_num(cell.chosen.mean_tuning_f1) + "," +
            detail::csv_num(cell.chosen.kept_fraction) + ",%KEPT%," +
            std::to_string(cell.chosen.knn_k) + "," +
            detail::csv_num(cell.chosen.alarm_threshold) + "," +
            (cell.oracle ? "1," : "0,") + std::to_string(cell.tuning_hash) + "," +
            detail::csv_field(cell.error);
        auto emit = [&](const std::string& seed, const std::string& f1,
                        const std::string& kept) {
            std::string line = prefix + seed + "," + f1 + "," + suffix;
            line.replace(line.find("%KEPT%"), 6, kept);
            out += line;
            out += '\n';
        };
        if (cell.per_seed_f1.empty()) {
            emit("", "", "");
            continue;
        }
        for (std::size_t i = 0; i < cell.per_seed_f1.size(); ++i)
            emit(std::to_string(table.seeds.at(i)), detail::csv_num(cell.per_seed_f1[i]),
                 i < cell.kept_counts.size() ? std::to_string(cell.kept_counts[i]) : "");
    }
    return out;
}

inline results_table parse_results_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty() || lines.front() != results_csv_header)
        throw std::runtime_error("results csv: missing or unexpected header");

    auto split = [](std::string_view line) {
        std::vector<std::string> fields;
        std::size_t p = 0;
        while (p <= line.size()) {
            std::size_t comma = line.find(',', p);
            fields.emplace_back(line.substr(p, comma == std::string_view::npos ? comma
                                                                               : comma - p));
            if (comma == std::string_view::npos) break;
            p = comma + 1;
        }
        return fields;
    };
    auto num = [](const std::string& s) {
        return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
    };

    results_table table;
    bool seeds_locked = false;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto f = split(lines[li]);
        if (f.size() != 20)
            throw std::runtime_error("results csv: wrong field count on data line " +
                                     std::to_string(li + 1));
        cell_id id{f[0], f[1], f[2], f[3], f[4], f[5], f[6]};
        if (table.mode.empty()) table.mode = f[7];
        cell_result* cell =
            !table.rows.empty() && table.rows.back().id == id ? &table.rows.back() : nullptr;
        if (!cell) {
            if (!table.rows.empty() && !seeds_locked && !table.rows.back().per_seed_f1.empty())
                seeds_locked = true;
            table.rows.push_back({});
            cell = &table.rows.back();
            cell->id = id;
            cell->mean_f1 = num(f[10]);
            cell->min_f1 = num(f[11]);
            cell->chosen.mean_tuning_f1 = num(f[12]);
            cell->chosen.kept_fraction = num(f[13]);
            cell->chosen.knn_k = f[15].empty() ? 0 : std::stoi(f[15]);
            cell->chosen.alarm_threshold = num(f[16]);
            cell->oracle = f[17] == "1";
            cell->tuning_hash = std::stoull(f[18]);
            cell->error = f[19];
        }
        if (!f[8].empty()) {
            if (!seeds_locked) {
                const auto seed = static_cast<std::uint64_t>(std::stoull(f[8]));
                if (cell->per_seed_f1.size() >= table.seeds.size()) table.seeds.push_back(seed);
            }
            cell->per_seed_f1.push_back(num(f[9]));
            if (!f[14].empty())
                cell->kept_counts.push_back(static_cast<std::size_t>(std::stoull(f[14])));
        }
    }
    return table;
}

// Per-dataset mean and minimum pivot tables, settings as columns, baselines
// as the final rows. Cells that failed render as "err".
inline std::string render_markdown(const results_table& table) {
    std::string out = "# Benchmark results\n\nmode: " + table.mode + ", seeds per cell: " +
                      std::to_string(table.seeds.size()) + "\n";

    std::vector<std::string> datasets, settings;
    for (const cell_result& c : table.rows) {
        if (std::find(datasets.begin(), datasets.end(), c.id.dataset) == datasets.end())
            datasets.push_back(c.id.dataset);
        if (std::find(settings.begin(), settings.end(), c.id.setting) == settings.end())
            settings.push_back(c.id.setting);
    }

    for (const std::string& d : datasets) {
        std::vector<std::string> labels, baselines;
        for (const cell_result& c : table.rows) {
            if (c.id.dataset != d) continue;
            const std::string label = detail::row_label(c);
            auto& bucket =
                (c.id.algorithm == "all_true" || c.id.algorithm == "random") ? baselines : labels;
            if (std::find(bucket.begin(), bucket.end(), label) == bucket.end())
                bucket.push_back(label);
        }
        labels.insert(labels.end(), baselines.begin(), baselines.end());

        auto find_cell = [&](const std::string& label,
                             const std::string& setting) -> const cell_result* {
            for (const cell_result& c : table.rows)
                if (c.id.dataset == d && c.id.setting == setting && detail::row_label(c) == label)
                    return &c;
            return nullptr;
        };

        for (const bool mean_table : {true, false}) {
            out += "\n## " + d + (mean_table ? " mean F1\n\n" : " minimum F1\n\n");
            out += "| predictor |";
            for (const std::string& s : settings) out += " " + s + " |";
            out += "\n|---|";
            for (std::size_t i = 0; i < settings.size(); ++i) out += "---|";
            out += "\n";
            for (const std::string& label : labels) {
                out += "| " + label + " |";
                for (const std::string& s : settings) {
                    const cell_result* c = find_cell(label, s);
                    out += c ? " " + detail::md_cell(mean_table ? c->mean_f1 : c->min_f1) + " |"
                             : " - |";
                }
                out += "\n";
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence: one JSON file per cell plus the consolidated CSV. Writes go to
// a temp name first and rename into place, so readers never see partial files
// and reruns are byte-comparable.

namespace detail {

inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string cell_slug(const cell_id& id) {
    std::string s = id.dataset + "_" + id.setting + "_" + id.pipeline + "_" + id.algorithm + "_" +
                    id.reduction + "_" + id.resample;
    if (!id.strategy.empty()) s += "_" + id.strategy;
    for (char& c : s) c = c == '-' ? '_' : static_cast<char>(std::tolower(c));
    return s;
}

inline nlohmann::json cell_json(const results_table& table, const cell_result& cell) {
    nlohmann::json j;
    j["dataset"] = cell.id.dataset;
    j["setting"] = cell.id.setting;
    j["pipeline"] = cell.id.pipeline;
    j["algorithm"] = cell.id.algorithm;
    j["reduction"] = cell.id.reduction;
    j["resample"] = cell.id.resample;
    j["strategy"] = cell.id.strategy;
    j["mode"] = table.mode;
    j["seeds"] = table.seeds;
    j["per_seed_f1"] = cell.per_seed_f1;
    j["mean_f1"] = cell.mean_f1;
    j["min_f1"] = cell.min_f1;
    j["kept_fraction"] = cell.chosen.kept_fraction;
    j["kept_counts"] = cell.kept_counts;
    j["knn_k"] = cell.chosen.knn_k;
    j["alarm_threshold"] = cell.chosen.alarm_threshold;
    j["tuning_f1_mean"] = cell.chosen.mean_tuning_f1;
    j["tuning_hash"] = cell.tuning_hash;
    j["oracle"] = cell.oracle;
    j["error"] = cell.error;
    return j;
}

}  // namespace detail

inline void persist_results(const results_table& table, const std::string& out_dir) {
    const std::filesystem::path root(out_dir);
    std::filesystem::create_directories(root / "cells");
    for (const cell_result& cell : table.rows)
        detail::write_atomic(root / "cells" / (detail::cell_slug(cell.id) + ".json"),
                             detail::cell_json(table, cell).dump(2) + "\n");
    detail::write_atomic(root / "results.csv", render_csv(table));
}

}  // namespace pdm
