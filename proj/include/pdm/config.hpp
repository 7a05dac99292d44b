#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdm {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Declarative `key = value` file with [section] headers, # comments and blank
// lines. Order is preserved; duplicate sections or keys are rejected so a
// typo cannot silently shadow an earlier line.
struct config_file {
    struct entry {
        std::string key;
        std::string value;
        int line = 0;
    };
    struct section {
        std::string name;
        int line = 0;
        std::vector<entry> entries;

        const entry* find(std::string_view key) const {
            for (const entry& e : entries)
                if (e.key == key) return &e;
            return nullptr;
        }
    };
    std::vector<section> sections;

    const section* find(std::string_view name) const {
        for (const section& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] inline void config_fail(int line, const std::string& what) {
    throw config_error("config line " + std::to_string(line) + ": " + what);
}

}  // namespace detail

inline config_file parse_config(std::string_view text) {
    config_file cfg;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos && pos == text.size()) break;
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        std::string_view line = detail::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') detail::config_fail(line_no, "unterminated section header");
            std::string name(detail::trim(line.substr(1, line.size() - 2)));
            if (name.empty()) detail::config_fail(line_no, "empty section name");
            if (cfg.find(name)) detail::config_fail(line_no, "duplicate section [" + name + "]");
            cfg.sections.push_back({name, line_no, {}});
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            detail::config_fail(line_no, "expected 'key = value' or '[section]'");
        std::string key(detail::trim(line.substr(0, eq)));
        std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty()) detail::config_fail(line_no, "empty key");
        if (cfg.sections.empty()) detail::config_fail(line_no, "key outside any [section]");
        if (cfg.sections.back().find(key))
            detail::config_fail(line_no, "duplicate key '" + key + "'");
        cfg.sections.back().entries.push_back({key, value, line_no});
    }
    return cfg;
}

inline std::string to_text(const config_file& cfg) {
    std::string out;
    for (const auto& s : cfg.sections) {
        out += "[" + s.name + "]\n";
        for (const auto& e : s.entries) out += e.key + " = " + e.value + "\n";
        out += "\n";
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_list(std::string_view value) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        std::size_t comma = value.find(',', pos);
        std::string_view tok =
            value.substr(pos, comma == std::string_view::npos ? comma : comma - pos);
        tok = trim(tok);
        if (!tok.empty()) out.emplace_back(tok);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline long long parse_ll(std::string_view s, int line) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(std::string(s), &used);
    } catch (const std::exception&) {
        config_fail(line, "not an integer: '" + std::string(s) + "'");
    }
    if (used != s.size()) config_fail(line, "not an integer: '" + std::string(s) + "'");
    return v;
}

inline double parse_d(std::string_view s, int line) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(std::string(s), &used);
    } catch (const std::exception&) {
        config_fail(line, "not a number: '" + std::string(s) + "'");
    }
    if (used != s.size()) config_fail(line, "not a number: '" + std::string(s) + "'");
    return v;
}

}  // namespace detail

// Typed view over one section. Reads mark nothing; call reject_unknown with
// the full key set after pulling everything so misspelled keys surface.
class section_view {
public:
    section_view(const config_file& cfg, std::string_view name)
        : sec_(cfg.find(name)), name_(name) {}

    bool present() const { return sec_ != nullptr; }

    bool has(std::string_view key) const { return find(key) != nullptr; }

    std::string get_string(std::string_view key, std::string fallback) const {
        const auto* e = find(key);
        return e ? e->value : fallback;
    }

    long long get_int(std::string_view key, long long fallback) const {
        const auto* e = find(key);
        return e ? detail::parse_ll(e->value, e->line) : fallback;
    }

    double get_double(std::string_view key, double fallback) const {
        const auto* e = find(key);
        return e ? detail::parse_d(e->value, e->line) : fallback;
    }

    bool get_bool(std::string_view key, bool fallback) const {
        const auto* e = find(key);
        if (!e) return fallback;
        if (e->value == "on" || e->value == "true" || e->value == "1") return true;
        if (e->value == "off" || e->value == "false" || e->value == "0") return false;
        detail::config_fail(e->line, "expected on/off for '" + std::string(key) + "'");
    }

    std::vector<std::string> get_list(std::string_view key,
                                      std::vector<std::string> fallback) const {
        const auto* e = find(key);
        return e ? detail::split_list(e->value) : std::move(fallback);
    }

    // Comma list of integers; a..b tokens expand to inclusive runs.
    std::vector<std::uint64_t> get_seed_list(std::string_view key,
                                             std::vector<std::uint64_t> fallback) const {
        const auto* e = find(key);
        if (!e) return fallback;
        std::vector<std::uint64_t> out;
        for (const std::string& tok : detail::split_list(e->value)) {
            const std::size_t dots = tok.find("..");
            if (dots == std::string::npos) {
                out.push_back(static_cast<std::uint64_t>(detail::parse_ll(tok, e->line)));
                continue;
            }
            const long long a = detail::parse_ll(tok.substr(0, dots), e->line);
            const long long b = detail::parse_ll(tok.substr(dots + 2), e->line);
            if (a > b) detail::config_fail(e->line, "descending range '" + tok + "'");
            for (long long v = a; v <= b; ++v) out.push_back(static_cast<std::uint64_t>(v));
        }
        if (out.empty()) detail::config_fail(e->line, "empty list for '" + std::string(key) + "'");
        return out;
    }

    // Comma list of reals; a..b:step tokens expand inclusively. Values snap
    // to 1e-6 so grids like 0.10..0.90:0.05 print cleanly.
    std::vector<double> get_grid(std::string_view key, std::vector<double> fallback) const {
        const auto* e = find(key);
        if (!e) return fallback;
        std::vector<double> out;
        for (const std::string& tok : detail::split_list(e->value)) {
            const std::size_t dots = tok.find("..");
            if (dots == std::string::npos) {
                out.push_back(detail::parse_d(tok, e->line));
                continue;
            }
            const std::size_t colon = tok.find(':', dots);
            if (colon == std::string::npos)
                detail::config_fail(e->line, "range needs a :step in '" + tok + "'");
            const double a = detail::parse_d(tok.substr(0, dots), e->line);
            const double b = detail::parse_d(tok.substr(dots + 2, colon - dots - 2), e->line);
            const double step = detail::parse_d(tok.substr(colon + 1), e->line);
            if (!(step > 0.0) || b < a) detail::config_fail(e->line, "bad range '" + tok + "'");
            const auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9));
            for (long long i = 0; i <= n; ++i)
                out.push_back(std::round((a + static_cast<double>(i) * step) * 1e6) / 1e6);
        }
        if (out.empty()) detail::config_fail(e->line, "empty list for '" + std::string(key) + "'");
        return out;
    }

    void reject_unknown(std::initializer_list<std::string_view> known) const {
        if (!sec_) return;
        for (const auto& e : sec_->entries) {
            bool ok = false;
            for (std::string_view k : known) ok = ok || e.key == k;
            if (!ok)
                detail::config_fail(e.line, "unknown key '" + e.key + "' in [" +
                                                std::string(name_) + "]");
        }
    }

private:
    const config_file::entry* find(std::string_view key) const {
        return sec_ ? sec_->find(key) : nullptr;
    }

    const config_file::section* sec_;
    std::string_view name_;
};

inline void reject_unknown_sections(const config_file& cfg,
                                    std::initializer_list<std::string_view> known) {
    for (const auto& s : cfg.sections) {
        bool ok = false;
        for (std::string_view k : known) ok = ok || s.name == k;
        if (!ok) detail::config_fail(s.line, "unknown section [" + s.name + "]");
    }
}

}  // namespace pdm
