#include <catch2/catch_amalgamated.hpp>

#include "pdm/config.hpp"

static const char* sample =
    "# benchmark run\n"
    "[experiment]\n"
    "datasets = DS1, DS2\n"
    "seeds = 1..4, 9\n"
    "\n"
    "[reg]\n"
    "alarm_thresholds = 0.10..0.30:0.05, 0.9\n"
    "[matrix]\n"
    "baselines = off\n";

TEST_CASE("config parses sections, lists and ranges") {
    const pdm::config_file cfg = pdm::parse_config(sample);
    REQUIRE(cfg.sections.size() == 3);
    const pdm::section_view exp(cfg, "experiment");
    CHECK(exp.get_list("datasets", {}) == std::vector<std::string>{"DS1", "DS2"});
    CHECK(exp.get_seed_list("seeds", {}) == std::vector<std::uint64_t>{1, 2, 3, 4, 9});
    const pdm::section_view reg(cfg, "reg");
    const auto grid = reg.get_grid("alarm_thresholds", {});
    REQUIRE(grid.size() == 6);
    CHECK(grid[0] == 0.10);
    CHECK(grid[4] == 0.30);
    CHECK(grid[5] == 0.9);
    CHECK_FALSE(pdm::section_view(cfg, "matrix").get_bool("baselines", true));
}

TEST_CASE("config falls back when keys or sections are absent") {
    const pdm::config_file cfg = pdm::parse_config(sample);
    const pdm::section_view missing(cfg, "nope");
    CHECK_FALSE(missing.present());
    CHECK(missing.get_string("x", "fb") == "fb");
    CHECK(missing.get_int("x", 7) == 7);
    const pdm::section_view exp(cfg, "experiment");
    CHECK(exp.get_double("validation_fraction", 0.2) == 0.2);
    CHECK(exp.has("seeds"));
    CHECK_FALSE(exp.has("mode"));
}

TEST_CASE("config round-trips through its text form") {
    const pdm::config_file cfg = pdm::parse_config(sample);
    const std::string text = pdm::to_text(cfg);
    const pdm::config_file again = pdm::parse_config(text);
    REQUIRE(again.sections.size() == cfg.sections.size());
    for (std::size_t i = 0; i < cfg.sections.size(); ++i) {
        CHECK(again.sections[i].name == cfg.sections[i].name);
        REQUIRE(again.sections[i].entries.size() == cfg.sections[i].entries.size());
        for (std::size_t j = 0; j < cfg.sections[i].entries.size(); ++j) {
            CHECK(again.sections[i].entries[j].key == cfg.sections[i].entries[j].key);
            CHECK(again.sections[i].entries[j].value == cfg.sections[i].entries[j].value);
        }
    }
    CHECK(pdm::to_text(again) == text);
}

TEST_CASE("config rejects malformed input with line numbers") {
    using Catch::Matchers::ContainsSubstring;
    CHECK_THROWS_WITH(pdm::parse_config("[a]\nx = 1\nx = 2\n"), ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(pdm::parse_config("[a]\n[a]\n"), ContainsSubstring("duplicate section"));
    CHECK_THROWS_WITH(pdm::parse_config("x = 1\n"), ContainsSubstring("outside any"));
    CHECK_THROWS_WITH(pdm::parse_config("[a]\njust words\n"), ContainsSubstring("expected"));
    CHECK_THROWS_WITH(pdm::parse_config("[oops\n"), ContainsSubstring("unterminated"));
    CHECK_THROWS_AS(pdm::parse_config("[a]\n = 3\n"), pdm::config_error);

    const pdm::config_file bad = pdm::parse_config("[a]\nn = ten\ns = 5..3\ng = 1..2\n");
    const pdm::section_view a(bad, "a");
    CHECK_THROWS_WITH(a.get_int("n", 0), ContainsSubstring("not an integer"));
    CHECK_THROWS_WITH(a.get_seed_list("s", {}), ContainsSubstring("descending"));
    CHECK_THROWS_WITH(a.get_grid("g", {}), ContainsSubstring(":step"));
    CHECK_THROWS_WITH(a.reject_unknown({"n", "s"}), ContainsSubstring("unknown key 'g'"));
}
