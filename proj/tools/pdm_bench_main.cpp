#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdm/class_pipeline.hpp"
#include "pdm/config.hpp"
#include "pdm/event_log.hpp"
#include "pdm/generator.hpp"
#include "pdm/plan_io.hpp"
#include "pdm/reg_pipeline.hpp"
#include "pdm/report.hpp"
#include "pdm/runner.hpp"
#include "pdm/selftest.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

int cmd_generate(const std::string& preset_name, std::uint64_t seed, const std::string& out_path,
                 const std::string& plan_path) {
    const auto [log, plan] = pdm::generate(pdm::preset(preset_name), seed);
    spill(out_path, pdm::write_csv(log));
    if (!plan_path.empty()) spill(plan_path, pdm::write_plan_json(plan));
    std::printf("%s seed %llu: %zu events over %d days, %zu failures -> %s\n", preset_name.c_str(),
                static_cast<unsigned long long>(seed), log.records.size(), log.horizon_days,
                pdm::split_episodes(log).size(), out_path.c_str());
    return 0;
}

std::string samples_csv(const std::vector<pdm::labeled_sample>& samples) {
    std::string out = "anchor_day,label";
    if (!samples.empty())
        for (std::size_t j = 0; j < samples[0].features.size(); ++j)
            out += ",f" + std::to_string(j);
    out += "\n";
    char buf[64];
    for (const pdm::labeled_sample& s : samples) {
        out += std::to_string(s.anchor_day);
        std::snprintf(buf, sizeof buf, ",%.17g", s.label);
        out += buf;
        for (const double v : s.features) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

int cmd_featurize(const std::string& mode, const std::string& setting, const std::string& in_path,
                  const std::string& out_path) {
    const pdm::event_log log = pdm::ingest_csv(slurp(in_path));
    const pdm::window_spec w = pdm::settings_preset(setting);
    std::vector<pdm::labeled_sample> samples;
    if (mode == "class") {
        samples = pdm::build_dataset(log, w, pdm::collect_positive_refs(log, w), true);
    } else if (mode == "reg") {
        const pdm::regression_config cfg = pdm::regression_config_for(w);
        const auto kept = pdm::intersect_kept(
            pdm::prune_rare(log, static_cast<int>(pdm::split_episodes(log).size()),
                            cfg.rare_min_ratio),
            pdm::prune_frequent(log, cfg.frequent_max_day_fraction));
        samples = pdm::build_regression_dataset(log, kept, cfg, pdm::default_risk_curve(w), false);
    } else {
        throw std::runtime_error("mode must be class or reg");
    }
    spill(out_path, samples_csv(samples));
    const std::size_t dims = samples.empty() ? 0 : samples[0].features.size();
    std::printf("%zu samples x %zu features (%s, setting %s) -> %s\n", samples.size(), dims,
                mode.c_str(), setting.c_str(), out_path.c_str());
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override, int workers) {
    if (workers > 0) setenv("PDM_BENCH_WORKERS", std::to_string(workers).c_str(), 1);
    pdm::experiment_config cfg = pdm::experiment_from_config(pdm::parse_config(slurp(config_path)));
    if (!out_override.empty()) cfg.out_dir = out_override;
    const pdm::results_table table = pdm::run_experiment(cfg);
    pdm::persist_results(table, cfg.out_dir);
    for (const pdm::cell_result& cell : table.rows) {
        if (!cell.error.empty()) {
            std::printf("%-4s %-2s %-28s FAILED: %s\n", cell.id.dataset.c_str(),
                        cell.id.setting.c_str(), pdm::detail::row_label(cell).c_str(),
                        cell.error.c_str());
            continue;
        }
        std::printf("%-4s %-2s %-28s mean %.3f  min %.3f\n", cell.id.dataset.c_str(),
                    cell.id.setting.c_str(), pdm::detail::row_label(cell).c_str(), cell.mean_f1,
                    cell.min_f1);
    }
    std::printf("results written to %s\n", cfg.out_dir.c_str());
    return pdm::any_cell_failed(table) ? 1 : 0;
}

int cmd_report(const std::string& in_path, const std::string& format,
               const std::string& out_path) {
    const pdm::results_table table = pdm::parse_results_csv(slurp(in_path));
    const std::string rendered =
        format == "csv" ? pdm::render_csv(table) : pdm::render_markdown(table);
    if (out_path.empty())
        std::fputs(rendered.c_str(), stdout);
    else
        spill(out_path, rendered);
    return 0;
}

int cmd_selftest() {
    bool all = true;
    for (const pdm::selftest::check_result& c : pdm::selftest::run_all()) {
        std::printf("%s  %s (%s)\n", c.pass ? "ok  " : "FAIL", c.name.c_str(), c.detail.c_str());
        all = all && c.pass;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"event-log benchmark for failure prediction pipelines"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "synthesize an event log from a dataset preset");
    std::string preset_name = "DS1", gen_out, plan_path;
    std::uint64_t seed = 1;
    gen->add_option("--preset", preset_name, "dataset preset, DS1..DS6")->capture_default_str();
    gen->add_option("--seed", seed, "generator seed")->capture_default_str();
    gen->add_option("--out", gen_out, "event log CSV path")->required();
    gen->add_option("--plan", plan_path, "also write the injected pattern plan as JSON");

    auto* feat = app.add_subcommand("featurize", "turn an event log into a labeled sample CSV");
    std::string mode = "class", setting = "A", feat_in, feat_out;
    feat->add_option("--mode", mode, "class or reg")->capture_default_str();
    feat->add_option("--setting", setting, "window setting, A..D")->capture_default_str();
    feat->add_option("--in", feat_in, "event log CSV path")->required();
    feat->add_option("--out", feat_out, "sample CSV path")->required();

    auto* run = app.add_subcommand("run", "run a benchmark described by a config file");
    std::string config_path, out_override;
    int workers = 0;
    run->add_option("--config", config_path, "benchmark config file")->required();
    run->add_option("--out", out_override, "override the configured output directory");
    run->add_option("--workers", workers, "worker threads, default all cores");

    auto* rep = app.add_subcommand("report", "render persisted results");
    std::string rep_in, rep_format = "markdown", rep_out;
    rep->add_option("--in", rep_in, "results.csv produced by run")->required();
    rep->add_option("--format", rep_format, "markdown or csv")->capture_default_str();
    rep->add_option("--out", rep_out, "output path, stdout when omitted");

    app.add_subcommand("selftest", "cross-check the numeric core against references");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(preset_name, seed, gen_out, plan_path);
        if (feat->parsed()) return cmd_featurize(mode, setting, feat_in, feat_out);
        if (run->parsed()) return cmd_run(config_path, out_override, workers);
        if (rep->parsed()) return cmd_report(rep_in, rep_format, rep_out);
        return cmd_selftest();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
