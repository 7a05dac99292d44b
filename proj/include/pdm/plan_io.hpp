#pragma once

#include <string>

#include <json.hpp>

#include "pdm/generator.hpp"

namespace pdm {

// Injection bookkeeping sidecar. Consumed by tests and inspection tooling;
// the prediction pipelines never read it.
inline std::string write_plan_json(const pattern_plan& plan) {
    nlohmann::json j;
    j["format"] = "pdm-plan";
    j["version"] = 1;
    j["families"] = plan.families;
    j["instances"] = nlohmann::json::array();
    for (const pattern_instance& inst : plan.instances) {
        nlohmann::json e;
        e["element_days"] = inst.element_days;
        e["element_types"] = inst.element_types;
        e["target_day"] = inst.target_day;
        e["partial"] = inst.partial;
        e["decoy"] = inst.decoy;
        j["instances"].push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

inline pattern_plan read_plan_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_object() || j.value("format", "") != "pdm-plan" || j.value("version", 0) != 1)
        throw std::runtime_error("plan json: unrecognized format");
    pattern_plan plan;
    plan.families = j.at("families").get<std::vector<std::vector<int>>>();
    for (const auto& e : j.at("instances")) {
        pattern_instance inst;
        inst.element_days = e.at("element_days").get<std::vector<int>>();
        inst.element_types = e.at("element_types").get<std::vector<int>>();
        inst.target_day = e.at("target_day").get<int>();
        inst.partial = e.at("partial").get<bool>();
        inst.decoy = e.at("decoy").get<bool>();
        plan.instances.push_back(std::move(inst));
    }
    return plan;
}

}  // namespace pdm
