#ifndef STREAMLABEL_REPORTING_HPP
#define STREAMLABEL_REPORTING_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "streamlabel/io.hpp"
#include "streamlabel/pipeline.hpp"
#include "streamlabel/runtime_sim.hpp"

namespace streamlabel {

inline constexpr const char* kVersion = "0.1.0";

nlohmann::json config_json(const RunConfig& cfg);
nlohmann::json evaluation_json(const Evaluation& ev);

// Deterministic run summary (no wall-clock fields).
nlohmann::json run_summary_json(const RunResult& run, const RunConfig& cfg,
                                const Evaluation* evaluation = nullptr);

nlohmann::json sim_report_json(const sim::SimReport& report, bool include_schedule = false);

nlohmann::json manifest_json(const std::string& command, const std::vector<std::string>& argv,
                             const nlohmann::json& config, const nlohmann::json& inputs);

void write_json(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

}  // namespace streamlabel

#endif  // STREAMLABEL_REPORTING_HPP
