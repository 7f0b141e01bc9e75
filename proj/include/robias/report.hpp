#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "robias/experiment.hpp"

namespace robias {

nlohmann::json report_to_json(const ExperimentReport& rep);

std::string report_csv(const ExperimentReport& rep);
std::string runs_csv(const ExperimentReport& rep);
std::string boxplot_svg(const ExperimentReport& rep);

// Writes report.csv, runs.csv, report.json, timing.json and (optionally)
// boxplot.svg into dir, creating it if needed. Throws IoError.
void emit_report(const ExperimentReport& rep, const std::filesystem::path& dir, bool svg = true);

}  // namespace robias
