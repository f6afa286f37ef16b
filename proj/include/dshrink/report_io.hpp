#pragma once

#include "dshrink/evaluation.hpp"
#include "dshrink/simulation.hpp"
#include "dshrink/theory.hpp"

#include "json.hpp"

#include <string>

namespace dshrink {

using ordered_json = nlohmann::ordered_json;

// CSV renderers. Cells carry full double precision; layouts are long-format
// with one header row.
std::string simulation_rmse_csv(const SimulationReport& report);
std::string simulation_tpfp_csv(const SimulationReport& report);
std::string simulation_selection_csv(const SimulationReport& report);
std::string bootstrap_draws_csv(const BootstrapReport& report);

// JSON report builders with stable key order.
ordered_json simulation_report_json(const SimulationReport& report);
ordered_json bootstrap_report_json(const BootstrapReport& report,
                                   const BootstrapConfig& config);
ordered_json theory_report_json(const TheoryReport& report,
                                const TheoryConfig& config);
ordered_json fit_report_json(const PipelineResult& result,
                             const std::string& method, const Dataset& data);
ordered_json ridge_report_json(const FitResult& fit, const Dataset& data,
                               double lambda);

// Human-oriented summaries, values rounded to 3 decimals.
std::string simulation_summary(const SimulationReport& report);
std::string bootstrap_summary(const BootstrapReport& report);
std::string theory_summary(const TheoryReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace dshrink
