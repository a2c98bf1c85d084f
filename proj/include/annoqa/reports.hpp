#pragma once

#include <string>
#include <vector>

#include "annoqa/agreement.hpp"
#include "annoqa/datamodel.hpp"
#include "annoqa/detect_eval.hpp"
#include "annoqa/quality.hpp"

namespace annoqa {

// Deterministic report emission. All doubles are rendered through the same
// shortest-round-trip formatter so repeated runs are byte-identical.

std::string format_double(double value);

std::string validation_report_json(const ValidationReport& report);
std::string validation_report_csv(const ValidationReport& report);

std::string agreement_report_json(const PerImageAlpha& results, const AlphaAggregate& agg,
                                  const AgreementConfig& config);
std::string agreement_report_csv(const PerImageAlpha& results);

std::string vitality_report_json(const std::vector<VitalityReport>& reports);
std::string vitality_report_csv(const std::vector<VitalityReport>& reports);

std::string difficulty_report_json(const std::vector<ClassDifficultyReport>& reports);
std::string difficulty_report_csv(const std::vector<ClassDifficultyReport>& reports);

std::string eval_report_json(const EvalReport& report);
std::string eval_report_csv(const EvalReport& report);

// Human-readable roll-up with agreement bands.
std::string summary_text(const PerImageAlpha& agreement, const AlphaAggregate& agg,
                         const std::vector<VitalityReport>& vitality,
                         const std::vector<ClassDifficultyReport>& difficulty,
                         const std::vector<std::pair<std::string, EvalReport>>& evals);

// The canonical annotation JSON schema, machine readable.
std::string schema_json();

}  // namespace annoqa
