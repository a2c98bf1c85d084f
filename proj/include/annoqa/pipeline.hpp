#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "annoqa/curation.hpp"
#include "annoqa/detect_eval.hpp"

namespace annoqa {

enum class ReportFormat { Json, Csv };

struct TopPolicy {
    std::vector<std::string> explicit_ids;  // wins when non-empty
    std::optional<size_t> top_k;
    std::optional<double> min_vitality;
};

struct RunConfig {
    std::string annotations_path;
    std::optional<std::string> predictions_path;
    std::optional<std::string> original_gt_path;  // enables the gt3 recipe
    std::optional<std::string> label_map_path;
    uint64_t seed = 0;
    bool seed_set = false;  // stochastic stages require an explicit seed
    double drop_fraction = 0.2;
    double iou_threshold = 0.5;
    std::optional<size_t> cap;
    CapScope cap_scope = CapScope::Global;
    TopPolicy top_policy;
    std::set<GtRecipe> gt_recipes;  // which ground truths to build for eval
    std::string out_dir;
    ReportFormat format = ReportFormat::Json;
};

struct ReportBundle {
    std::vector<std::string> files_written;
    std::vector<std::string> stages_completed;
    std::optional<std::string> failed_stage;
    std::optional<std::string> error_message;
    int exit_code = 0;
    std::string summary;
};

// validate -> agreement -> vitality -> difficulty -> curate -> eval, writing
// one report file per stage into config.out_dir. A stage failure stops the
// run, keeps earlier reports on disk, and marks the manifest with the
// failed stage.
ReportBundle run_pipeline(const RunConfig& config);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace annoqa
