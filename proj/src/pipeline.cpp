#include "annoqa/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "annoqa/agreement.hpp"
#include "annoqa/error.hpp"
#include "annoqa/quality.hpp"
#include "annoqa/reports.hpp"
#include "annoqa/rng.hpp"
#include "annoqa/synth.hpp"

namespace annoqa {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    fs::path parent = fs::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) fs::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot open '" + path + "' for writing");
    out << content;
    if (!out) raise(ErrorKind::Io, "write to '" + path + "' failed");
}

namespace {

PayloadFormat format_from_path(const std::string& path) {
    return path.size() >= 4 && path.substr(path.size() - 4) == ".csv"
               ? PayloadFormat::Csv
               : PayloadFormat::CanonicalJson;
}

// Top annotators from policy: explicit list, else ranked vitality filtered
// by top_k / min_vitality; default keeps everyone but the lowest-ranked.
std::vector<std::string> resolve_top(const TopPolicy& policy,
                                     const std::vector<VitalityReport>& reports) {
    if (!policy.explicit_ids.empty()) return policy.explicit_ids;
    auto ranking = rank_annotators(reports);
    size_t keep = ranking.size();
    if (policy.top_k) {
        keep = std::min(keep, *policy.top_k);
    } else if (!policy.min_vitality) {
        keep = ranking.size() > 1 ? ranking.size() - 1 : ranking.size();
    }
    std::vector<std::string> top;
    for (size_t i = 0; i < ranking.size() && top.size() < keep; ++i) {
        if (policy.min_vitality && ranking[i].second < *policy.min_vitality) break;
        top.push_back(ranking[i].first);
    }
    if (top.empty())
        raise(ErrorKind::Curation, "top-annotator policy selected nobody");
    return top;
}

}  // namespace

ReportBundle run_pipeline(const RunConfig& config) {
    ReportBundle bundle;
    std::string stage = "config";
    const fs::path out_dir(config.out_dir);
    const bool csv = config.format == ReportFormat::Csv;

    auto emit = [&](const std::string& name, const std::string& content) {
        const std::string path = (out_dir / name).string();
        write_file(path, content);
        bundle.files_written.push_back(path);
    };

    auto write_manifest = [&]() {
        ordered_json manifest;
        manifest["stages_completed"] = bundle.stages_completed;
        manifest["files"] = ordered_json::array();
        for (const auto& file : bundle.files_written)
            manifest["files"].push_back(fs::path(file).filename().string());
        if (bundle.failed_stage) {
            manifest["failed_stage"] = *bundle.failed_stage;
            manifest["error"] = bundle.error_message.value_or("");
        }
        write_file((out_dir / "run_manifest.json").string(), manifest.dump(2) + "\n");
    };

    try {
        if (config.out_dir.empty())
            raise(ErrorKind::Config, "output directory is required");
        if (config.annotations_path.empty())
            raise(ErrorKind::Config, "annotations input is required");
        if (!config.seed_set)
            raise(ErrorKind::Config, "a seed is required; there is no wall-clock default");

        stage = "parse";
        ParseResult parsed = parse_annotation_set(read_file(config.annotations_path),
                                                  format_from_path(config.annotations_path));
        const AnnotationSet& set = parsed.set;

        stage = "validate";
        ValidationReport validation = validate(set);
        emit(csv ? "validation.csv" : "validation.json",
             csv ? validation_report_csv(validation) : validation_report_json(validation));
        bundle.stages_completed.push_back("validate");

        stage = "agreement";
        AgreementConfig agreement_config;
        agreement_config.seed = config.seed;
        agreement_config.drop_fraction = config.drop_fraction;
        PerImageAlpha agreement = alpha_per_image(set, agreement_config);
        AlphaAggregate agg = aggregate_alpha(agreement);
        emit(csv ? "agreement.csv" : "agreement.json",
             csv ? agreement_report_csv(agreement)
                 : agreement_report_json(agreement, agg, agreement_config));
        bundle.stages_completed.push_back("agreement");

        stage = "vitality";
        std::vector<VitalityReport> vitality_reports = vitality_all(set, agreement_config);
        emit(csv ? "vitality.csv" : "vitality.json",
             csv ? vitality_report_csv(vitality_reports)
                 : vitality_report_json(vitality_reports));
        bundle.stages_completed.push_back("vitality");

        stage = "difficulty";
        std::vector<ClassDifficultyReport> difficulty_reports;
        for (const auto& label : set.labels)
            difficulty_reports.push_back(class_difficulty(set, label, agreement_config));
        emit(csv ? "difficulty.csv" : "difficulty.json",
             csv ? difficulty_report_csv(difficulty_reports)
                 : difficulty_report_json(difficulty_reports));
        bundle.stages_completed.push_back("difficulty");

        stage = "curate";
        std::vector<std::pair<std::string, GroundTruthSet>> ground_truths;
        if (!config.gt_recipes.empty()) {
            std::vector<std::string> top;
            if (config.gt_recipes.count(GtRecipe::MixedTop) ||
                config.gt_recipes.count(GtRecipe::SingleTop))
                top = resolve_top(config.top_policy, vitality_reports);
            for (GtRecipe recipe : config.gt_recipes) {
                GroundTruthSet gt;
                switch (recipe) {
                    case GtRecipe::MixedTop:
                        gt = build_gt_mixed(set, top, {},
                                            mix_seed(config.seed, fnv1a64("gt_mixed")));
                        break;
                    case GtRecipe::SingleTop:
                        gt = build_gt_single(set, top, {},
                                             mix_seed(config.seed, fnv1a64("gt_single")));
                        break;
                    case GtRecipe::Original: {
                        if (!config.original_gt_path)
                            raise(ErrorKind::Config,
                                  "the 'original' recipe needs --original-gt");
                        LabelMap map;
                        if (config.label_map_path)
                            map = parse_label_map(read_file(*config.label_map_path));
                        gt = import_original_gt(read_file(*config.original_gt_path), map);
                        break;
                    }
                    case GtRecipe::DropAnnotator:
                        raise(ErrorKind::Config,
                              "drop_annotator is a training-set recipe; use the curate "
                              "subcommand");
                }
                const std::string name = recipe_name(recipe);
                emit("gt_" + name + ".json", serialize_ground_truth(gt));
                ground_truths.emplace_back(name, std::move(gt));
            }
            bundle.stages_completed.push_back("curate");
        }

        stage = "eval";
        std::vector<std::pair<std::string, EvalReport>> evals;
        if (config.predictions_path) {
            if (ground_truths.empty())
                raise(ErrorKind::Config,
                      "predictions were given but no ground-truth recipe was requested");
            ParseResult preds =
                parse_annotation_set(read_file(*config.predictions_path),
                                     format_from_path(*config.predictions_path));
            EvalConfig eval_config;
            eval_config.iou_threshold = config.iou_threshold;
            eval_config.cap = config.cap;
            eval_config.cap_scope = config.cap_scope;
            for (const auto& [name, gt] : ground_truths) {
                EvalReport report = evaluate(preds.set.boxes, gt, eval_config);
                emit(csv ? "eval_" + name + ".csv" : "eval_" + name + ".json",
                     csv ? eval_report_csv(report) : eval_report_json(report));
                evals.emplace_back(name, report);
            }
            bundle.stages_completed.push_back("eval");
        }

        stage = "summary";
        bundle.summary = summary_text(agreement, agg, vitality_reports,
                                      difficulty_reports, evals);
        emit("summary.txt", bundle.summary);
        bundle.stages_completed.push_back("summary");
        write_manifest();
    } catch (const Error& e) {
        bundle.failed_stage = stage;
        bundle.error_message = e.what();
        bundle.exit_code = e.exit_code();
        try {
            write_manifest();
        } catch (const Error&) {
            // The manifest is best-effort once a stage has failed.
        }
    }
    return bundle;
}

}  // namespace annoqa
