#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "annoqa/agreement.hpp"
#include "annoqa/curation.hpp"
#include "annoqa/datamodel.hpp"
#include "annoqa/detect_eval.hpp"
#include "annoqa/error.hpp"
#include "annoqa/pipeline.hpp"
#include "annoqa/quality.hpp"
#include "annoqa/reports.hpp"
#include "annoqa/rng.hpp"
#include "annoqa/synth.hpp"

namespace {

using namespace annoqa;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "annoqa 0.1.0";

struct CommonArgs {
    std::string annotations;
    uint64_t seed = 0;
    double drop_fraction = 0.2;
    std::vector<std::string> labels;
    std::vector<std::string> exclude;
    std::string out;
    std::string format = "json";
};

void emit(const std::string& out, const std::string& content) {
    if (out.empty())
        std::cout << content;
    else
        write_file(out, content);
}

AnnotationSet load_annotations(const std::string& path,
                               const std::vector<std::string>& labels) {
    PayloadFormat format = path.size() >= 4 && path.substr(path.size() - 4) == ".csv"
                               ? PayloadFormat::Csv
                               : PayloadFormat::CanonicalJson;
    ParseResult parsed = parse_annotation_set(read_file(path), format, labels);
    for (const auto& warning : parsed.clamp_warnings)
        std::cerr << "warning: clamped box #" << warning.record_index << " on image '"
                  << warning.image_id << "'\n";
    return std::move(parsed.set);
}

AgreementConfig agreement_config_from(const CommonArgs& args) {
    AgreementConfig config;
    config.seed = args.seed;
    config.drop_fraction = args.drop_fraction;
    config.excluded_annotators.insert(args.exclude.begin(), args.exclude.end());
    return config;
}

GtRecipe parse_recipe(const std::string& name) {
    if (name == "drop_annotator") return GtRecipe::DropAnnotator;
    if (name == "mixed_top" || name == "gt1") return GtRecipe::MixedTop;
    if (name == "single_top" || name == "gt2") return GtRecipe::SingleTop;
    if (name == "original" || name == "gt3") return GtRecipe::Original;
    raise(ErrorKind::Config, "unknown recipe '" + name +
                                 "' (expected drop_annotator, mixed_top/gt1, "
                                 "single_top/gt2, original/gt3)");
}

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_seed) {
    cmd->add_option("--annotations", args.annotations, "annotation set (JSON or CSV)")
        ->required();
    auto* seed = cmd->add_option("--seed", args.seed, "seed for all random draws");
    if (needs_seed) seed->required();
    cmd->add_option("--drop-fraction", args.drop_fraction,
                    "fraction of pixel observations to drop (default 0.2)")
        ->check(CLI::Range(0.0, 0.999999));
    cmd->add_option("--labels", args.labels, "declared vocabulary for CSV inputs");
    cmd->add_option("--exclude", args.exclude, "annotator ids to exclude");
    cmd->add_option("--out", args.out, "output file (default: stdout)");
    cmd->add_option("--format", args.format, "report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

int run(int argc, char** argv) {
    CLI::App app{"Annotation quality measurement: pixel-level inter-annotator "
                 "agreement, leave-one-out vitality, dataset curation, and "
                 "detector evaluation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(0, 1);

    bool dump_schema = false;
    app.add_flag("--schema", dump_schema, "print the canonical annotation JSON schema");

    // validate
    CommonArgs validate_args;
    std::string validate_label_map;
    auto* cmd_validate = app.add_subcommand("validate", "coverage, duplicates, class counts");
    add_common(cmd_validate, validate_args, false);
    cmd_validate->add_option("--label-map", validate_label_map,
                             "label map to apply before validating");

    // agreement
    CommonArgs agreement_args;
    std::string agreement_class;
    auto* cmd_agreement =
        app.add_subcommand("agreement", "per-image Krippendorff alpha and aggregate band");
    add_common(cmd_agreement, agreement_args, true);
    cmd_agreement->add_option("--class", agreement_class, "restrict to one class channel");

    // vitality
    CommonArgs vitality_args;
    auto* cmd_vitality =
        app.add_subcommand("vitality", "leave-one-out vitality per annotator");
    add_common(cmd_vitality, vitality_args, true);

    // difficulty
    CommonArgs difficulty_args;
    std::vector<std::string> difficulty_classes;
    auto* cmd_difficulty =
        app.add_subcommand("difficulty", "per-class agreement and vitality");
    add_common(cmd_difficulty, difficulty_args, true);
    cmd_difficulty->add_option("--class", difficulty_classes,
                               "classes to analyze (default: all)");

    // curate
    CommonArgs curate_args;
    std::string curate_recipe;
    std::string curate_drop;
    std::vector<std::string> curate_top;
    std::optional<size_t> curate_top_k;
    std::optional<double> curate_min_vitality;
    std::string curate_original;
    std::string curate_label_map;
    auto* cmd_curate = app.add_subcommand("curate", "build training/ground-truth sets");
    add_common(cmd_curate, curate_args, true);
    cmd_curate->add_option("--recipe", curate_recipe,
                           "drop_annotator | mixed_top/gt1 | single_top/gt2 | original/gt3")
        ->required();
    cmd_curate->add_option("--drop", curate_drop, "annotator to drop (drop_annotator)");
    cmd_curate->add_option("--top", curate_top, "explicit top annotator ids");
    cmd_curate->add_option("--top-k", curate_top_k, "take the k best-ranked annotators");
    cmd_curate->add_option("--min-vitality", curate_min_vitality,
                           "keep annotators with mean vitality >= threshold");
    cmd_curate->add_option("--original-gt", curate_original, "released labels (original)");
    cmd_curate->add_option("--label-map", curate_label_map, "label map for original labels");

    // eval
    std::string eval_preds, eval_gt, eval_out;
    std::string eval_format = "json";
    double eval_iou = 0.5;
    std::optional<size_t> eval_cap;
    std::string eval_cap_scope = "global";
    bool eval_no_per_class = false;
    auto* cmd_eval = app.add_subcommand("eval", "precision/recall/F1 against a ground truth");
    cmd_eval->add_option("--preds", eval_preds, "predictions (canonical JSON with scores)")
        ->required();
    cmd_eval->add_option("--gt", eval_gt, "ground-truth set (curate output)")->required();
    cmd_eval->add_option("--iou-threshold", eval_iou, "match threshold (default 0.5)");
    cmd_eval->add_option("--cap", eval_cap, "keep only the top-N predictions by score");
    cmd_eval->add_option("--cap-scope", eval_cap_scope, "global or per_image")
        ->check(CLI::IsMember({"global", "per_image"}));
    cmd_eval->add_flag("--no-per-class", eval_no_per_class, "skip per-class metrics");
    cmd_eval->add_option("--out", eval_out, "output file (default: stdout)");
    cmd_eval->add_option("--format", eval_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // simulate
    std::string sim_config, sim_out;
    uint64_t sim_seed = 0;
    auto* cmd_simulate =
        app.add_subcommand("simulate", "generate a synthetic annotated corpus");
    cmd_simulate->add_option("--config", sim_config, "scene/annotator/detector JSON")
        ->required();
    cmd_simulate->add_option("--seed", sim_seed, "seed")->required();
    cmd_simulate->add_option("--out", sim_out, "output directory")->required();

    // report
    RunConfig run_config;
    std::vector<std::string> report_recipes;
    std::string report_format = "json";
    std::string report_cap_scope = "global";
    std::optional<size_t> report_top_k;
    std::optional<double> report_min_vitality;
    std::string report_preds, report_original, report_label_map;
    auto* cmd_report =
        app.add_subcommand("report", "full pipeline with a human-readable summary");
    cmd_report->add_option("--annotations", run_config.annotations_path)->required();
    cmd_report->add_option("--seed", run_config.seed)->required();
    cmd_report->add_option("--drop-fraction", run_config.drop_fraction)
        ->check(CLI::Range(0.0, 0.999999));
    cmd_report->add_option("--preds", report_preds, "predictions to evaluate");
    cmd_report->add_option("--gt", report_recipes,
                           "ground-truth recipes to build (gt1/gt2/gt3 or names)");
    cmd_report->add_option("--original-gt", report_original, "released labels for gt3");
    cmd_report->add_option("--label-map", report_label_map, "label map for gt3 import");
    cmd_report->add_option("--iou-threshold", run_config.iou_threshold);
    cmd_report->add_option("--cap", run_config.cap);
    cmd_report->add_option("--cap-scope", report_cap_scope)
        ->check(CLI::IsMember({"global", "per_image"}));
    cmd_report->add_option("--top", run_config.top_policy.explicit_ids,
                           "explicit top annotators for gt1/gt2");
    cmd_report->add_option("--top-k", report_top_k);
    cmd_report->add_option("--min-vitality", report_min_vitality);
    cmd_report->add_option("--out", run_config.out_dir, "output directory")->required();
    cmd_report->add_option("--format", report_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI11_PARSE(app, argc, argv);

    if (dump_schema) {
        std::cout << schema_json();
        return 0;
    }

    if (cmd_validate->parsed()) {
        AnnotationSet set = load_annotations(validate_args.annotations, validate_args.labels);
        if (!validate_label_map.empty())
            set = apply_label_mapping(set, parse_label_map(read_file(validate_label_map)));
        ValidationReport report = validate(set);
        emit(validate_args.out, validate_args.format == "csv"
                                    ? validation_report_csv(report)
                                    : validation_report_json(report));
        return 0;
    }

    if (cmd_agreement->parsed()) {
        AnnotationSet set = load_annotations(agreement_args.annotations, agreement_args.labels);
        AgreementConfig config = agreement_config_from(agreement_args);
        if (!agreement_class.empty()) config.class_filter = agreement_class;
        PerImageAlpha results = alpha_per_image(set, config);
        AlphaAggregate agg = aggregate_alpha(results);
        emit(agreement_args.out, agreement_args.format == "csv"
                                     ? agreement_report_csv(results)
                                     : agreement_report_json(results, agg, config));
        return 0;
    }

    if (cmd_vitality->parsed()) {
        AnnotationSet set = load_annotations(vitality_args.annotations, vitality_args.labels);
        auto reports = vitality_all(set, agreement_config_from(vitality_args));
        emit(vitality_args.out, vitality_args.format == "csv"
                                    ? vitality_report_csv(reports)
                                    : vitality_report_json(reports));
        return 0;
    }

    if (cmd_difficulty->parsed()) {
        AnnotationSet set =
            load_annotations(difficulty_args.annotations, difficulty_args.labels);
        AgreementConfig config = agreement_config_from(difficulty_args);
        std::vector<std::string> classes =
            difficulty_classes.empty() ? set.labels : difficulty_classes;
        std::vector<ClassDifficultyReport> reports;
        for (const auto& label : classes)
            reports.push_back(class_difficulty(set, label, config));
        emit(difficulty_args.out, difficulty_args.format == "csv"
                                      ? difficulty_report_csv(reports)
                                      : difficulty_report_json(reports));
        return 0;
    }

    if (cmd_curate->parsed()) {
        AnnotationSet set = load_annotations(curate_args.annotations, curate_args.labels);
        GtRecipe recipe = parse_recipe(curate_recipe);

        if (recipe == GtRecipe::DropAnnotator) {
            if (curate_drop.empty())
                raise(ErrorKind::Config, "--drop is required for drop_annotator");
            emit(curate_args.out, serialize_annotation_set(drop_annotator(set, curate_drop)));
            return 0;
        }
        if (recipe == GtRecipe::Original) {
            if (curate_original.empty())
                raise(ErrorKind::Config, "--original-gt is required for the original recipe");
            LabelMap map;
            if (!curate_label_map.empty())
                map = parse_label_map(read_file(curate_label_map));
            emit(curate_args.out,
                 serialize_ground_truth(import_original_gt(read_file(curate_original), map)));
            return 0;
        }

        std::vector<std::string> top = curate_top;
        if (top.empty()) {
            auto ranking = rank_annotators(vitality_all(set, agreement_config_from(curate_args)));
            size_t keep = curate_top_k ? std::min(*curate_top_k, ranking.size())
                                       : (ranking.size() > 1 ? ranking.size() - 1
                                                             : ranking.size());
            for (size_t i = 0; i < ranking.size() && top.size() < keep; ++i) {
                if (curate_min_vitality && ranking[i].second < *curate_min_vitality) break;
                top.push_back(ranking[i].first);
            }
            if (top.empty()) raise(ErrorKind::Curation, "top-annotator policy selected nobody");
        }
        GroundTruthSet gt = recipe == GtRecipe::MixedTop
                                ? build_gt_mixed(set, top, {}, curate_args.seed)
                                : build_gt_single(set, top, {}, curate_args.seed);
        emit(curate_args.out, serialize_ground_truth(gt));
        return 0;
    }

    if (cmd_eval->parsed()) {
        GroundTruthSet gt = parse_ground_truth(read_file(eval_gt));
        ParseResult preds = parse_annotation_set(read_file(eval_preds),
                                                 PayloadFormat::CanonicalJson);
        EvalConfig config;
        config.iou_threshold = eval_iou;
        config.cap = eval_cap;
        config.cap_scope = eval_cap_scope == "per_image" ? CapScope::PerImage
                                                         : CapScope::Global;
        config.per_class = !eval_no_per_class;
        EvalReport report = evaluate(preds.set.boxes, gt, config);
        emit(eval_out,
             eval_format == "csv" ? eval_report_csv(report) : eval_report_json(report));
        return 0;
    }

    if (cmd_simulate->parsed()) {
        ordered_json doc;
        try {
            doc = ordered_json::parse(read_file(sim_config));
        } catch (const nlohmann::json::parse_error& e) {
            raise(ErrorKind::Parse, std::string("invalid simulate config: ") + e.what());
        }
        if (!doc.contains("scene"))
            raise(ErrorKind::Config, "simulate config needs a 'scene' object");
        SceneSpec spec = parse_scene_spec(doc["scene"].dump());
        spec.seed = sim_seed;
        AnnotationSet truth = generate_truth(spec);
        write_file(sim_out + "/truth.json", serialize_annotation_set(truth));

        AnnotationSet merged = truth;
        merged.annotators.clear();
        merged.boxes.clear();
        merged.empty_annotations.clear();
        if (doc.contains("annotators")) {
            size_t index = 0;
            for (const auto& entry : doc["annotators"]) {
                const std::string id = entry.value("id", "annotator_" + std::to_string(index));
                NoiseProfile profile = parse_noise_profile(entry.value("profile", ordered_json::object()).dump());
                merged = merge_annotation_sets(
                    merged, simulate_annotator(truth, profile, id,
                                               mix_seed(sim_seed, fnv1a64(id))));
                ++index;
            }
        }
        write_file(sim_out + "/annotations.json", serialize_annotation_set(merged));

        if (doc.contains("detector")) {
            NoiseProfile profile = parse_noise_profile(doc["detector"].dump());
            AnnotationSet preds =
                simulate_detector(truth, profile, mix_seed(sim_seed, fnv1a64("detector")));
            write_file(sim_out + "/predictions.json", serialize_annotation_set(preds));
        }
        return 0;
    }

    if (cmd_report->parsed()) {
        run_config.seed_set = true;
        run_config.format = report_format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
        run_config.cap_scope = report_cap_scope == "per_image" ? CapScope::PerImage
                                                               : CapScope::Global;
        run_config.top_policy.top_k = report_top_k;
        run_config.top_policy.min_vitality = report_min_vitality;
        if (!report_preds.empty()) run_config.predictions_path = report_preds;
        if (!report_original.empty()) run_config.original_gt_path = report_original;
        if (!report_label_map.empty()) run_config.label_map_path = report_label_map;
        for (const auto& name : report_recipes)
            run_config.gt_recipes.insert(parse_recipe(name));
        if (run_config.predictions_path && run_config.gt_recipes.empty())
            run_config.gt_recipes = {GtRecipe::MixedTop, GtRecipe::SingleTop};

        ReportBundle bundle = run_pipeline(run_config);
        if (bundle.failed_stage) {
            std::cerr << "error in stage '" << *bundle.failed_stage
                      << "': " << bundle.error_message.value_or("") << "\n";
            return bundle.exit_code;
        }
        std::cout << bundle.summary;
        return 0;
    }

    std::cout << app.help();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
