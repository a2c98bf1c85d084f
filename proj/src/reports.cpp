#include "annoqa/reports.hpp"

#include <sstream>

#include "json.hpp"

namespace annoqa {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double value) { return ordered_json(value).dump(); }

namespace {

std::string csv_join(const std::vector<std::string>& fields) {
    std::string line;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += fields[i];
    }
    return line + "\n";
}

}  // namespace

std::string validation_report_json(const ValidationReport& report) {
    ordered_json doc;
    doc["box_count"] = report.box_count;
    doc["coverage"] = ordered_json::object();
    for (const auto& [id, fraction] : report.coverage) doc["coverage"][id] = fraction;
    doc["per_image_annotators"] = ordered_json::object();
    for (const auto& [image_id, annotators] : report.per_image_annotators)
        doc["per_image_annotators"][image_id] = annotators;
    doc["class_counts"] = ordered_json::object();
    for (const auto& [label, count] : report.class_counts) doc["class_counts"][label] = count;
    doc["duplicates"] = ordered_json::array();
    for (const auto& dup : report.duplicates)
        doc["duplicates"].push_back({{"image_id", dup.image_id},
                                     {"annotator_id", dup.annotator_id},
                                     {"label", dup.label},
                                     {"bbox", {dup.box.x, dup.box.y, dup.box.w, dup.box.h}},
                                     {"copies", dup.copies}});
    return doc.dump(2) + "\n";
}

std::string validation_report_csv(const ValidationReport& report) {
    std::string out = csv_join({"annotator_id", "coverage"});
    for (const auto& [id, fraction] : report.coverage)
        out += csv_join({id, format_double(fraction)});
    return out;
}

std::string agreement_report_json(const PerImageAlpha& results, const AlphaAggregate& agg,
                                  const AgreementConfig& config) {
    ordered_json doc;
    doc["per_image"] = ordered_json::array();
    ordered_json skipped = ordered_json::array();
    for (const auto& [image_id, entry] : results.per_image) {
        if (entry.skipped) {
            skipped.push_back({{"image_id", image_id}, {"reason", entry.skip_reason}});
            continue;
        }
        doc["per_image"].push_back({{"image_id", image_id},
                                    {"alpha", entry.result.alpha},
                                    {"units", entry.result.unit_count},
                                    {"raters", entry.result.rater_count},
                                    {"degenerate", entry.result.degenerate}});
    }
    doc["mean"] = agg.mean;
    doc["median"] = agg.median;
    doc["band"] = band_name(classify_alpha(agg.mean));
    doc["config"] = {{"seed", config.seed}, {"drop_fraction", config.drop_fraction}};
    if (config.class_filter) doc["config"]["class"] = *config.class_filter;
    if (!config.excluded_annotators.empty()) {
        doc["config"]["excluded"] = ordered_json::array();
        for (const auto& id : config.excluded_annotators) doc["config"]["excluded"].push_back(id);
    }
    if (!skipped.empty()) doc["skipped"] = std::move(skipped);
    return doc.dump(2) + "\n";
}

std::string agreement_report_csv(const PerImageAlpha& results) {
    std::string out = csv_join({"image_id", "alpha", "units", "raters", "degenerate"});
    for (const auto& [image_id, entry] : results.per_image) {
        if (entry.skipped) continue;
        out += csv_join({image_id, format_double(entry.result.alpha),
                         std::to_string(entry.result.unit_count),
                         std::to_string(entry.result.rater_count),
                         entry.result.degenerate ? "true" : "false"});
    }
    return out;
}

namespace {

ordered_json vitality_entry(const VitalityReport& report) {
    ordered_json entry;
    entry["annotator_id"] = report.annotator_id;
    entry["mean_V"] = report.mean_v;
    entry["median_V"] = report.median_v;
    entry["k_full_mean"] = report.k_full_mean;
    entry["k_loo_mean"] = report.k_loo_mean;
    entry["per_image"] = ordered_json::array();
    for (const auto& image : report.per_image)
        entry["per_image"].push_back({{"image_id", image.image_id},
                                      {"v", image.v},
                                      {"k_full", image.k_full},
                                      {"k_loo", image.k_loo}});
    return entry;
}

}  // namespace

std::string vitality_report_json(const std::vector<VitalityReport>& reports) {
    ordered_json doc = ordered_json::array();
    for (const auto& report : reports) doc.push_back(vitality_entry(report));
    return doc.dump(2) + "\n";
}

std::string vitality_report_csv(const std::vector<VitalityReport>& reports) {
    std::string out =
        csv_join({"annotator_id", "mean_V", "median_V", "k_full_mean", "k_loo_mean", "images"});
    for (const auto& report : reports)
        out += csv_join({report.annotator_id, format_double(report.mean_v),
                         format_double(report.median_v), format_double(report.k_full_mean),
                         format_double(report.k_loo_mean),
                         std::to_string(report.per_image.size())});
    return out;
}

std::string difficulty_report_json(const std::vector<ClassDifficultyReport>& reports) {
    ordered_json doc = ordered_json::array();
    for (const auto& report : reports) {
        ordered_json entry;
        entry["class"] = report.label;
        entry["mean_class_alpha"] = report.mean_class_alpha;
        entry["median_class_alpha"] = report.median_class_alpha;
        entry["degenerate_images"] = report.degenerate_images;
        entry["fully_degenerate"] = report.fully_degenerate;
        entry["per_annotator_vitality"] = ordered_json::object();
        for (const auto& [id, v] : report.per_annotator_vitality)
            entry["per_annotator_vitality"][id] = v;
        entry["per_image"] = ordered_json::array();
        for (const auto& image : report.per_image)
            entry["per_image"].push_back({{"image_id", image.image_id},
                                          {"alpha", image.alpha},
                                          {"degenerate", image.degenerate}});
        doc.push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

std::string difficulty_report_csv(const std::vector<ClassDifficultyReport>& reports) {
    std::string out = csv_join({"class", "mean_class_alpha", "annotator_id", "vitality"});
    for (const auto& report : reports)
        for (const auto& [id, v] : report.per_annotator_vitality)
            out += csv_join({report.label, format_double(report.mean_class_alpha), id,
                             format_double(v)});
    return out;
}

namespace {

ordered_json counts_entry(const ClassCounts& counts) {
    return {{"tp", counts.tp},
            {"fp", counts.fp},
            {"fn", counts.fn},
            {"precision", counts.precision},
            {"recall", counts.recall},
            {"f1", counts.f1},
            {"misclassified", counts.misclassified},
            {"precision_defined", counts.precision_defined},
            {"recall_defined", counts.recall_defined}};
}

}  // namespace

std::string eval_report_json(const EvalReport& report) {
    ordered_json doc;
    doc["overall"] = counts_entry(report.overall);
    doc["per_class"] = ordered_json::object();
    for (const auto& [label, counts] : report.per_class)
        doc["per_class"][label] = counts_entry(counts);
    if (!report.per_class.empty())
        doc["macro"] = {{"precision", report.macro_precision},
                        {"recall", report.macro_recall},
                        {"f1", report.macro_f1}};
    doc["config"] = {{"iou_threshold", report.config.iou_threshold}};
    if (report.config.cap) {
        doc["config"]["cap"] = *report.config.cap;
        doc["config"]["cap_scope"] =
            report.config.cap_scope == CapScope::Global ? "global" : "per_image";
    }
    return doc.dump(2) + "\n";
}

std::string eval_report_csv(const EvalReport& report) {
    std::string out =
        csv_join({"class", "tp", "fp", "fn", "precision", "recall", "f1", "misclassified"});
    auto row = [&](const std::string& label, const ClassCounts& counts) {
        return csv_join({label, std::to_string(counts.tp), std::to_string(counts.fp),
                         std::to_string(counts.fn), format_double(counts.precision),
                         format_double(counts.recall), format_double(counts.f1),
                         std::to_string(counts.misclassified)});
    };
    out += row("overall", report.overall);
    for (const auto& [label, counts] : report.per_class) out += row(label, counts);
    return out;
}

std::string summary_text(const PerImageAlpha& agreement, const AlphaAggregate& agg,
                         const std::vector<VitalityReport>& vitality,
                         const std::vector<ClassDifficultyReport>& difficulty,
                         const std::vector<std::pair<std::string, EvalReport>>& evals) {
    std::ostringstream out;
    size_t computed = 0, skipped = 0;
    for (const auto& [id, entry] : agreement.per_image)
        (entry.skipped ? skipped : computed)++;

    out << "Inter-annotator agreement\n";
    out << "  images: " << computed << " computed, " << skipped << " skipped\n";
    out << "  mean alpha:   " << format_double(agg.mean) << "  ["
        << band_name(classify_alpha(agg.mean)) << "]\n";
    out << "  median alpha: " << format_double(agg.median) << "  ["
        << band_name(classify_alpha(agg.median)) << "]\n";

    if (!vitality.empty()) {
        out << "\nAnnotator vitality (mean V, negative harms consensus)\n";
        for (const auto& report : vitality)
            out << "  " << report.annotator_id << ": " << format_double(report.mean_v)
                << " over " << report.per_image.size() << " images\n";
    }

    if (!difficulty.empty()) {
        out << "\nClass recognition difficulty (mean class alpha, low = hard)\n";
        const ClassDifficultyReport* hardest = nullptr;
        for (const auto& report : difficulty) {
            out << "  " << report.label << ": " << format_double(report.mean_class_alpha);
            if (report.fully_degenerate) out << " (degenerate)";
            out << "\n";
            if (!report.fully_degenerate &&
                (!hardest || report.mean_class_alpha < hardest->mean_class_alpha))
                hardest = &report;
        }
        if (hardest) out << "  hardest class: " << hardest->label << "\n";
    }

    for (const auto& [name, report] : evals) {
        out << "\nDetector predictions vs " << name << "\n";
        out << "  precision " << format_double(report.overall.precision) << ", recall "
            << format_double(report.overall.recall) << ", F1 "
            << format_double(report.overall.f1) << ", misclassified "
            << report.overall.misclassified << "\n";
    }
    return out.str();
}

std::string schema_json() {
    ordered_json doc;
    doc["format"] = "annoqa-canonical-annotations";
    doc["top_level"] = {
        {"images", "array of {id, width, height, source?}"},
        {"annotators", "array of {id, tier}; tiers: professional, expert, experienced, novice, model"},
        {"labels", "array of strings, the ordered vocabulary"},
        {"boxes", "array of {image_id, annotator_id, label, bbox:[x,y,w,h], score?}"},
        {"empty_annotations",
         "optional array of {image_id, annotator_id}: processed, found nothing"}};
    doc["box_semantics"] =
        "integer pixels, half-open: bbox [x,y,w,h] covers [x,x+w) x [y,y+h)";
    doc["ground_truth_extras"] = {
        {"provenance", "object image_id -> annotator_id"},
        {"recipe", "drop_annotator | mixed_top | single_top | original"},
        {"seed", "integer used for the seeded selection"}};
    doc["csv_columns"] = "image_id,annotator_id,label,x,y,w,h,score";
    return doc.dump(2) + "\n";
}

}  // namespace annoqa
