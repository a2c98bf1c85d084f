#include "annoqa/quality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "annoqa/error.hpp"
#include "image_work.hpp"

namespace annoqa {

namespace {

// Per-image full alpha plus one leave-one-out alpha per participating
// annotator, all on the matrix (and retained-unit subset) built once.
struct LooImage {
    std::string image_id;
    bool computed = false;
    AlphaResult full;
    std::vector<std::pair<std::string, AlphaResult>> loo;  // annotator -> K without it
};

std::vector<LooImage> leave_one_out_alphas(const AnnotationSet& set,
                                           const AgreementConfig& config) {
    if (set.images.empty())
        raise(ErrorKind::Config, "annotation set contains no images");
    if (config.class_filter && !set.has_label(*config.class_filter))
        raise(ErrorKind::Vocabulary,
              "class '" + *config.class_filter + "' is not in the vocabulary");

    const auto index = detail::build_work_index(set, config.excluded_annotators);
    std::vector<LooImage> slots(index.size());
    std::optional<Error> failure;

#pragma omp parallel for schedule(dynamic)
    for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(index.size()); ++i) {
        slots[i].image_id = index[i].image->id;
        try {
            std::string skip_reason;
            auto matrix = detail::matrix_for_image(index[i], set, config, &skip_reason);
            if (!matrix) continue;
            slots[i].full = alpha(*matrix);
            slots[i].computed = true;
            if (index[i].participants.size() < 3) continue;  // no rater left to drop
            for (size_t r = 0; r < index[i].participants.size(); ++r)
                slots[i].loo.emplace_back(index[i].participants[r], alpha(*matrix, {r}));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientData) {
#pragma omp critical
                if (!failure) failure = e;
            }
        }
    }
    if (failure) throw *failure;
    return slots;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<VitalityReport> reports_from(const std::vector<LooImage>& images,
                                         const AnnotationSet& set,
                                         const std::set<std::string>& excluded) {
    std::vector<VitalityReport> reports;
    for (const auto& annotator : set.annotators) {
        if (excluded.count(annotator.id)) continue;
        VitalityReport report;
        report.annotator_id = annotator.id;
        for (const auto& image : images) {
            if (!image.computed) continue;
            for (const auto& [id, loo] : image.loo) {
                if (id != annotator.id) continue;
                report.per_image.push_back({image.image_id,
                                            image.full.alpha - loo.alpha,
                                            image.full.alpha, loo.alpha});
            }
        }
        if (report.per_image.empty()) continue;  // no image defines V_i

        std::vector<double> vs;
        double v_sum = 0.0, full_sum = 0.0, loo_sum = 0.0;
        for (const auto& entry : report.per_image) {
            vs.push_back(entry.v);
            v_sum += entry.v;
            full_sum += entry.k_full;
            loo_sum += entry.k_loo;
        }
        const double count = static_cast<double>(vs.size());
        report.mean_v = v_sum / count;
        report.median_v = median_of(vs);
        report.k_full_mean = full_sum / count;
        report.k_loo_mean = loo_sum / count;
        reports.push_back(std::move(report));
    }
    return reports;
}

}  // namespace

std::vector<VitalityReport> vitality_all(const AnnotationSet& set,
                                         const AgreementConfig& config) {
    size_t pool = 0;
    for (const auto& annotator : set.annotators)
        if (!config.excluded_annotators.count(annotator.id)) ++pool;
    if (pool < 3)
        raise(ErrorKind::InsufficientData,
              "vitality needs at least 3 annotators so the leave-one-out alpha keeps 2");
    return reports_from(leave_one_out_alphas(set, config), set,
                        config.excluded_annotators);
}

VitalityReport vitality(const AnnotationSet& set, const std::string& annotator_id,
                        const AgreementConfig& config) {
    if (!set.find_annotator(annotator_id))
        raise(ErrorKind::Config, "annotator '" + annotator_id + "' is not in the set");
    auto reports = vitality_all(set, config);
    for (auto& report : reports)
        if (report.annotator_id == annotator_id) return std::move(report);
    raise(ErrorKind::InsufficientData,
          "annotator '" + annotator_id + "' participates in no computable image");
}

ClassDifficultyReport class_difficulty(const AnnotationSet& set, const std::string& label,
                                       const AgreementConfig& config) {
    if (!set.has_label(label))
        raise(ErrorKind::Vocabulary, "class '" + label + "' is not in the vocabulary");

    AgreementConfig restricted = config;
    restricted.class_filter = label;
    const auto images = leave_one_out_alphas(set, restricted);

    ClassDifficultyReport report;
    report.label = label;
    std::vector<double> alphas;
    std::map<std::string, std::pair<double, size_t>> vitality_sums;
    for (const auto& image : images) {
        if (!image.computed) continue;
        report.per_image.push_back({image.image_id, image.full.alpha, image.full.degenerate});
        alphas.push_back(image.full.alpha);
        if (image.full.degenerate) ++report.degenerate_images;
        for (const auto& [id, loo] : image.loo) {
            auto& [sum, count] = vitality_sums[id];
            sum += image.full.alpha - loo.alpha;
            ++count;
        }
    }
    if (!alphas.empty()) {
        double sum = 0.0;
        for (double a : alphas) sum += a;
        report.mean_class_alpha = sum / static_cast<double>(alphas.size());
        report.median_class_alpha = median_of(alphas);
    }
    for (const auto& [id, acc] : vitality_sums)
        report.per_annotator_vitality[id] = acc.first / static_cast<double>(acc.second);
    report.fully_degenerate =
        !alphas.empty() && report.degenerate_images == alphas.size();
    return report;
}

std::vector<std::pair<std::string, double>> rank_annotators(
    const std::vector<VitalityReport>& reports) {
    if (reports.empty())
        raise(ErrorKind::Config, "no vitality reports to rank");
    std::vector<std::pair<std::string, double>> ranking;
    ranking.reserve(reports.size());
    for (const auto& report : reports) ranking.emplace_back(report.annotator_id, report.mean_v);
    std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranking;
}

}  // namespace annoqa
