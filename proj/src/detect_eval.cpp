#include "annoqa/detect_eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "annoqa/error.hpp"

namespace annoqa {

double iou(const Box& a, const Box& b) {
    const int64_t ix = std::max<int64_t>(
        0, std::min<int64_t>(a.x + a.w, b.x + b.w) - std::max<int64_t>(a.x, b.x));
    const int64_t iy = std::max<int64_t>(
        0, std::min<int64_t>(a.y + a.h, b.y + b.h) - std::max<int64_t>(a.y, b.y));
    const int64_t inter = ix * iy;
    const int64_t uni = a.area() + b.area() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

double labeled_iou(const LabeledBox& a, const LabeledBox& b) {
    if (a.label != b.label) return 0.0;
    return iou(a.box, b.box);
}

std::vector<LabeledBox> cap_predictions(const std::vector<LabeledBox>& preds,
                                        const EvalConfig& config) {
    if (!config.cap) return preds;
    for (size_t i = 0; i < preds.size(); ++i)
        if (!preds[i].score)
            raise(ErrorKind::Evaluation,
                  "prediction #" + std::to_string(i) + " has no score; capping needs one");

    auto order = [&](size_t a, size_t b) {
        if (*preds[a].score != *preds[b].score) return *preds[a].score > *preds[b].score;
        if (preds[a].box.area() != preds[b].box.area())
            return preds[a].box.area() > preds[b].box.area();
        return a < b;
    };

    std::vector<size_t> keep;
    if (config.cap_scope == CapScope::Global) {
        std::vector<size_t> indices(preds.size());
        std::iota(indices.begin(), indices.end(), 0);
        std::sort(indices.begin(), indices.end(), order);
        indices.resize(std::min(*config.cap, indices.size()));
        keep = std::move(indices);
    } else {
        std::map<std::string, std::vector<size_t>> by_image;
        for (size_t i = 0; i < preds.size(); ++i) by_image[preds[i].image_id].push_back(i);
        for (auto& [image_id, indices] : by_image) {
            std::sort(indices.begin(), indices.end(), order);
            indices.resize(std::min(*config.cap, indices.size()));
            keep.insert(keep.end(), indices.begin(), indices.end());
        }
    }
    // Preserve input order among the survivors.
    std::sort(keep.begin(), keep.end());
    std::vector<LabeledBox> out;
    out.reserve(keep.size());
    for (size_t i : keep) out.push_back(preds[i]);
    return out;
}

MatchResult match_detections(const std::vector<LabeledBox>& preds,
                             const GroundTruthSet& gt, const EvalConfig& config) {
    if (config.iou_threshold <= 0.0 || config.iou_threshold > 1.0)
        raise(ErrorKind::Config, "iou_threshold must be in (0, 1]");

    std::set<std::string> gt_labels(gt.base.labels.begin(), gt.base.labels.end());
    std::unordered_map<std::string, size_t> image_slot;
    for (size_t i = 0; i < gt.base.images.size(); ++i)
        image_slot[gt.base.images[i].id] = i;

    MatchResult result;
    result.preds = preds;
    result.per_image.resize(gt.base.images.size());
    for (size_t i = 0; i < gt.base.images.size(); ++i)
        result.per_image[i].image_id = gt.base.images[i].id;

    std::vector<std::vector<size_t>> preds_by_image(gt.base.images.size());
    for (size_t p = 0; p < preds.size(); ++p) {
        auto slot = image_slot.find(preds[p].image_id);
        if (slot == image_slot.end())
            raise(ErrorKind::Evaluation, "prediction #" + std::to_string(p) +
                                             " references image '" + preds[p].image_id +
                                             "' absent from the ground truth");
        if (!gt_labels.count(preds[p].label))
            raise(ErrorKind::Evaluation, "prediction #" + std::to_string(p) + " label '" +
                                             preds[p].label +
                                             "' is not in the ground-truth vocabulary");
        preds_by_image[slot->second].push_back(p);
    }

    std::vector<std::vector<size_t>> gts_by_image(gt.base.images.size());
    for (size_t g = 0; g < gt.base.boxes.size(); ++g)
        gts_by_image[image_slot.at(gt.base.boxes[g].image_id)].push_back(g);

    for (size_t i = 0; i < gt.base.images.size(); ++i) {
        auto& image_result = result.per_image[i];
        auto& pred_ids = preds_by_image[i];
        const auto& gt_ids = gts_by_image[i];

        // Highest score first; input order breaks ties.
        std::stable_sort(pred_ids.begin(), pred_ids.end(), [&](size_t a, size_t b) {
            return preds[a].score.value_or(0.0) > preds[b].score.value_or(0.0);
        });

        std::vector<bool> taken(gt_ids.size(), false);
        for (size_t p : pred_ids) {
            double best_same = -1.0, best_other = -1.0;
            size_t best_same_gt = 0, best_other_gt = 0;
            for (size_t k = 0; k < gt_ids.size(); ++k) {
                if (taken[k]) continue;
                const LabeledBox& gt_box = gt.base.boxes[gt_ids[k]];
                const double overlap = iou(preds[p].box, gt_box.box);
                if (gt_box.label == preds[p].label) {
                    if (overlap > best_same) {
                        best_same = overlap;
                        best_same_gt = k;
                    }
                } else if (overlap > best_other) {
                    best_other = overlap;
                    best_other_gt = k;
                }
            }
            if (best_same >= config.iou_threshold) {
                taken[best_same_gt] = true;
                image_result.matched.push_back({p, gt_ids[best_same_gt], best_same});
            } else if (best_other >= config.iou_threshold) {
                // Wrong label on a spatial hit: a false positive, and the
                // box stays available for a same-label match.
                image_result.misclassified.push_back({p, gt_ids[best_other_gt], best_other});
                image_result.unmatched_preds.push_back(p);
            } else {
                image_result.unmatched_preds.push_back(p);
            }
        }
        for (size_t k = 0; k < gt_ids.size(); ++k)
            if (!taken[k]) image_result.unmatched_gts.push_back(gt_ids[k]);
    }
    return result;
}

namespace {

void fill_rates(ClassCounts& counts) {
    const uint64_t pred_total = counts.tp + counts.fp;
    const uint64_t gt_total = counts.tp + counts.fn;
    counts.precision_defined = pred_total > 0;
    counts.recall_defined = gt_total > 0;
    counts.precision =
        pred_total ? static_cast<double>(counts.tp) / static_cast<double>(pred_total) : 0.0;
    counts.recall =
        gt_total ? static_cast<double>(counts.tp) / static_cast<double>(gt_total) : 0.0;
    const double pr = counts.precision + counts.recall;
    counts.f1 = pr > 0.0 ? 2.0 * counts.precision * counts.recall / pr : 0.0;
}

}  // namespace

EvalReport evaluate(const std::vector<LabeledBox>& preds, const GroundTruthSet& gt,
                    const EvalConfig& config) {
    const std::vector<LabeledBox> capped = cap_predictions(preds, config);
    const MatchResult matches = match_detections(capped, gt, config);

    EvalReport report;
    report.config = config;
    std::map<std::string, ClassCounts> per_class;
    if (config.per_class)
        for (const auto& label : gt.base.labels) per_class[label];  // stable key set

    for (const auto& image : matches.per_image) {
        report.overall.tp += image.matched.size();
        report.overall.fp += image.unmatched_preds.size();
        report.overall.fn += image.unmatched_gts.size();
        report.overall.misclassified += image.misclassified.size();
        if (!config.per_class) continue;
        for (const auto& pair : image.matched) ++per_class[capped[pair.pred_index].label].tp;
        for (size_t p : image.unmatched_preds) ++per_class[capped[p].label].fp;
        for (size_t g : image.unmatched_gts) ++per_class[gt.base.boxes[g].label].fn;
        for (const auto& pair : image.misclassified)
            ++per_class[capped[pair.pred_index].label].misclassified;
    }

    fill_rates(report.overall);
    if (config.per_class) {
        double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
        size_t active = 0;
        for (auto& [label, counts] : per_class) {
            fill_rates(counts);
            if (counts.tp + counts.fp + counts.fn > 0) {
                p_sum += counts.precision;
                r_sum += counts.recall;
                f_sum += counts.f1;
                ++active;
            }
        }
        if (active) {
            report.macro_precision = p_sum / static_cast<double>(active);
            report.macro_recall = r_sum / static_cast<double>(active);
            report.macro_f1 = f_sum / static_cast<double>(active);
        }
        report.per_class = std::move(per_class);
    }
    return report;
}

}  // namespace annoqa
