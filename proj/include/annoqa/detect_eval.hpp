#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "annoqa/curation.hpp"
#include "annoqa/datamodel.hpp"

namespace annoqa {

enum class CapScope { Global, PerImage };

struct EvalConfig {
    double iou_threshold = 0.5;
    std::optional<size_t> cap;
    CapScope cap_scope = CapScope::Global;
    bool per_class = true;
};

// Exact pixel-count IoU under half-open box semantics.
double iou(const Box& a, const Box& b);

// IoU gated on label equality: different labels score zero regardless of
// overlap.
double labeled_iou(const LabeledBox& a, const LabeledBox& b);

// Top-cap predictions by descending score (ties: descending area, then
// input order), globally or per image.
std::vector<LabeledBox> cap_predictions(const std::vector<LabeledBox>& preds,
                                        const EvalConfig& config);

struct MatchedPair {
    size_t pred_index = 0;
    size_t gt_index = 0;
    double iou = 0.0;
};

struct MatchResult {
    struct PerImage {
        std::string image_id;
        std::vector<MatchedPair> matched;        // true positives
        std::vector<MatchedPair> misclassified;  // spatial hit, wrong label; also FP
        std::vector<size_t> unmatched_preds;     // false positives (incl. misclassified)
        std::vector<size_t> unmatched_gts;       // false negatives
    };
    std::vector<PerImage> per_image;
    std::vector<LabeledBox> preds;  // post-cap prediction list the indices refer to
};

// Greedy score-ordered one-to-one matching per image. A prediction whose
// best same-label IoU clears the threshold is a TP; otherwise, if it
// spatially hits an unmatched ground-truth box of a different label it is
// recorded as misclassified (counted FP, the box stays available for
// same-label matches); otherwise plain FP. Unmatched ground truth -> FN.
MatchResult match_detections(const std::vector<LabeledBox>& preds,
                             const GroundTruthSet& gt, const EvalConfig& config);

struct ClassCounts {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t fn = 0;
    uint64_t misclassified = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;  // false when TP+FP == 0
    bool recall_defined = true;     // false when TP+FN == 0
};

struct EvalReport {
    ClassCounts overall;                         // micro-averaged
    std::map<std::string, ClassCounts> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    EvalConfig config;
};

EvalReport evaluate(const std::vector<LabeledBox>& preds, const GroundTruthSet& gt,
                    const EvalConfig& config);

}  // namespace annoqa
