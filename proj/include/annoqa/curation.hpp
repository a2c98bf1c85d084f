#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "annoqa/datamodel.hpp"

namespace annoqa {

enum class GtRecipe { DropAnnotator, MixedTop, SingleTop, Original };

const char* recipe_name(GtRecipe recipe);

// One chosen annotation per image plus the record of who was chosen.
struct GroundTruthSet {
    AnnotationSet base;
    std::map<std::string, std::string> provenance;  // image id -> annotator id
    GtRecipe recipe = GtRecipe::Original;
    uint64_t seed = 0;
};

// Removes annotator k's records; images stay even if now uncovered.
AnnotationSet drop_annotator(const AnnotationSet& set, const std::string& annotator_id);

// gt1: for each image, a seeded uniform draw among the top annotators that
// cover it.
GroundTruthSet build_gt_mixed(const AnnotationSet& set,
                              const std::vector<std::string>& top,
                              const std::vector<std::string>& images, uint64_t seed);

// gt2: one seeded draw from `top`, used for every image. A coverage hole is
// an error; silently substituting another annotator would break the
// same-annotator property.
GroundTruthSet build_gt_single(const AnnotationSet& set,
                               const std::vector<std::string>& top,
                               const std::vector<std::string>& images, uint64_t seed);

// gt3: externally released labels, mapped into the working vocabulary and
// attributed to the "original" pseudo-annotator.
GroundTruthSet import_original_gt(const std::string& payload, const LabelMap& map);

std::string serialize_ground_truth(const GroundTruthSet& gt);
GroundTruthSet parse_ground_truth(const std::string& payload);

}  // namespace annoqa
