#pragma once

#include <map>
#include <string>
#include <vector>

#include "annoqa/agreement.hpp"
#include "annoqa/datamodel.hpp"

namespace annoqa {

// Leave-one-out vitality for one annotator: V_i = K(all) - K(all but i),
// computed per image on the identical retained-unit subset.
struct VitalityReport {
    std::string annotator_id;
    struct ImageEntry {
        std::string image_id;
        double v = 0.0;
        double k_full = 0.0;
        double k_loo = 0.0;
    };
    std::vector<ImageEntry> per_image;  // images where V_i is defined
    double mean_v = 0.0;
    double median_v = 0.0;
    double k_full_mean = 0.0;
    double k_loo_mean = 0.0;
};

struct ClassDifficultyReport {
    std::string label;
    double mean_class_alpha = 0.0;
    double median_class_alpha = 0.0;
    std::map<std::string, double> per_annotator_vitality;  // mean V_i(class)
    struct ImageEntry {
        std::string image_id;
        double alpha = 0.0;
        bool degenerate = false;
    };
    std::vector<ImageEntry> per_image;
    size_t degenerate_images = 0;
    bool fully_degenerate = false;  // class never produced a disagreement signal
};

VitalityReport vitality(const AnnotationSet& set, const std::string& annotator_id,
                        const AgreementConfig& config);

// All annotators in one pass; each image's observation matrix is built once
// and shared across the full and every leave-one-out alpha.
std::vector<VitalityReport> vitality_all(const AnnotationSet& set,
                                         const AgreementConfig& config);

ClassDifficultyReport class_difficulty(const AnnotationSet& set, const std::string& label,
                                       const AgreementConfig& config);

// Descending mean vitality; ties broken by annotator id.
std::vector<std::pair<std::string, double>> rank_annotators(
    const std::vector<VitalityReport>& reports);

}  // namespace annoqa
