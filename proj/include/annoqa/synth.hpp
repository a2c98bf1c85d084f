#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "annoqa/datamodel.hpp"

namespace annoqa {

// Annotator noise model: per-object miss probability, independent edge
// jitter, a width/height scale bias (tight vs loose boxes), label
// confusion, and Poisson spurious boxes per image.
struct NoiseProfile {
    double p_miss = 0.0;
    double jitter_sigma = 0.0;     // pixels per edge, rounded to integers
    double scale_bias = 1.0;       // multiplies w and h about the box center
    std::map<std::string, std::map<std::string, double>> confusion;  // row-stochastic
    double p_spurious = 0.0;       // expected spurious boxes per image
    int spurious_min_size = 8;
    int spurious_max_size = 48;

    void check(const std::vector<std::string>& labels) const;
};

struct SceneSpec {
    int width = 640;
    int height = 480;
    size_t image_count = 10;
    size_t objects_min = 3;
    size_t objects_max = 8;
    std::map<std::string, double> class_mix;  // label -> weight
    int box_min_size = 12;
    int box_max_size = 96;
    uint64_t seed = 0;

    void check() const;
};

// Deterministic scene generator; annotator id "truth".
AnnotationSet generate_truth(const SceneSpec& spec);

// Applies the noise profile to every truth box, per image with derived
// sub-seeds. Images where everything was missed still get an explicit
// empty-annotation record: the annotator processed the image.
AnnotationSet simulate_annotator(const AnnotationSet& truth, const NoiseProfile& profile,
                                 const std::string& annotator_id, uint64_t seed);

// Like simulate_annotator, plus a confidence score per box that decreases
// with the applied perturbation; spurious boxes score low.
AnnotationSet simulate_detector(const AnnotationSet& truth, const NoiseProfile& profile,
                                uint64_t seed);

// Convenience: truth + simulated annotators merged into one set.
AnnotationSet merge_annotation_sets(const AnnotationSet& base, const AnnotationSet& extra);

NoiseProfile parse_noise_profile(const std::string& payload);
SceneSpec parse_scene_spec(const std::string& payload);

}  // namespace annoqa
