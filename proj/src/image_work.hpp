#pragma once

// Internal per-image work index shared by the agreement and quality
// pipelines: participation and box lookup per (image, annotator), plus the
// observation-matrix construction for one image.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "annoqa/agreement.hpp"
#include "annoqa/datamodel.hpp"
#include "annoqa/raster.hpp"

namespace annoqa::detail {

struct ImageWork {
    const ImageRef* image = nullptr;
    std::vector<std::string> participants;       // set annotator order
    std::vector<std::vector<LabeledBox>> boxes;  // aligned with participants
};

std::vector<ImageWork> build_work_index(const AnnotationSet& set,
                                        const std::set<std::string>& excluded);

// Builds the (optionally class-restricted) observation matrix for one
// image; nullopt with a reason when the image cannot produce one.
std::optional<ObservationMatrix> matrix_for_image(const ImageWork& work,
                                                  const AnnotationSet& set,
                                                  const AgreementConfig& config,
                                                  std::string* skip_reason);

}  // namespace annoqa::detail
