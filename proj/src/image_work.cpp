#include "image_work.hpp"

#include <map>
#include <unordered_map>

#include "annoqa/error.hpp"

namespace annoqa::detail {

std::vector<ImageWork> build_work_index(const AnnotationSet& set,
                                        const std::set<std::string>& excluded) {
    for (const auto& id : excluded)
        if (!set.find_annotator(id))
            raise(ErrorKind::Config, "excluded annotator '" + id + "' is not in the set");

    std::vector<ImageWork> index(set.images.size());
    for (size_t i = 0; i < set.images.size(); ++i) index[i].image = &set.images[i];

    std::map<std::pair<std::string, std::string>, std::vector<LabeledBox>> by_pair;
    std::set<std::pair<std::string, std::string>> present;
    for (const auto& box : set.boxes) {
        by_pair[{box.image_id, box.annotator_id}].push_back(box);
        present.insert({box.image_id, box.annotator_id});
    }
    for (const auto& empty : set.empty_annotations)
        present.insert({empty.image_id, empty.annotator_id});

    for (auto& work : index) {
        for (const auto& annotator : set.annotators) {
            if (excluded.count(annotator.id)) continue;
            auto key = std::make_pair(work.image->id, annotator.id);
            if (!present.count(key)) continue;
            work.participants.push_back(annotator.id);
            auto it = by_pair.find(key);
            work.boxes.push_back(it == by_pair.end() ? std::vector<LabeledBox>{}
                                                     : it->second);
        }
    }
    return index;
}

std::optional<ObservationMatrix> matrix_for_image(const ImageWork& work,
                                                  const AnnotationSet& set,
                                                  const AgreementConfig& config,
                                                  std::string* skip_reason) {
    if (work.participants.size() < 2) {
        *skip_reason = "fewer than 2 participating annotators";
        return std::nullopt;
    }
    std::vector<RasterStack> stacks;
    stacks.reserve(work.participants.size());
    for (size_t a = 0; a < work.participants.size(); ++a)
        stacks.push_back(
            rasterize(*work.image, work.boxes[a], set.labels, work.participants[a]));
    std::vector<RaterStacks> raters;
    raters.reserve(stacks.size());
    for (const auto& stack : stacks) raters.push_back({stack.annotator_id, &stack});

    ObservationMatrix matrix = build_observation_matrix(
        raters, config.drop_fraction, image_drop_seed(config.seed, work.image->id));
    if (config.class_filter) matrix = restrict_to_class(matrix, *config.class_filter);
    return matrix;
}

}  // namespace annoqa::detail
