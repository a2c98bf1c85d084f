#include "annoqa/curation.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "annoqa/error.hpp"
#include "annoqa/rng.hpp"

namespace annoqa {

using ordered_json = nlohmann::ordered_json;

const char* recipe_name(GtRecipe recipe) {
    switch (recipe) {
        case GtRecipe::DropAnnotator: return "drop_annotator";
        case GtRecipe::MixedTop: return "mixed_top";
        case GtRecipe::SingleTop: return "single_top";
        case GtRecipe::Original: return "original";
    }
    return "original";
}

static GtRecipe recipe_from_name(const std::string& name) {
    if (name == "drop_annotator") return GtRecipe::DropAnnotator;
    if (name == "mixed_top") return GtRecipe::MixedTop;
    if (name == "single_top") return GtRecipe::SingleTop;
    if (name == "original") return GtRecipe::Original;
    raise(ErrorKind::Parse, "unknown ground-truth recipe '" + name + "'");
}

AnnotationSet drop_annotator(const AnnotationSet& set, const std::string& annotator_id) {
    if (!set.find_annotator(annotator_id))
        raise(ErrorKind::Config, "annotator '" + annotator_id + "' is not in the set");
    AnnotationSet out = set;
    std::erase_if(out.annotators,
                  [&](const Annotator& a) { return a.id == annotator_id; });
    std::erase_if(out.boxes,
                  [&](const LabeledBox& b) { return b.annotator_id == annotator_id; });
    std::erase_if(out.empty_annotations,
                  [&](const EmptyAnnotation& e) { return e.annotator_id == annotator_id; });
    return out;
}

namespace {

void check_top(const AnnotationSet& set, const std::vector<std::string>& top) {
    if (top.empty()) raise(ErrorKind::Curation, "top annotator list is empty");
    std::set<std::string> seen;
    for (const auto& id : top) {
        if (!set.find_annotator(id))
            raise(ErrorKind::Curation, "top annotator '" + id + "' is not in the set");
        if (!seen.insert(id).second)
            raise(ErrorKind::Curation, "top annotator '" + id + "' listed twice");
    }
}

std::vector<std::string> resolve_images(const AnnotationSet& set,
                                        const std::vector<std::string>& images) {
    std::vector<std::string> resolved = images;
    if (resolved.empty())
        for (const auto& image : set.images) resolved.push_back(image.id);
    for (const auto& id : resolved)
        if (!set.find_image(id))
            raise(ErrorKind::Curation, "image '" + id + "' is not in the set");
    return resolved;
}

// Keeps only the chosen annotator's records per image.
GroundTruthSet assemble(const AnnotationSet& set, GtRecipe recipe, uint64_t seed,
                        const std::map<std::string, std::string>& provenance) {
    GroundTruthSet gt;
    gt.recipe = recipe;
    gt.seed = seed;
    gt.provenance = provenance;
    gt.base.labels = set.labels;

    std::set<std::string> chosen_annotators;
    for (const auto& [image_id, annotator_id] : provenance) {
        gt.base.images.push_back(*set.find_image(image_id));
        chosen_annotators.insert(annotator_id);
    }
    for (const auto& annotator : set.annotators)
        if (chosen_annotators.count(annotator.id)) gt.base.annotators.push_back(annotator);

    for (const auto& box : set.boxes) {
        auto it = provenance.find(box.image_id);
        if (it != provenance.end() && it->second == box.annotator_id)
            gt.base.boxes.push_back(box);
    }
    for (const auto& empty : set.empty_annotations) {
        auto it = provenance.find(empty.image_id);
        if (it != provenance.end() && it->second == empty.annotator_id)
            gt.base.empty_annotations.push_back(empty);
    }
    return gt;
}

}  // namespace

GroundTruthSet build_gt_mixed(const AnnotationSet& set,
                              const std::vector<std::string>& top,
                              const std::vector<std::string>& images, uint64_t seed) {
    check_top(set, top);
    const auto image_ids = resolve_images(set, images);

    std::vector<std::string> uncovered;
    std::map<std::string, std::string> provenance;
    for (const auto& image_id : image_ids) {
        std::vector<std::string> candidates;
        for (const auto& id : top)
            if (set.participates(id, image_id)) candidates.push_back(id);
        if (candidates.empty()) {
            uncovered.push_back(image_id);
            continue;
        }
        // Per-image stream so the draw does not depend on image order.
        Rng rng(mix_seed(seed, fnv1a64(image_id)));
        provenance[image_id] = candidates[rng.bounded(candidates.size())];
    }
    if (!uncovered.empty()) {
        std::string joined;
        for (const auto& id : uncovered) joined += (joined.empty() ? "" : ", ") + id;
        raise(ErrorKind::Curation, "no top annotator covers image(s): " + joined);
    }
    return assemble(set, GtRecipe::MixedTop, seed, provenance);
}

GroundTruthSet build_gt_single(const AnnotationSet& set,
                               const std::vector<std::string>& top,
                               const std::vector<std::string>& images, uint64_t seed) {
    check_top(set, top);
    const auto image_ids = resolve_images(set, images);

    Rng rng(mix_seed(seed, fnv1a64("gt_single")));
    const std::string& chosen = top[rng.bounded(top.size())];

    std::vector<std::string> uncovered;
    for (const auto& image_id : image_ids)
        if (!set.participates(chosen, image_id)) uncovered.push_back(image_id);
    if (!uncovered.empty()) {
        std::string joined;
        for (const auto& id : uncovered) joined += (joined.empty() ? "" : ", ") + id;
        raise(ErrorKind::Curation,
              "annotator '" + chosen + "' drawn for the single-annotator ground truth "
              "does not cover image(s): " + joined);
    }

    std::map<std::string, std::string> provenance;
    for (const auto& image_id : image_ids) provenance[image_id] = chosen;
    return assemble(set, GtRecipe::SingleTop, seed, provenance);
}

GroundTruthSet import_original_gt(const std::string& payload, const LabelMap& map) {
    ParseResult parsed = parse_annotation_set(payload, PayloadFormat::CanonicalJson);
    AnnotationSet mapped = apply_label_mapping(parsed.set, map);

    // Released label sets are treated as one opaque source regardless of
    // internal attribution.
    GroundTruthSet gt;
    gt.recipe = GtRecipe::Original;
    gt.base = std::move(mapped);
    gt.base.annotators = {{"original", Tier::Professional}};
    for (auto& box : gt.base.boxes) box.annotator_id = "original";
    for (auto& empty : gt.base.empty_annotations) empty.annotator_id = "original";
    std::sort(gt.base.empty_annotations.begin(), gt.base.empty_annotations.end());
    gt.base.empty_annotations.erase(
        std::unique(gt.base.empty_annotations.begin(), gt.base.empty_annotations.end()),
        gt.base.empty_annotations.end());
    for (const auto& image : gt.base.images) gt.provenance[image.id] = "original";
    return gt;
}

std::string serialize_ground_truth(const GroundTruthSet& gt) {
    ordered_json doc = ordered_json::parse(serialize_annotation_set(gt.base));
    ordered_json provenance = ordered_json::object();
    for (const auto& [image_id, annotator_id] : gt.provenance)
        provenance[image_id] = annotator_id;
    doc["provenance"] = std::move(provenance);
    doc["recipe"] = recipe_name(gt.recipe);
    doc["seed"] = gt.seed;
    return doc.dump(2) + "\n";
}

GroundTruthSet parse_ground_truth(const std::string& payload) {
    ParseResult parsed = parse_annotation_set(payload, PayloadFormat::CanonicalJson);
    GroundTruthSet gt;
    gt.base = std::move(parsed.set);

    ordered_json doc = ordered_json::parse(payload);
    if (doc.contains("provenance"))
        for (const auto& [image_id, annotator_id] : doc["provenance"].items())
            gt.provenance[image_id] = annotator_id.get<std::string>();
    else
        for (const auto& image : gt.base.images)
            gt.provenance[image.id] = "original";
    if (doc.contains("recipe")) gt.recipe = recipe_from_name(doc["recipe"].get<std::string>());
    if (doc.contains("seed")) gt.seed = doc["seed"].get<uint64_t>();
    return gt;
}

}  // namespace annoqa
