#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace annoqa {

enum class Tier { Professional, Expert, Experienced, Novice, Model };

const char* tier_name(Tier tier);
Tier tier_from_name(const std::string& name);

struct ImageRef {
    std::string id;
    int width = 0;   // pixels, >= 1
    int height = 0;  // pixels, >= 1
    std::string source;  // optional provenance note

    bool operator==(const ImageRef&) const = default;
};

struct Annotator {
    std::string id;
    Tier tier = Tier::Professional;

    bool operator==(const Annotator&) const = default;
};

// Integer pixel rectangle with half-open semantics: covers [x, x+w) x [y, y+h),
// so area == w*h is the exact pixel count.
struct Box {
    int x = 0;
    int y = 0;
    int w = 1;
    int h = 1;

    int64_t area() const { return static_cast<int64_t>(w) * h; }
    bool operator==(const Box&) const = default;
};

struct LabeledBox {
    std::string image_id;
    std::string annotator_id;
    std::string label;
    Box box;
    std::optional<double> score;  // present for detector predictions

    bool operator==(const LabeledBox&) const = default;
};

// Explicit record that an annotator processed an image and drew nothing.
// Without it a box-less (annotator, image) pair means "did not annotate",
// which the agreement stage treats as missing data rather than consensus
// on an empty image.
struct EmptyAnnotation {
    std::string image_id;
    std::string annotator_id;

    bool operator==(const EmptyAnnotation&) const = default;
    auto operator<=>(const EmptyAnnotation&) const = default;
};

struct ClampWarning {
    size_t record_index = 0;
    std::string image_id;
    std::string annotator_id;
    Box original;
    Box clamped;
};

struct AnnotationSet {
    std::vector<ImageRef> images;
    std::vector<Annotator> annotators;
    std::vector<std::string> labels;  // ordered vocabulary
    std::vector<LabeledBox> boxes;
    std::vector<EmptyAnnotation> empty_annotations;

    const ImageRef* find_image(const std::string& id) const;
    const Annotator* find_annotator(const std::string& id) const;
    bool has_label(const std::string& label) const;

    // True when the annotator produced any record (box or empty marker)
    // for the image.
    bool participates(const std::string& annotator_id, const std::string& image_id) const;

    std::vector<LabeledBox> boxes_for(const std::string& image_id,
                                      const std::string& annotator_id) const;

    bool operator==(const AnnotationSet&) const = default;
};

struct LabelMap {
    std::map<std::string, std::string> rename;
    std::set<std::string> drop;
};

struct MappingStats {
    size_t renamed = 0;
    size_t dropped = 0;
};

struct DuplicateWarning {
    std::string image_id;
    std::string annotator_id;
    std::string label;
    Box box;
    size_t copies = 0;
};

struct ValidationReport {
    // Fraction of images each annotator produced a record for.
    std::map<std::string, double> coverage;
    // image id -> annotator ids with a record on it.
    std::map<std::string, std::vector<std::string>> per_image_annotators;
    std::vector<DuplicateWarning> duplicates;
    std::map<std::string, size_t> class_counts;
    size_t box_count = 0;
};

enum class PayloadFormat { CanonicalJson, Csv };

struct ParseResult {
    AnnotationSet set;
    std::vector<ClampWarning> clamp_warnings;
};

// Parses the canonical JSON document or the CSV import format. Boxes are
// clamped to image bounds; a box with no area left after clamping is a
// record error. For CSV, `expected_labels` fixes the vocabulary (empty =
// infer from the file) and image dimensions are inferred from box extents.
ParseResult parse_annotation_set(const std::string& payload, PayloadFormat format,
                                 const std::vector<std::string>& expected_labels = {});

// Canonical JSON serialization; parse(serialize(set)) == set.
std::string serialize_annotation_set(const AnnotationSet& set);

LabelMap parse_label_map(const std::string& payload);

AnnotationSet apply_label_mapping(const AnnotationSet& set, const LabelMap& map,
                                  MappingStats* stats = nullptr);

ValidationReport validate(const AnnotationSet& set);

// Clamps a box to image bounds. Returns false when nothing remains.
bool clamp_box(Box& box, int image_width, int image_height);

}  // namespace annoqa
