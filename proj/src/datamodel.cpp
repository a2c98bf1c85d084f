#include "annoqa/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "annoqa/error.hpp"

namespace annoqa {

using ordered_json = nlohmann::ordered_json;

const char* tier_name(Tier tier) {
    switch (tier) {
        case Tier::Professional: return "professional";
        case Tier::Expert: return "expert";
        case Tier::Experienced: return "experienced";
        case Tier::Novice: return "novice";
        case Tier::Model: return "model";
    }
    return "professional";
}

Tier tier_from_name(const std::string& name) {
    if (name == "professional") return Tier::Professional;
    if (name == "expert") return Tier::Expert;
    if (name == "experienced") return Tier::Experienced;
    if (name == "novice") return Tier::Novice;
    if (name == "model") return Tier::Model;
    raise(ErrorKind::Parse, "unknown annotator tier: '" + name + "'");
}

const ImageRef* AnnotationSet::find_image(const std::string& id) const {
    for (const auto& image : images)
        if (image.id == id) return &image;
    return nullptr;
}

const Annotator* AnnotationSet::find_annotator(const std::string& id) const {
    for (const auto& annotator : annotators)
        if (annotator.id == id) return &annotator;
    return nullptr;
}

bool AnnotationSet::has_label(const std::string& label) const {
    return std::find(labels.begin(), labels.end(), label) != labels.end();
}

bool AnnotationSet::participates(const std::string& annotator_id,
                                 const std::string& image_id) const {
    for (const auto& box : boxes)
        if (box.annotator_id == annotator_id && box.image_id == image_id) return true;
    for (const auto& empty : empty_annotations)
        if (empty.annotator_id == annotator_id && empty.image_id == image_id) return true;
    return false;
}

std::vector<LabeledBox> AnnotationSet::boxes_for(const std::string& image_id,
                                                 const std::string& annotator_id) const {
    std::vector<LabeledBox> out;
    for (const auto& box : boxes)
        if (box.image_id == image_id && box.annotator_id == annotator_id)
            out.push_back(box);
    return out;
}

bool clamp_box(Box& box, int image_width, int image_height) {
    int x1 = std::clamp(box.x, 0, image_width);
    int y1 = std::clamp(box.y, 0, image_height);
    int x2 = std::clamp(box.x + box.w, 0, image_width);
    int y2 = std::clamp(box.y + box.h, 0, image_height);
    if (x2 - x1 < 1 || y2 - y1 < 1) return false;
    box = Box{x1, y1, x2 - x1, y2 - y1};
    return true;
}

namespace {

void check_structure(const AnnotationSet& set) {
    std::unordered_set<std::string> seen;
    for (const auto& image : set.images) {
        if (image.width < 1 || image.height < 1)
            raise(ErrorKind::Validation,
                  "image '" + image.id + "' has non-positive dimensions");
        if (!seen.insert(image.id).second)
            raise(ErrorKind::Validation, "duplicate image id '" + image.id + "'");
    }
    seen.clear();
    for (const auto& annotator : set.annotators)
        if (!seen.insert(annotator.id).second)
            raise(ErrorKind::Validation, "duplicate annotator id '" + annotator.id + "'");
    if (set.labels.empty())
        raise(ErrorKind::Validation, "label vocabulary is empty");
    seen.clear();
    for (const auto& label : set.labels)
        if (!seen.insert(label).second)
            raise(ErrorKind::Validation, "duplicate label '" + label + "'");
}

// Clamps and link-checks boxes that are already attached to the set.
void finish_boxes(AnnotationSet& set, std::vector<ClampWarning>& warnings) {
    std::unordered_map<std::string, const ImageRef*> images;
    for (const auto& image : set.images) images[image.id] = &image;
    std::unordered_set<std::string> annotators;
    for (const auto& annotator : set.annotators) annotators.insert(annotator.id);
    std::set<std::string> vocabulary(set.labels.begin(), set.labels.end());

    for (size_t i = 0; i < set.boxes.size(); ++i) {
        auto& box = set.boxes[i];
        auto image_it = images.find(box.image_id);
        if (image_it == images.end())
            raise(ErrorKind::Referential,
                  "box #" + std::to_string(i) + " references unknown image '" +
                      box.image_id + "'");
        if (!annotators.count(box.annotator_id))
            raise(ErrorKind::Referential,
                  "box #" + std::to_string(i) + " references unknown annotator '" +
                      box.annotator_id + "'");
        if (!vocabulary.count(box.label))
            raise(ErrorKind::Vocabulary,
                  "box #" + std::to_string(i) + " has label '" + box.label +
                      "' outside the declared vocabulary");
        if (box.box.w < 1 || box.box.h < 1)
            raise(ErrorKind::Record,
                  "box #" + std::to_string(i) + " on image '" + box.image_id +
                      "' has non-positive size");
        if (box.score && (*box.score < 0.0 || *box.score > 1.0))
            raise(ErrorKind::Record,
                  "box #" + std::to_string(i) + " has score outside [0,1]");
        Box original = box.box;
        const ImageRef& image = *image_it->second;
        if (!clamp_box(box.box, image.width, image.height))
            raise(ErrorKind::Record,
                  "box #" + std::to_string(i) + " on image '" + box.image_id +
                      "' has no area left after clamping to " +
                      std::to_string(image.width) + "x" + std::to_string(image.height));
        if (box.box != original)
            warnings.push_back({i, box.image_id, box.annotator_id, original, box.box});
    }

    for (const auto& empty : set.empty_annotations) {
        if (!images.count(empty.image_id))
            raise(ErrorKind::Referential,
                  "empty annotation references unknown image '" + empty.image_id + "'");
        if (!annotators.count(empty.annotator_id))
            raise(ErrorKind::Referential,
                  "empty annotation references unknown annotator '" +
                      empty.annotator_id + "'");
    }
}

ParseResult parse_canonical_json(const std::string& payload) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorKind::Parse,
              "invalid JSON at byte " + std::to_string(e.byte) + ": " + e.what());
    }

    ParseResult result;
    AnnotationSet& set = result.set;
    try {
        for (const auto& image : doc.at("images")) {
            ImageRef ref;
            ref.id = image.at("id").get<std::string>();
            ref.width = image.at("width").get<int>();
            ref.height = image.at("height").get<int>();
            if (image.contains("source")) ref.source = image["source"].get<std::string>();
            set.images.push_back(std::move(ref));
        }
        for (const auto& annotator : doc.at("annotators")) {
            set.annotators.push_back({annotator.at("id").get<std::string>(),
                                      tier_from_name(annotator.at("tier").get<std::string>())});
        }
        set.labels = doc.at("labels").get<std::vector<std::string>>();
        for (const auto& box : doc.at("boxes")) {
            LabeledBox lb;
            lb.image_id = box.at("image_id").get<std::string>();
            lb.annotator_id = box.at("annotator_id").get<std::string>();
            lb.label = box.at("label").get<std::string>();
            const auto& bbox = box.at("bbox");
            if (!bbox.is_array() || bbox.size() != 4)
                raise(ErrorKind::Parse, "bbox must be a [x,y,w,h] array");
            lb.box = Box{bbox[0].get<int>(), bbox[1].get<int>(), bbox[2].get<int>(),
                         bbox[3].get<int>()};
            if (box.contains("score")) lb.score = box["score"].get<double>();
            set.boxes.push_back(std::move(lb));
        }
        if (doc.contains("empty_annotations")) {
            for (const auto& empty : doc["empty_annotations"])
                set.empty_annotations.push_back({empty.at("image_id").get<std::string>(),
                                                 empty.at("annotator_id").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::Parse, std::string("canonical JSON structure error: ") + e.what());
    }

    check_structure(set);
    finish_boxes(set, result.clamp_warnings);
    return result;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

int parse_int_field(const std::string& text, size_t line_no, const char* what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        raise(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad " + what +
                                    " value '" + text + "'");
    return value;
}

ParseResult parse_csv(const std::string& payload,
                      const std::vector<std::string>& expected_labels) {
    struct Row {
        std::string image_id, annotator_id, label;
        Box box;
        std::optional<double> score;
    };
    std::vector<Row> rows;
    std::istringstream stream(payload);
    std::string line;
    size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("image_id", 0) == 0) continue;  // header
        auto fields = split_csv_line(line);
        if (fields.size() != 7 && fields.size() != 8)
            raise(ErrorKind::Parse, "line " + std::to_string(line_no) +
                                        ": expected 7 or 8 CSV fields, got " +
                                        std::to_string(fields.size()));
        Row row;
        row.image_id = fields[0];
        row.annotator_id = fields[1];
        row.label = fields[2];
        row.box = Box{parse_int_field(fields[3], line_no, "x"),
                      parse_int_field(fields[4], line_no, "y"),
                      parse_int_field(fields[5], line_no, "w"),
                      parse_int_field(fields[6], line_no, "h")};
        if (fields.size() == 8 && !fields[7].empty()) {
            try {
                row.score = std::stod(fields[7]);
            } catch (const std::exception&) {
                raise(ErrorKind::Parse,
                      "line " + std::to_string(line_no) + ": bad score '" + fields[7] + "'");
            }
        }
        rows.push_back(std::move(row));
    }

    ParseResult result;
    AnnotationSet& set = result.set;

    // Image dimensions are not part of the CSV format; infer the tightest
    // bounds that contain every box.
    std::map<std::string, std::pair<int, int>> dims;
    std::map<std::string, bool> scored;
    std::set<std::string> labels_seen;
    for (const auto& row : rows) {
        auto& d = dims[row.image_id];
        d.first = std::max({d.first, row.box.x + row.box.w, 1});
        d.second = std::max({d.second, row.box.y + row.box.h, 1});
        scored[row.annotator_id] = scored[row.annotator_id] || row.score.has_value();
        labels_seen.insert(row.label);
    }
    for (const auto& [id, d] : dims) set.images.push_back({id, d.first, d.second, ""});
    for (const auto& [id, has_score] : scored)
        set.annotators.push_back({id, has_score ? Tier::Model : Tier::Professional});

    if (!expected_labels.empty()) {
        set.labels = expected_labels;
        for (const auto& label : labels_seen)
            if (std::find(set.labels.begin(), set.labels.end(), label) == set.labels.end())
                raise(ErrorKind::Vocabulary,
                      "CSV label '" + label + "' is not in the declared vocabulary");
    } else {
        set.labels.assign(labels_seen.begin(), labels_seen.end());
    }

    for (const auto& row : rows)
        set.boxes.push_back({row.image_id, row.annotator_id, row.label, row.box, row.score});

    check_structure(set);
    finish_boxes(set, result.clamp_warnings);
    return result;
}

}  // namespace

ParseResult parse_annotation_set(const std::string& payload, PayloadFormat format,
                                 const std::vector<std::string>& expected_labels) {
    return format == PayloadFormat::CanonicalJson ? parse_canonical_json(payload)
                                                  : parse_csv(payload, expected_labels);
}

std::string serialize_annotation_set(const AnnotationSet& set) {
    ordered_json doc;
    doc["images"] = ordered_json::array();
    for (const auto& image : set.images) {
        ordered_json entry{{"id", image.id}, {"width", image.width}, {"height", image.height}};
        if (!image.source.empty()) entry["source"] = image.source;
        doc["images"].push_back(std::move(entry));
    }
    doc["annotators"] = ordered_json::array();
    for (const auto& annotator : set.annotators)
        doc["annotators"].push_back({{"id", annotator.id}, {"tier", tier_name(annotator.tier)}});
    doc["labels"] = set.labels;
    doc["boxes"] = ordered_json::array();
    for (const auto& box : set.boxes) {
        ordered_json entry{{"image_id", box.image_id},
                           {"annotator_id", box.annotator_id},
                           {"label", box.label},
                           {"bbox", {box.box.x, box.box.y, box.box.w, box.box.h}}};
        if (box.score) entry["score"] = *box.score;
        doc["boxes"].push_back(std::move(entry));
    }
    if (!set.empty_annotations.empty()) {
        doc["empty_annotations"] = ordered_json::array();
        for (const auto& empty : set.empty_annotations)
            doc["empty_annotations"].push_back(
                {{"image_id", empty.image_id}, {"annotator_id", empty.annotator_id}});
    }
    return doc.dump(2) + "\n";
}

LabelMap parse_label_map(const std::string& payload) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorKind::Parse, std::string("invalid label map JSON: ") + e.what());
    }
    LabelMap map;
    if (doc.contains("rename"))
        for (const auto& [from, to] : doc["rename"].items())
            map.rename[from] = to.get<std::string>();
    if (doc.contains("drop"))
        for (const auto& label : doc["drop"]) map.drop.insert(label.get<std::string>());
    for (const auto& [from, to] : map.rename)
        if (map.drop.count(from))
            raise(ErrorKind::Config, "label '" + from + "' is both renamed and dropped");
    return map;
}

AnnotationSet apply_label_mapping(const AnnotationSet& set, const LabelMap& map,
                                  MappingStats* stats) {
    // Final vocabulary: original order, drops removed, renames substituted,
    // duplicates collapsed to first occurrence.
    std::vector<std::string> final_labels;
    for (const auto& label : set.labels) {
        if (map.drop.count(label)) continue;
        auto rename_it = map.rename.find(label);
        const std::string& target = rename_it == map.rename.end() ? label : rename_it->second;
        if (std::find(final_labels.begin(), final_labels.end(), target) == final_labels.end())
            final_labels.push_back(target);
    }
    for (const auto& [from, to] : map.rename) {
        if (!set.has_label(from)) continue;
        if (std::find(final_labels.begin(), final_labels.end(), to) == final_labels.end())
            raise(ErrorKind::Config,
                  "rename target '" + to + "' is not in the final vocabulary");
    }

    AnnotationSet out = set;
    out.labels = final_labels;
    out.boxes.clear();
    MappingStats local;
    for (auto box : set.boxes) {
        if (map.drop.count(box.label)) {
            ++local.dropped;
            continue;
        }
        auto rename_it = map.rename.find(box.label);
        if (rename_it != map.rename.end()) {
            box.label = rename_it->second;
            ++local.renamed;
        }
        out.boxes.push_back(std::move(box));
    }
    if (stats) *stats = local;
    return out;
}

ValidationReport validate(const AnnotationSet& set) {
    ValidationReport report;
    report.box_count = set.boxes.size();

    std::map<std::string, std::set<std::string>> images_by_annotator;
    std::map<std::string, std::set<std::string>> annotators_by_image;
    for (const auto& box : set.boxes) {
        images_by_annotator[box.annotator_id].insert(box.image_id);
        annotators_by_image[box.image_id].insert(box.annotator_id);
        ++report.class_counts[box.label];
    }
    for (const auto& empty : set.empty_annotations) {
        images_by_annotator[empty.annotator_id].insert(empty.image_id);
        annotators_by_image[empty.image_id].insert(empty.annotator_id);
    }

    for (const auto& annotator : set.annotators) {
        size_t covered = images_by_annotator[annotator.id].size();
        report.coverage[annotator.id] =
            set.images.empty() ? 0.0
                               : static_cast<double>(covered) / set.images.size();
    }
    for (const auto& image : set.images) {
        auto& list = report.per_image_annotators[image.id];
        const auto& present = annotators_by_image[image.id];
        list.assign(present.begin(), present.end());
    }

    std::map<std::tuple<std::string, std::string, std::string, int, int, int, int>, size_t>
        occurrences;
    for (const auto& box : set.boxes)
        ++occurrences[{box.image_id, box.annotator_id, box.label, box.box.x, box.box.y,
                       box.box.w, box.box.h}];
    for (const auto& [key, count] : occurrences) {
        if (count < 2) continue;
        const auto& [image_id, annotator_id, label, x, y, w, h] = key;
        report.duplicates.push_back({image_id, annotator_id, label, Box{x, y, w, h}, count});
    }
    return report;
}

}  // namespace annoqa
