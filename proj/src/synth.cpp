#include "annoqa/synth.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "annoqa/error.hpp"
#include "annoqa/rng.hpp"

namespace annoqa {

using ordered_json = nlohmann::ordered_json;

void NoiseProfile::check(const std::vector<std::string>& labels) const {
    if (p_miss < 0.0 || p_miss > 1.0)
        raise(ErrorKind::Config, "p_miss must be in [0, 1]");
    if (jitter_sigma < 0.0) raise(ErrorKind::Config, "jitter_sigma must be >= 0");
    if (scale_bias <= 0.0) raise(ErrorKind::Config, "scale_bias must be > 0");
    if (p_spurious < 0.0) raise(ErrorKind::Config, "p_spurious must be >= 0");
    if (spurious_min_size < 1 || spurious_max_size < spurious_min_size)
        raise(ErrorKind::Config, "spurious box size range is invalid");
    for (const auto& [from, row] : confusion) {
        if (std::find(labels.begin(), labels.end(), from) == labels.end())
            raise(ErrorKind::Config, "confusion row for unknown label '" + from + "'");
        double sum = 0.0;
        for (const auto& [to, p] : row) {
            if (std::find(labels.begin(), labels.end(), to) == labels.end())
                raise(ErrorKind::Config, "confusion target '" + to + "' is unknown");
            if (p < 0.0) raise(ErrorKind::Config, "confusion probabilities must be >= 0");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            raise(ErrorKind::Config, "confusion row for '" + from + "' must sum to 1");
    }
}

void SceneSpec::check() const {
    if (width < 1 || height < 1) raise(ErrorKind::Config, "scene dimensions must be >= 1");
    if (class_mix.empty()) raise(ErrorKind::Config, "class_mix is empty");
    for (const auto& [label, weight] : class_mix)
        if (weight <= 0.0)
            raise(ErrorKind::Config, "class weight for '" + label + "' must be > 0");
    if (objects_max < objects_min)
        raise(ErrorKind::Config, "objects_max must be >= objects_min");
    if (box_min_size < 1 || box_max_size < box_min_size)
        raise(ErrorKind::Config, "box size range is invalid");
    if (box_min_size > width || box_min_size > height)
        raise(ErrorKind::Config, "box_min_size does not fit inside the image");
}

namespace {

std::string image_name(size_t index) {
    std::string digits = std::to_string(index);
    return "img_" + std::string(digits.size() < 5 ? 5 - digits.size() : 0, '0') + digits;
}

std::string draw_label(const std::map<std::string, double>& weights, double total, Rng& rng) {
    double point = rng.next_double() * total;
    double cumulative = 0.0;
    for (const auto& [label, weight] : weights) {
        cumulative += weight;
        if (point < cumulative) return label;
    }
    return weights.rbegin()->first;
}

Box random_box(int width, int height, int min_size, int max_size, Rng& rng) {
    const int max_w = std::min(max_size, width);
    const int max_h = std::min(max_size, height);
    const int w = min_size + static_cast<int>(rng.bounded(max_w - min_size + 1));
    const int h = min_size + static_cast<int>(rng.bounded(max_h - min_size + 1));
    const int x = static_cast<int>(rng.bounded(width - w + 1));
    const int y = static_cast<int>(rng.bounded(height - h + 1));
    return Box{x, y, w, h};
}

struct PerturbOutcome {
    bool kept = false;
    Box box;
    std::string label;
    double displacement = 0.0;  // summed |edge shift| relative to box perimeter
    bool relabeled = false;
};

// Draw order per box is fixed (miss, 4 edge jitters, confusion) so that
// profiles differing only in magnitudes see the same underlying randomness.
PerturbOutcome perturb_box(const LabeledBox& truth_box, const NoiseProfile& profile,
                           int width, int height, Rng& rng) {
    PerturbOutcome outcome;
    if (rng.next_double() < profile.p_miss) return outcome;

    const Box& b = truth_box.box;
    const double cx = b.x + b.w / 2.0;
    const double cy = b.y + b.h / 2.0;
    double left = cx - b.w * profile.scale_bias / 2.0;
    double right = cx + b.w * profile.scale_bias / 2.0;
    double top = cy - b.h * profile.scale_bias / 2.0;
    double bottom = cy + b.h * profile.scale_bias / 2.0;

    const double dl = rng.next_gaussian() * profile.jitter_sigma;
    const double dt = rng.next_gaussian() * profile.jitter_sigma;
    const double dr = rng.next_gaussian() * profile.jitter_sigma;
    const double db = rng.next_gaussian() * profile.jitter_sigma;
    left += dl;
    top += dt;
    right += dr;
    bottom += db;

    int x1 = static_cast<int>(std::llround(left));
    int y1 = static_cast<int>(std::llround(top));
    int x2 = static_cast<int>(std::llround(right));
    int y2 = static_cast<int>(std::llround(bottom));
    Box jittered{x1, y1, x2 - x1, y2 - y1};
    if (jittered.w < 1 || jittered.h < 1 || !clamp_box(jittered, width, height))
        return outcome;  // collapsed or fully outside: effectively missed

    outcome.kept = true;
    outcome.box = jittered;
    outcome.label = truth_box.label;
    outcome.displacement = (std::abs(dl) + std::abs(dt) + std::abs(dr) + std::abs(db) +
                            std::abs(profile.scale_bias - 1.0) * (b.w + b.h)) /
                           static_cast<double>(b.w + b.h);

    auto row = profile.confusion.find(truth_box.label);
    if (row != profile.confusion.end()) {
        outcome.label = draw_label(row->second, 1.0, rng);
        outcome.relabeled = outcome.label != truth_box.label;
    }
    return outcome;
}

AnnotationSet simulate(const AnnotationSet& truth, const NoiseProfile& profile,
                       const std::string& annotator_id, Tier tier, bool with_scores,
                       uint64_t seed) {
    profile.check(truth.labels);

    AnnotationSet out;
    out.images = truth.images;
    out.labels = truth.labels;
    out.annotators = {{annotator_id, tier}};

    double mix_total = 0.0;
    std::map<std::string, double> uniform_mix;
    for (const auto& label : truth.labels) {
        uniform_mix[label] = 1.0;
        mix_total += 1.0;
    }

    for (size_t i = 0; i < truth.images.size(); ++i) {
        const ImageRef& image = truth.images[i];
        Rng rng(mix_seed(seed, i));
        size_t boxes_before = out.boxes.size();

        for (const auto& truth_box : truth.boxes) {
            if (truth_box.image_id != image.id) continue;
            PerturbOutcome outcome =
                perturb_box(truth_box, profile, image.width, image.height, rng);
            if (!outcome.kept) continue;
            LabeledBox box;
            box.image_id = image.id;
            box.annotator_id = annotator_id;
            box.label = outcome.label;
            box.box = outcome.box;
            if (with_scores) {
                double score = 0.98 - 1.5 * outcome.displacement -
                               (outcome.relabeled ? 0.3 : 0.0);
                box.score = std::clamp(score, 0.01, 0.98);
            }
            out.boxes.push_back(std::move(box));
        }

        const uint64_t spurious = rng.next_poisson(profile.p_spurious);
        for (uint64_t s = 0; s < spurious; ++s) {
            const int min_size = std::min({profile.spurious_min_size, image.width,
                                           image.height});
            LabeledBox box;
            box.image_id = image.id;
            box.annotator_id = annotator_id;
            box.box = random_box(image.width, image.height, min_size,
                                 profile.spurious_max_size, rng);
            box.label = draw_label(uniform_mix, mix_total, rng);
            if (with_scores) box.score = 0.05 + 0.4 * rng.next_double();
            out.boxes.push_back(std::move(box));
        }

        // The annotator processed the image either way.
        if (out.boxes.size() == boxes_before)
            out.empty_annotations.push_back({image.id, annotator_id});
    }
    return out;
}

}  // namespace

AnnotationSet generate_truth(const SceneSpec& spec) {
    spec.check();

    AnnotationSet set;
    for (const auto& [label, weight] : spec.class_mix) set.labels.push_back(label);
    set.annotators = {{"truth", Tier::Professional}};

    double mix_total = 0.0;
    for (const auto& [label, weight] : spec.class_mix) mix_total += weight;

    for (size_t i = 0; i < spec.image_count; ++i) {
        ImageRef image{image_name(i), spec.width, spec.height, "synthetic"};
        set.images.push_back(image);
        Rng rng(mix_seed(spec.seed, i));
        const size_t count =
            spec.objects_min + rng.bounded(spec.objects_max - spec.objects_min + 1);
        for (size_t k = 0; k < count; ++k) {
            LabeledBox box;
            box.image_id = image.id;
            box.annotator_id = "truth";
            box.box = random_box(spec.width, spec.height, spec.box_min_size,
                                 spec.box_max_size, rng);
            box.label = draw_label(spec.class_mix, mix_total, rng);
            set.boxes.push_back(std::move(box));
        }
        if (count == 0) set.empty_annotations.push_back({image.id, "truth"});
    }
    return set;
}

AnnotationSet simulate_annotator(const AnnotationSet& truth, const NoiseProfile& profile,
                                 const std::string& annotator_id, uint64_t seed) {
    return simulate(truth, profile, annotator_id, Tier::Professional, false, seed);
}

AnnotationSet simulate_detector(const AnnotationSet& truth, const NoiseProfile& profile,
                                uint64_t seed) {
    return simulate(truth, profile, "detector", Tier::Model, true, seed);
}

AnnotationSet merge_annotation_sets(const AnnotationSet& base, const AnnotationSet& extra) {
    if (base.labels != extra.labels)
        raise(ErrorKind::Config, "cannot merge annotation sets with different vocabularies");
    AnnotationSet out = base;
    for (const auto& image : extra.images) {
        const ImageRef* existing = out.find_image(image.id);
        if (!existing) {
            out.images.push_back(image);
        } else if (existing->width != image.width || existing->height != image.height) {
            raise(ErrorKind::Config,
                  "image '" + image.id + "' has conflicting dimensions across sets");
        }
    }
    for (const auto& annotator : extra.annotators) {
        if (out.find_annotator(annotator.id))
            raise(ErrorKind::Config,
                  "annotator '" + annotator.id + "' exists in both sets");
        out.annotators.push_back(annotator);
    }
    out.boxes.insert(out.boxes.end(), extra.boxes.begin(), extra.boxes.end());
    out.empty_annotations.insert(out.empty_annotations.end(),
                                 extra.empty_annotations.begin(),
                                 extra.empty_annotations.end());
    return out;
}

NoiseProfile parse_noise_profile(const std::string& payload) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorKind::Parse, std::string("invalid noise profile JSON: ") + e.what());
    }
    NoiseProfile profile;
    profile.p_miss = doc.value("p_miss", 0.0);
    profile.jitter_sigma = doc.value("jitter_sigma", 0.0);
    profile.scale_bias = doc.value("scale_bias", 1.0);
    profile.p_spurious = doc.value("p_spurious", 0.0);
    profile.spurious_min_size = doc.value("spurious_min_size", 8);
    profile.spurious_max_size = doc.value("spurious_max_size", 48);
    if (doc.contains("confusion"))
        for (const auto& [from, row] : doc["confusion"].items())
            for (const auto& [to, p] : row.items())
                profile.confusion[from][to] = p.get<double>();
    return profile;
}

SceneSpec parse_scene_spec(const std::string& payload) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorKind::Parse, std::string("invalid scene spec JSON: ") + e.what());
    }
    SceneSpec spec;
    spec.width = doc.value("width", 640);
    spec.height = doc.value("height", 480);
    spec.image_count = doc.value("image_count", size_t{10});
    spec.objects_min = doc.value("objects_min", size_t{3});
    spec.objects_max = doc.value("objects_max", size_t{8});
    spec.box_min_size = doc.value("box_min_size", 12);
    spec.box_max_size = doc.value("box_max_size", 96);
    spec.seed = doc.value("seed", uint64_t{0});
    if (doc.contains("class_mix"))
        for (const auto& [label, weight] : doc["class_mix"].items())
            spec.class_mix[label] = weight.get<double>();
    return spec;
}

}  // namespace annoqa
