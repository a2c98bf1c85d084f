#include <cmath>

#include "doctest.h"

#include "annoqa/agreement.hpp"
#include "annoqa/curation.hpp"
#include "annoqa/detect_eval.hpp"
#include "annoqa/error.hpp"
#include "annoqa/synth.hpp"

using namespace annoqa;

namespace {

SceneSpec small_scene() {
    SceneSpec spec;
    spec.width = 200;
    spec.height = 150;
    spec.image_count = 10;
    spec.objects_min = 5;
    spec.objects_max = 5;
    spec.class_mix = {{"person", 0.5}, {"vehicle", 0.3}, {"bicycle", 0.2}};
    spec.box_min_size = 10;
    spec.box_max_size = 40;
    spec.seed = 42;
    return spec;
}

GroundTruthSet as_gt(const AnnotationSet& truth) {
    GroundTruthSet gt;
    gt.base = truth;
    for (const auto& image : truth.images) gt.provenance[image.id] = "truth";
    return gt;
}

}  // namespace

TEST_CASE("generate_truth produces the requested object counts") {
    AnnotationSet truth = generate_truth(small_scene());
    CHECK(truth.images.size() == 10);
    CHECK(truth.boxes.size() == 50);
    for (const auto& box : truth.boxes) {
        CHECK(box.annotator_id == "truth");
        CHECK(box.box.x >= 0);
        CHECK(box.box.y >= 0);
        CHECK(box.box.x + box.box.w <= 200);
        CHECK(box.box.y + box.box.h <= 150);
        CHECK(box.box.w >= 10);
        CHECK(box.box.h >= 10);
    }
}

TEST_CASE("generation is deterministic per seed") {
    AnnotationSet a = generate_truth(small_scene());
    AnnotationSet b = generate_truth(small_scene());
    CHECK(a == b);
    SceneSpec other = small_scene();
    other.seed = 43;
    CHECK_FALSE(generate_truth(other) == a);
}

TEST_CASE("a single-class mix labels everything with that class") {
    SceneSpec spec = small_scene();
    spec.class_mix = {{"person", 1.0}};
    for (const auto& box : generate_truth(spec).boxes) CHECK(box.label == "person");
}

TEST_CASE("an unsatisfiable scene is a configuration error") {
    SceneSpec spec = small_scene();
    spec.box_min_size = 500;
    CHECK_THROWS_AS(generate_truth(spec), Error);
    SceneSpec empty = small_scene();
    empty.class_mix.clear();
    CHECK_THROWS_AS(generate_truth(empty), Error);
}

TEST_CASE("a zero-noise profile reproduces the truth under a new name") {
    AnnotationSet truth = generate_truth(small_scene());
    AnnotationSet copy = simulate_annotator(truth, NoiseProfile{}, "clone", 7);
    REQUIRE(copy.boxes.size() == truth.boxes.size());
    for (size_t i = 0; i < truth.boxes.size(); ++i) {
        CHECK(copy.boxes[i].box == truth.boxes[i].box);
        CHECK(copy.boxes[i].label == truth.boxes[i].label);
        CHECK(copy.boxes[i].annotator_id == "clone");
    }
}

TEST_CASE("p_miss 1 leaves only spurious boxes") {
    AnnotationSet truth = generate_truth(small_scene());
    NoiseProfile all_miss;
    all_miss.p_miss = 1.0;
    AnnotationSet nothing = simulate_annotator(truth, all_miss, "blind", 7);
    CHECK(nothing.boxes.empty());
    CHECK(nothing.empty_annotations.size() == truth.images.size());  // still processed

    all_miss.p_spurious = 2.0;
    AnnotationSet spurious = simulate_annotator(truth, all_miss, "blind", 7);
    CHECK_FALSE(spurious.boxes.empty());
}

TEST_CASE("simulation is deterministic and seed-sensitive") {
    AnnotationSet truth = generate_truth(small_scene());
    NoiseProfile profile;
    profile.p_miss = 0.2;
    profile.jitter_sigma = 3.0;
    profile.p_spurious = 0.5;
    CHECK(simulate_annotator(truth, profile, "n", 5) ==
          simulate_annotator(truth, profile, "n", 5));
    CHECK_FALSE(simulate_annotator(truth, profile, "n", 5) ==
                simulate_annotator(truth, profile, "n", 6));
}

TEST_CASE("a bad confusion matrix is rejected") {
    AnnotationSet truth = generate_truth(small_scene());
    NoiseProfile profile;
    profile.confusion["person"] = {{"person", 0.5}, {"vehicle", 0.4}};  // sums to 0.9
    CHECK_THROWS_AS(simulate_annotator(truth, profile, "x", 1), Error);
    NoiseProfile unknown;
    unknown.confusion["cart"] = {{"cart", 1.0}};
    CHECK_THROWS_AS(simulate_annotator(truth, unknown, "x", 1), Error);
}

TEST_CASE("heavier jitter lowers agreement against the truth") {
    SceneSpec spec = small_scene();
    spec.image_count = 4;
    AnnotationSet truth = generate_truth(spec);

    auto mean_alpha_vs_truth = [&](double sigma, uint64_t seed) {
        NoiseProfile profile;
        profile.jitter_sigma = sigma;
        AnnotationSet noisy = simulate_annotator(truth, profile, "noisy", seed);
        AnnotationSet corpus = merge_annotation_sets(truth, noisy);
        AgreementConfig config;
        config.seed = seed;
        config.drop_fraction = 0.2;
        return aggregate_alpha(alpha_per_image(corpus, config)).mean;
    };

    double mild_total = 0.0, heavy_total = 0.0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        mild_total += mean_alpha_vs_truth(2.0, seed);
        heavy_total += mean_alpha_vs_truth(20.0, seed);
    }
    CHECK(mild_total > heavy_total);
}

TEST_CASE("a higher miss rate lowers agreement against the truth") {
    SceneSpec spec = small_scene();
    spec.image_count = 4;
    AnnotationSet truth = generate_truth(spec);

    auto mean_alpha_at_miss = [&](double p_miss, uint64_t seed) {
        NoiseProfile profile;
        profile.p_miss = p_miss;
        AnnotationSet noisy = simulate_annotator(truth, profile, "noisy", seed);
        AnnotationSet corpus = merge_annotation_sets(truth, noisy);
        AgreementConfig config;
        config.seed = seed;
        config.drop_fraction = 0.2;
        return aggregate_alpha(alpha_per_image(corpus, config)).mean;
    };

    double low_total = 0.0, high_total = 0.0;
    for (uint64_t seed = 100; seed < 120; ++seed) {
        low_total += mean_alpha_at_miss(0.05, seed);
        high_total += mean_alpha_at_miss(0.5, seed);
    }
    CHECK(low_total > high_total);
}

TEST_CASE("a zero-noise detector scores perfectly against the truth") {
    AnnotationSet truth = generate_truth(small_scene());
    AnnotationSet preds = simulate_detector(truth, NoiseProfile{}, 3);
    for (const auto& box : preds.boxes) REQUIRE(box.score.has_value());
    EvalReport report = evaluate(preds.boxes, as_gt(truth), EvalConfig{});
    CHECK(report.overall.precision == 1.0);
    CHECK(report.overall.recall == 1.0);
    CHECK(report.overall.f1 == 1.0);
}

TEST_CASE("recall tracks the miss rate") {
    SceneSpec spec = small_scene();
    spec.image_count = 5;
    AnnotationSet truth = generate_truth(spec);
    NoiseProfile profile;
    profile.p_miss = 0.4;

    uint64_t tp = 0, fn = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        AnnotationSet preds = simulate_detector(truth, profile, seed);
        EvalReport report = evaluate(preds.boxes, as_gt(truth), EvalConfig{});
        tp += report.overall.tp;
        fn += report.overall.fn;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    CHECK(recall == doctest::Approx(0.6).epsilon(0.05 / 0.6));
}

TEST_CASE("label confusion shows up as misclassifications at the expected rate") {
    SceneSpec spec = small_scene();
    spec.image_count = 5;
    spec.class_mix = {{"person", 0.5}, {"bicycle", 0.5}};
    AnnotationSet truth = generate_truth(spec);

    NoiseProfile profile;
    profile.confusion["person"] = {{"person", 0.7}, {"bicycle", 0.3}};
    profile.confusion["bicycle"] = {{"bicycle", 0.7}, {"person", 0.3}};

    uint64_t misclassified = 0, total = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        AnnotationSet preds = simulate_detector(truth, profile, seed);
        EvalReport report = evaluate(preds.boxes, as_gt(truth), EvalConfig{});
        misclassified += report.overall.misclassified;
        total += preds.boxes.size();
    }
    const double rate = static_cast<double>(misclassified) / static_cast<double>(total);
    CHECK(rate == doctest::Approx(0.3).epsilon(0.15));
}

TEST_CASE("merging rejects vocabulary or annotator collisions") {
    AnnotationSet truth = generate_truth(small_scene());
    AnnotationSet other = truth;
    other.labels = {"person"};
    CHECK_THROWS_AS(merge_annotation_sets(truth, other), Error);
    CHECK_THROWS_AS(merge_annotation_sets(truth, truth), Error);  // duplicate "truth"
}

TEST_CASE("profile and scene specs parse from JSON") {
    NoiseProfile profile = parse_noise_profile(R"({
      "p_miss": 0.1, "jitter_sigma": 2.5, "scale_bias": 0.9,
      "confusion": {"person": {"person": 0.8, "bicycle": 0.2}},
      "p_spurious": 0.7
    })");
    CHECK(profile.p_miss == doctest::Approx(0.1));
    CHECK(profile.scale_bias == doctest::Approx(0.9));
    CHECK(profile.confusion.at("person").at("bicycle") == doctest::Approx(0.2));

    SceneSpec spec = parse_scene_spec(R"({
      "width": 320, "height": 240, "image_count": 3,
      "objects_min": 1, "objects_max": 4,
      "class_mix": {"person": 1.0}, "box_min_size": 8, "box_max_size": 32
    })");
    CHECK(spec.width == 320);
    CHECK(spec.image_count == 3);
    CHECK(spec.class_mix.at("person") == doctest::Approx(1.0));
}
