#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "annoqa/curation.hpp"
#include "annoqa/datamodel.hpp"
#include "annoqa/error.hpp"
#include "annoqa/pipeline.hpp"
#include "annoqa/synth.hpp"

using namespace annoqa;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& leaf = "") const {
        return leaf.empty() ? path.string() : (path / leaf).string();
    }
};

// Four simulated annotators over a small synthetic scene plus a detector.
void write_corpus(const TempDir& dir) {
    SceneSpec spec;
    spec.width = 160;
    spec.height = 120;
    spec.image_count = 4;
    spec.objects_min = 3;
    spec.objects_max = 5;
    spec.class_mix = {{"person", 0.6}, {"vehicle", 0.4}};
    spec.box_min_size = 10;
    spec.box_max_size = 40;
    spec.seed = 17;
    AnnotationSet truth = generate_truth(spec);

    AnnotationSet corpus = truth;
    corpus.annotators.clear();
    corpus.boxes.clear();
    corpus.empty_annotations.clear();
    NoiseProfile profile;
    profile.jitter_sigma = 2.0;
    for (int a = 1; a <= 4; ++a)
        corpus = merge_annotation_sets(
            corpus, simulate_annotator(truth, profile, "a" + std::to_string(a), 30 + a));
    write_file(dir.str("annotations.json"), serialize_annotation_set(corpus));

    NoiseProfile detector_noise;
    detector_noise.jitter_sigma = 3.0;
    detector_noise.p_miss = 0.1;
    AnnotationSet preds = simulate_detector(truth, detector_noise, 77);
    write_file(dir.str("predictions.json"), serialize_annotation_set(preds));
}

RunConfig base_config(const TempDir& dir, const std::string& out) {
    RunConfig config;
    config.annotations_path = dir.str("annotations.json");
    config.seed = 2718;
    config.seed_set = true;
    config.drop_fraction = 0.2;
    config.out_dir = dir.str(out);
    return config;
}

std::string slurp(const std::string& path) { return read_file(path); }

}  // namespace

TEST_CASE("the full pipeline writes one report per stage and succeeds") {
    TempDir dir("annoqa_pipeline_full");
    write_corpus(dir);
    RunConfig config = base_config(dir, "out");
    config.predictions_path = dir.str("predictions.json");
    config.gt_recipes = {GtRecipe::MixedTop, GtRecipe::SingleTop};

    ReportBundle bundle = run_pipeline(config);
    REQUIRE_FALSE(bundle.failed_stage.has_value());
    CHECK(bundle.exit_code == 0);
    for (const char* name :
         {"validation.json", "agreement.json", "vitality.json", "difficulty.json",
          "gt_mixed_top.json", "gt_single_top.json", "eval_mixed_top.json",
          "eval_single_top.json", "summary.txt", "run_manifest.json"})
        CHECK(fs::exists(dir.path / "out" / name));
    CHECK(bundle.stages_completed.back() == "summary");
    CHECK(bundle.summary.find("mean alpha") != std::string::npos);
}

TEST_CASE("identical configs produce byte-identical reports") {
    TempDir dir("annoqa_pipeline_determinism");
    write_corpus(dir);
    RunConfig first = base_config(dir, "out1");
    first.predictions_path = dir.str("predictions.json");
    first.gt_recipes = {GtRecipe::MixedTop};
    RunConfig second = first;
    second.out_dir = dir.str("out2");

    ReportBundle b1 = run_pipeline(first);
    ReportBundle b2 = run_pipeline(second);
    REQUIRE_FALSE(b1.failed_stage.has_value());
    REQUIRE_FALSE(b2.failed_stage.has_value());
    REQUIRE(b1.files_written.size() == b2.files_written.size());
    for (size_t i = 0; i < b1.files_written.size(); ++i)
        CHECK(slurp(b1.files_written[i]) == slurp(b2.files_written[i]));
}

TEST_CASE("a curation failure keeps earlier reports and tags the manifest") {
    TempDir dir("annoqa_pipeline_failure");
    write_corpus(dir);

    // Punch a coverage hole: an extra image only annotator a1 processed, then
    // demand gt2 from the explicit top {a2, a3, a4}.
    ParseResult parsed = parse_annotation_set(slurp(dir.str("annotations.json")),
                                              PayloadFormat::CanonicalJson);
    AnnotationSet holed = std::move(parsed.set);
    holed.images.push_back({"extra", 160, 120, ""});
    holed.boxes.push_back({"extra", "a1", "person", {2, 2, 12, 12}, std::nullopt});
    write_file(dir.str("holed.json"), serialize_annotation_set(holed));

    RunConfig config = base_config(dir, "out");
    config.annotations_path = dir.str("holed.json");
    config.predictions_path = dir.str("predictions.json");
    config.gt_recipes = {GtRecipe::SingleTop};
    config.top_policy.explicit_ids = {"a2", "a3", "a4"};

    ReportBundle bundle = run_pipeline(config);
    REQUIRE(bundle.failed_stage.has_value());
    CHECK(*bundle.failed_stage == "curate");
    CHECK(bundle.exit_code == 3);
    CHECK(fs::exists(dir.path / "out" / "agreement.json"));
    CHECK(fs::exists(dir.path / "out" / "vitality.json"));
    CHECK_FALSE(fs::exists(dir.path / "out" / "gt_single_top.json"));

    const std::string manifest = slurp(dir.str("out/run_manifest.json"));
    CHECK(manifest.find("\"failed_stage\": \"curate\"") != std::string::npos);
}

TEST_CASE("a missing seed is a configuration error with exit code 5") {
    TempDir dir("annoqa_pipeline_noseed");
    write_corpus(dir);
    RunConfig config = base_config(dir, "out");
    config.seed_set = false;
    ReportBundle bundle = run_pipeline(config);
    REQUIRE(bundle.failed_stage.has_value());
    CHECK(bundle.exit_code == 5);
}

TEST_CASE("stage failures map to the documented exit codes") {
    TempDir dir("annoqa_pipeline_codes");
    write_corpus(dir);

    SUBCASE("malformed input: exit 1 in the parse stage") {
        write_file(dir.str("broken.json"), "{nope");
        RunConfig config = base_config(dir, "out");
        config.annotations_path = dir.str("broken.json");
        ReportBundle bundle = run_pipeline(config);
        CHECK(bundle.exit_code == 1);
        CHECK(bundle.failed_stage.value_or("") == "parse");
    }

    SUBCASE("two annotators cannot run vitality: exit 2") {
        ParseResult parsed = parse_annotation_set(slurp(dir.str("annotations.json")),
                                                  PayloadFormat::CanonicalJson);
        AnnotationSet two = drop_annotator(drop_annotator(parsed.set, "a4"), "a3");
        write_file(dir.str("two.json"), serialize_annotation_set(two));
        RunConfig config = base_config(dir, "out");
        config.annotations_path = dir.str("two.json");
        ReportBundle bundle = run_pipeline(config);
        CHECK(bundle.exit_code == 2);
        CHECK(bundle.failed_stage.value_or("") == "vitality");
        CHECK(fs::exists(dir.path / "out" / "agreement.json"));  // earlier stage intact
    }

    SUBCASE("predictions on foreign images: exit 4 in the eval stage") {
        SceneSpec other;
        other.image_count = 2;
        other.class_mix = {{"person", 1.0}};
        other.seed = 5;
        AnnotationSet foreign = generate_truth(other);
        for (auto& image : foreign.images) image.id = "foreign_" + image.id;
        for (auto& box : foreign.boxes) box.image_id = "foreign_" + box.image_id;
        for (auto& e : foreign.empty_annotations) e.image_id = "foreign_" + e.image_id;
        NoiseProfile quiet;
        AnnotationSet preds = simulate_detector(foreign, quiet, 6);
        write_file(dir.str("foreign_preds.json"), serialize_annotation_set(preds));

        RunConfig config = base_config(dir, "out");
        config.predictions_path = dir.str("foreign_preds.json");
        config.gt_recipes = {GtRecipe::MixedTop};
        ReportBundle bundle = run_pipeline(config);
        CHECK(bundle.exit_code == 4);
        CHECK(bundle.failed_stage.value_or("") == "eval");
    }
}

TEST_CASE("csv format emits csv reports") {
    TempDir dir("annoqa_pipeline_csv");
    write_corpus(dir);
    RunConfig config = base_config(dir, "out");
    config.format = ReportFormat::Csv;
    ReportBundle bundle = run_pipeline(config);
    REQUIRE_FALSE(bundle.failed_stage.has_value());
    CHECK(fs::exists(dir.path / "out" / "agreement.csv"));
    const std::string csv = slurp(dir.str("out/agreement.csv"));
    CHECK(csv.rfind("image_id,alpha,units,raters,degenerate", 0) == 0);
}
