#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "annoqa/datamodel.hpp"
#include "annoqa/raster.hpp"

namespace annoqa {

// Symmetric category-by-category tally of within-unit value pairs, each
// ordered pair from a unit with m pairable values weighted 1/(m-1).
struct CoincidenceMatrix {
    std::vector<std::string> categories;
    std::vector<double> o;       // row-major categories x categories
    std::vector<double> n_x;     // per-category marginals
    double n = 0.0;              // total pairable values
    uint64_t pairable_units = 0;
    uint64_t skipped_units = 0;  // units with fewer than 2 values
    size_t rater_count = 0;

    double at(size_t x, size_t y) const { return o[x * categories.size() + y]; }
};

struct AlphaResult {
    double alpha = 0.0;
    double d_o = 0.0;
    double d_e = 0.0;
    uint64_t unit_count = 0;  // pairable units
    size_t rater_count = 0;
    bool degenerate = false;  // D_e == 0: every pairable value identical
};

enum class AgreementBand { VeryGood, Good, BelowGood };

const char* band_name(AgreementBand band);

// alpha >= 0.8 -> very good, alpha >= 0.67 -> good, otherwise below good.
AgreementBand classify_alpha(double alpha);

// General nominal observations: units x raters category codes, -1 = missing.
// This is the input shape shared by the fast coincidence path and the
// brute-force reference, and what random agreement instances are made of.
struct CategoricalObservations {
    size_t category_count = 0;
    size_t rater_count = 0;
    std::vector<int8_t> values;  // units * raters, row-major per unit

    size_t unit_count() const {
        return rater_count == 0 ? 0 : values.size() / rater_count;
    }
    int8_t at(size_t unit, size_t rater) const {
        return values[unit * rater_count + rater];
    }
    static CategoricalObservations from_matrix(const ObservationMatrix& matrix);
};

CoincidenceMatrix accumulate_coincidence(const CategoricalObservations& obs);

// Bit-packed fast path: per rater-pair AND-popcount over retained words,
// converted to coincidence weights. `exclude` drops raters by index.
CoincidenceMatrix accumulate_coincidence(const ObservationMatrix& matrix,
                                         const std::set<size_t>& exclude = {});

AlphaResult alpha_from_coincidence(const CoincidenceMatrix& cm);

AlphaResult alpha(const ObservationMatrix& matrix, const std::set<size_t>& exclude = {});

// Serial reference: explicit enumeration of every rater pair within every
// unit for D_o and of the pooled value multiset for D_e. No coincidence
// matrix. Kept as the test oracle and benchmark baseline for the fast path.
AlphaResult brute_force_alpha(const CategoricalObservations& obs);

// Serial per-unit counterpart of the word-level kernel, used to check the
// popcount path on pixel matrices.
CoincidenceMatrix accumulate_coincidence_serial(const ObservationMatrix& matrix,
                                                const std::set<size_t>& exclude = {});

struct AgreementConfig {
    uint64_t seed = 0;
    double drop_fraction = 0.2;
    std::optional<std::string> class_filter;
    std::set<std::string> excluded_annotators;
};

struct ImageAlpha {
    AlphaResult result;
    bool skipped = false;        // fewer than 2 participating annotators
    std::string skip_reason;
};

struct PerImageAlpha {
    // Ordered as set.images.
    std::vector<std::pair<std::string, ImageAlpha>> per_image;

    const ImageAlpha* find(const std::string& image_id) const;
};

// Per-image pipeline: rasterize -> observation matrix -> optional class
// restriction -> alpha. Images run in parallel; each image's retained-unit
// subset derives from (config.seed, image id) only.
PerImageAlpha alpha_per_image(const AnnotationSet& set, const AgreementConfig& config);

struct AlphaAggregate {
    double mean = 0.0;
    double median = 0.0;
    size_t count = 0;
};

AlphaAggregate aggregate_alpha(const PerImageAlpha& results);

// Sub-seed for one image's pixel drop.
uint64_t image_drop_seed(uint64_t config_seed, const std::string& image_id);

}  // namespace annoqa
