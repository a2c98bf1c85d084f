#include "annoqa/agreement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "annoqa/error.hpp"
#include "annoqa/rng.hpp"
#include "image_work.hpp"

namespace annoqa {

const char* band_name(AgreementBand band) {
    switch (band) {
        case AgreementBand::VeryGood: return "very_good";
        case AgreementBand::Good: return "good";
        case AgreementBand::BelowGood: return "below_good";
    }
    return "below_good";
}

AgreementBand classify_alpha(double alpha) {
    if (alpha >= 0.8) return AgreementBand::VeryGood;
    if (alpha >= 0.67) return AgreementBand::Good;
    return AgreementBand::BelowGood;
}

uint64_t image_drop_seed(uint64_t config_seed, const std::string& image_id) {
    return mix_seed(config_seed, fnv1a64(image_id));
}

CategoricalObservations CategoricalObservations::from_matrix(const ObservationMatrix& matrix) {
    CategoricalObservations obs;
    obs.category_count = 2;  // 0 = labeled, 1 = unlabeled
    obs.rater_count = matrix.rater_count();
    auto units = matrix.retained_unit_ids();
    obs.values.reserve(units.size() * obs.rater_count);
    for (uint64_t unit : units) {
        for (size_t rater = 0; rater < obs.rater_count; ++rater) {
            switch (matrix.value_at(unit, rater)) {
                case Observation::Labeled: obs.values.push_back(0); break;
                case Observation::Unlabeled: obs.values.push_back(1); break;
                case Observation::Missing: obs.values.push_back(-1); break;
            }
        }
    }
    return obs;
}

namespace {

void finalize_marginals(CoincidenceMatrix& cm) {
    const size_t x = cm.categories.size();
    cm.n_x.assign(x, 0.0);
    for (size_t a = 0; a < x; ++a)
        for (size_t b = 0; b < x; ++b) cm.n_x[a] += cm.o[a * x + b];
    cm.n = 0.0;
    for (double v : cm.n_x) cm.n += v;
}

std::vector<size_t> active_raters(const ObservationMatrix& matrix,
                                  const std::set<size_t>& exclude) {
    std::vector<size_t> active;
    for (size_t r = 0; r < matrix.rater_count(); ++r)
        if (matrix.participating[r] && !exclude.count(r)) active.push_back(r);
    return active;
}

}  // namespace

CoincidenceMatrix accumulate_coincidence(const CategoricalObservations& obs) {
    const size_t x = obs.category_count;
    CoincidenceMatrix cm;
    cm.categories.reserve(x);
    for (size_t c = 0; c < x; ++c) cm.categories.push_back(std::to_string(c));
    cm.o.assign(x * x, 0.0);
    cm.rater_count = obs.rater_count;

    std::vector<uint32_t> counts(x);
    const size_t units = obs.unit_count();
    for (size_t u = 0; u < units; ++u) {
        std::fill(counts.begin(), counts.end(), 0);
        size_t m = 0;
        for (size_t r = 0; r < obs.rater_count; ++r) {
            int8_t v = obs.at(u, r);
            if (v < 0) continue;
            ++counts[static_cast<size_t>(v)];
            ++m;
        }
        if (m < 2) {
            ++cm.skipped_units;
            continue;
        }
        ++cm.pairable_units;
        const double weight = 1.0 / static_cast<double>(m - 1);
        for (size_t a = 0; a < x; ++a) {
            if (!counts[a]) continue;
            for (size_t b = 0; b < x; ++b) {
                if (!counts[b]) continue;
                double pairs = static_cast<double>(counts[a]) *
                               (a == b ? counts[b] - 1 : counts[b]);
                cm.o[a * x + b] += pairs * weight;
            }
        }
    }
    if (cm.pairable_units == 0)
        raise(ErrorKind::InsufficientData, "no unit has two or more values");
    finalize_marginals(cm);
    return cm;
}

// Word-level kernel: every participating rater holds a value at every
// retained unit, so m is constant and the coincidence weights reduce to
// three popcount totals (labeled per rater, both-labeled per pair, and the
// retained-unit count).
CoincidenceMatrix accumulate_coincidence(const ObservationMatrix& matrix,
                                         const std::set<size_t>& exclude) {
    const auto active = active_raters(matrix, exclude);
    const size_t r_count = active.size();
    if (r_count < 2)
        raise(ErrorKind::InsufficientData,
              "need at least 2 participating raters, have " + std::to_string(r_count));

    const uint64_t retained = matrix.retained_units();
    if (retained == 0)
        raise(ErrorKind::InsufficientData, "no retained units in the channel view");

    const size_t word_begin = matrix.view_word_begin();
    const size_t word_end = matrix.view_word_end();
    const uint64_t* mask = matrix.storage->mask.data();
    std::vector<const uint64_t*> planes(r_count);
    for (size_t i = 0; i < r_count; ++i)
        planes[i] = matrix.storage->planes[active[i]].data();

    uint64_t sum_both = 0;                       // sum over pairs of both-labeled units
    std::vector<uint64_t> labeled(r_count, 0);   // per-rater labeled units

#pragma omp parallel
    {
        uint64_t local_both = 0;
        std::vector<uint64_t> local_labeled(r_count, 0);
        std::vector<uint64_t> vals(r_count);
#pragma omp for schedule(static) nowait
        for (ptrdiff_t w = static_cast<ptrdiff_t>(word_begin);
             w < static_cast<ptrdiff_t>(word_end); ++w) {
            const uint64_t m = mask[w];
            if (!m) continue;
            for (size_t i = 0; i < r_count; ++i) {
                vals[i] = planes[i][w] & m;
                local_labeled[i] += std::popcount(vals[i]);
            }
            for (size_t i = 0; i + 1 < r_count; ++i)
                for (size_t j = i + 1; j < r_count; ++j)
                    local_both += std::popcount(vals[i] & vals[j]);
        }
#pragma omp critical
        {
            sum_both += local_both;
            for (size_t i = 0; i < r_count; ++i) labeled[i] += local_labeled[i];
        }
    }

    uint64_t sum_labeled = 0;
    for (uint64_t l : labeled) sum_labeled += l;

    const uint64_t m_minus_1 = r_count - 1;
    // Ordered pair tallies per category combination; all integers.
    const uint64_t both_ordered = 2 * sum_both;
    const uint64_t mixed_ordered = m_minus_1 * sum_labeled - 2 * sum_both;
    const uint64_t neither_ordered =
        retained * r_count * m_minus_1 - 2 * m_minus_1 * sum_labeled + 2 * sum_both;

    CoincidenceMatrix cm;
    cm.categories = {"labeled", "unlabeled"};
    const double w = 1.0 / static_cast<double>(m_minus_1);
    cm.o = {static_cast<double>(both_ordered) * w, static_cast<double>(mixed_ordered) * w,
            static_cast<double>(mixed_ordered) * w, static_cast<double>(neither_ordered) * w};
    cm.pairable_units = retained;
    cm.skipped_units = 0;
    cm.rater_count = r_count;
    finalize_marginals(cm);
    return cm;
}

CoincidenceMatrix accumulate_coincidence_serial(const ObservationMatrix& matrix,
                                                const std::set<size_t>& exclude) {
    const auto active = active_raters(matrix, exclude);
    if (active.size() < 2)
        raise(ErrorKind::InsufficientData, "need at least 2 participating raters");

    CoincidenceMatrix cm;
    cm.categories = {"labeled", "unlabeled"};
    cm.o.assign(4, 0.0);
    cm.rater_count = active.size();
    const double w = 1.0 / static_cast<double>(active.size() - 1);
    for (uint64_t unit : matrix.retained_unit_ids()) {
        ++cm.pairable_units;
        for (size_t i : active) {
            for (size_t j : active) {
                if (i == j) continue;
                size_t a = matrix.value_at(unit, i) == Observation::Labeled ? 0 : 1;
                size_t b = matrix.value_at(unit, j) == Observation::Labeled ? 0 : 1;
                cm.o[a * 2 + b] += w;
            }
        }
    }
    if (cm.pairable_units == 0)
        raise(ErrorKind::InsufficientData, "no retained units in the channel view");
    finalize_marginals(cm);
    return cm;
}

AlphaResult alpha_from_coincidence(const CoincidenceMatrix& cm) {
    if (cm.n < 2.0)
        raise(ErrorKind::InsufficientData,
              "need at least 2 pairable values to compute alpha");
    const size_t x = cm.categories.size();
    double d_o = 0.0;
    for (size_t a = 0; a < x; ++a)
        for (size_t b = 0; b < x; ++b)
            if (a != b) d_o += cm.o[a * x + b];
    double expected_pairs = 0.0;
    for (size_t a = 0; a < x; ++a)
        for (size_t b = 0; b < x; ++b)
            if (a != b) expected_pairs += cm.n_x[a] * cm.n_x[b];
    const double d_e = expected_pairs / (cm.n - 1.0);

    AlphaResult result;
    result.d_o = d_o;
    result.d_e = d_e;
    result.unit_count = cm.pairable_units;
    result.rater_count = cm.rater_count;
    if (d_e == 0.0) {
        // Every pairable value identical: zero observed and zero expected
        // disagreement is reported as full consensus.
        result.alpha = 1.0;
        result.degenerate = true;
    } else {
        result.alpha = 1.0 - d_o / d_e;
    }
    return result;
}

AlphaResult alpha(const ObservationMatrix& matrix, const std::set<size_t>& exclude) {
    return alpha_from_coincidence(accumulate_coincidence(matrix, exclude));
}

AlphaResult brute_force_alpha(const CategoricalObservations& obs) {
    const size_t units = obs.unit_count();
    double d_o = 0.0;
    std::vector<uint64_t> pooled(obs.category_count, 0);
    uint64_t n = 0;
    uint64_t pairable = 0;
    std::vector<int8_t> vals;
    for (size_t u = 0; u < units; ++u) {
        vals.clear();
        for (size_t r = 0; r < obs.rater_count; ++r) {
            int8_t v = obs.at(u, r);
            if (v >= 0) vals.push_back(v);
        }
        if (vals.size() < 2) continue;
        ++pairable;
        const double weight = 1.0 / static_cast<double>(vals.size() - 1);
        for (size_t i = 0; i < vals.size(); ++i)
            for (size_t j = 0; j < vals.size(); ++j)
                if (i != j && vals[i] != vals[j]) d_o += weight;
        for (int8_t v : vals) ++pooled[static_cast<size_t>(v)];
        n += vals.size();
    }
    if (n < 2)
        raise(ErrorKind::InsufficientData, "no unit has two or more values");

    double expected_pairs = 0.0;
    for (size_t a = 0; a < obs.category_count; ++a)
        for (size_t b = 0; b < obs.category_count; ++b)
            if (a != b)
                expected_pairs +=
                    static_cast<double>(pooled[a]) * static_cast<double>(pooled[b]);
    const double d_e = expected_pairs / static_cast<double>(n - 1);

    AlphaResult result;
    result.d_o = d_o;
    result.d_e = d_e;
    result.unit_count = pairable;
    result.rater_count = obs.rater_count;
    if (d_e == 0.0) {
        result.alpha = 1.0;
        result.degenerate = true;
    } else {
        result.alpha = 1.0 - d_o / d_e;
    }
    return result;
}

const ImageAlpha* PerImageAlpha::find(const std::string& image_id) const {
    for (const auto& [id, entry] : per_image)
        if (id == image_id) return &entry;
    return nullptr;
}

PerImageAlpha alpha_per_image(const AnnotationSet& set, const AgreementConfig& config) {
    if (set.images.empty())
        raise(ErrorKind::Config, "annotation set contains no images");
    if (config.class_filter && !set.has_label(*config.class_filter))
        raise(ErrorKind::Vocabulary,
              "class '" + *config.class_filter + "' is not in the vocabulary");

    const auto index = detail::build_work_index(set, config.excluded_annotators);
    std::vector<ImageAlpha> slots(index.size());
    std::optional<Error> failure;

#pragma omp parallel for schedule(dynamic)
    for (ptrdiff_t i = 0; i < static_cast<ptrdiff_t>(index.size()); ++i) {
        try {
            std::string skip_reason;
            auto matrix = detail::matrix_for_image(index[i], set, config, &skip_reason);
            if (!matrix) {
                slots[i].skipped = true;
                slots[i].skip_reason = skip_reason;
                continue;
            }
            slots[i].result = alpha(*matrix);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::InsufficientData) {
                slots[i].skipped = true;
                slots[i].skip_reason = e.what();
            } else {
#pragma omp critical
                if (!failure) failure = e;
            }
        }
    }
    if (failure) throw *failure;

    PerImageAlpha results;
    for (size_t i = 0; i < index.size(); ++i)
        results.per_image.emplace_back(index[i].image->id, std::move(slots[i]));
    return results;
}

AlphaAggregate aggregate_alpha(const PerImageAlpha& results) {
    std::vector<double> alphas;
    for (const auto& [id, entry] : results.per_image)
        if (!entry.skipped) alphas.push_back(entry.result.alpha);
    if (alphas.empty())
        raise(ErrorKind::InsufficientData, "every image was skipped");

    AlphaAggregate agg;
    agg.count = alphas.size();
    double sum = 0.0;
    for (double a : alphas) sum += a;
    agg.mean = sum / static_cast<double>(alphas.size());
    std::sort(alphas.begin(), alphas.end());
    const size_t mid = alphas.size() / 2;
    agg.median = alphas.size() % 2 ? alphas[mid] : 0.5 * (alphas[mid - 1] + alphas[mid]);
    return agg;
}

}  // namespace annoqa
