#include "annoqa/raster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "annoqa/error.hpp"
#include "annoqa/rng.hpp"

namespace annoqa {

RasterStack rasterize(const ImageRef& image, std::span<const LabeledBox> boxes,
                      const std::vector<std::string>& labels,
                      const std::string& annotator_id) {
    RasterStack stack;
    stack.image_id = image.id;
    stack.annotator_id = annotator_id;
    stack.width = image.width;
    stack.height = image.height;
    stack.labels = labels;
    stack.words_per_plane =
        (static_cast<size_t>(image.width) * image.height + 63) / 64;
    stack.bits.assign(labels.size() * stack.words_per_plane, 0);
    stack.labeled_pixel_count.assign(labels.size(), 0);

    for (const auto& labeled : boxes) {
        if (labeled.image_id != image.id)
            raise(ErrorKind::Validation, "box for image '" + labeled.image_id +
                                             "' passed to rasterize of '" + image.id + "'");
        if (!stack.annotator_id.empty() && labeled.annotator_id != stack.annotator_id)
            raise(ErrorKind::Validation, "rasterize expects boxes from a single annotator");
        if (stack.annotator_id.empty()) stack.annotator_id = labeled.annotator_id;

        auto label_it = std::find(labels.begin(), labels.end(), labeled.label);
        if (label_it == labels.end())
            raise(ErrorKind::Vocabulary,
                  "label '" + labeled.label + "' is not in the vocabulary");
        size_t channel = static_cast<size_t>(label_it - labels.begin());

        const Box& b = labeled.box;
        if (b.x < 0 || b.y < 0 || b.x + b.w > image.width || b.y + b.h > image.height)
            raise(ErrorKind::Validation, "out-of-bounds box passed to rasterize");

        uint64_t* plane = stack.bits.data() + channel * stack.words_per_plane;
        for (int row = b.y; row < b.y + b.h; ++row) {
            size_t begin = static_cast<size_t>(row) * image.width + b.x;
            size_t end = begin + b.w;
            // Word-level fill of [begin, end).
            size_t wb = begin >> 6, we = (end - 1) >> 6;
            uint64_t first = ~0ULL << (begin & 63);
            uint64_t last = ~0ULL >> (63 - ((end - 1) & 63));
            if (wb == we) {
                plane[wb] |= first & last;
            } else {
                plane[wb] |= first;
                for (size_t w = wb + 1; w < we; ++w) plane[w] = ~0ULL;
                plane[we] |= last;
            }
        }
    }

    for (size_t c = 0; c < labels.size(); ++c) {
        uint64_t count = 0;
        for (uint64_t w : stack.channel_words(c)) count += std::popcount(w);
        stack.labeled_pixel_count[c] = count;
    }
    return stack;
}

size_t ObservationMatrix::participant_count() const {
    return static_cast<size_t>(
        std::count(participating.begin(), participating.end(), uint8_t{1}));
}

uint64_t ObservationMatrix::retained_units() const {
    uint64_t total = 0;
    for (size_t w = view_word_begin(); w < view_word_end(); ++w)
        total += std::popcount(storage->mask[w]);
    return total;
}

std::vector<uint64_t> ObservationMatrix::retained_unit_ids() const {
    std::vector<uint64_t> ids;
    ids.reserve(retained_units());
    const size_t pixels = pixels_per_channel();
    for (size_t c = channel_begin; c < channel_end; ++c) {
        for (size_t w = 0; w < words_per_plane; ++w) {
            uint64_t bits = storage->mask[c * words_per_plane + w];
            while (bits) {
                int bit = std::countr_zero(bits);
                bits &= bits - 1;
                ids.push_back(static_cast<uint64_t>(c) * pixels + (w << 6) + bit);
            }
        }
    }
    return ids;
}

bool ObservationMatrix::unit_retained(uint64_t unit) const {
    const size_t pixels = pixels_per_channel();
    size_t c = unit / pixels;
    size_t p = unit % pixels;
    if (c < channel_begin || c >= channel_end) return false;
    size_t bit = c * words_per_plane * 64 + p;
    return (storage->mask[bit >> 6] >> (bit & 63)) & 1ULL;
}

Observation ObservationMatrix::value_at(uint64_t unit, size_t rater) const {
    if (!participating[rater]) return Observation::Missing;
    const size_t pixels = pixels_per_channel();
    size_t c = unit / pixels;
    size_t p = unit % pixels;
    size_t bit = c * words_per_plane * 64 + p;
    bool labeled = (storage->planes[rater][bit >> 6] >> (bit & 63)) & 1ULL;
    return labeled ? Observation::Labeled : Observation::Unlabeled;
}

ObservationMatrix build_observation_matrix(std::span<const RaterStacks> raters,
                                           double drop_fraction, uint64_t seed) {
    if (drop_fraction < 0.0 || drop_fraction >= 1.0)
        raise(ErrorKind::Config, "drop_fraction must be in [0, 1)");
    if (raters.empty()) raise(ErrorKind::Config, "no raters given");

    const RasterStack* reference = nullptr;
    for (const auto& rater : raters)
        if (rater.stack) {
            reference = rater.stack;
            break;
        }
    if (!reference)
        raise(ErrorKind::InsufficientData, "no annotator processed the image");

    for (const auto& rater : raters) {
        if (!rater.stack) continue;
        const RasterStack& stack = *rater.stack;
        if (stack.width != reference->width || stack.height != reference->height)
            raise(ErrorKind::Validation, "raster stacks disagree on image dimensions");
        if (stack.labels != reference->labels)
            raise(ErrorKind::Validation, "raster stacks disagree on the vocabulary");
    }

    ObservationMatrix matrix;
    matrix.width = reference->width;
    matrix.height = reference->height;
    matrix.labels = reference->labels;
    matrix.words_per_plane = reference->words_per_plane;
    matrix.seed = seed;
    matrix.drop_fraction = drop_fraction;
    matrix.channel_begin = 0;
    matrix.channel_end = matrix.labels.size();

    auto storage = std::make_shared<ObservationMatrix::Storage>();
    for (const auto& rater : raters) {
        matrix.raters.push_back(rater.annotator_id);
        matrix.participating.push_back(rater.stack ? 1 : 0);
        storage->planes.push_back(rater.stack ? rater.stack->bits
                                              : std::vector<uint64_t>{});
    }

    const size_t pixels = matrix.pixels_per_channel();
    const size_t channels = matrix.labels.size();
    const uint64_t total_units = static_cast<uint64_t>(pixels) * channels;
    if (total_units > UINT32_MAX)
        raise(ErrorKind::Config, "image too large: more than 2^32 pixel-channel units");
    const uint64_t keep =
        static_cast<uint64_t>(std::llround((1.0 - drop_fraction) * total_units));

    storage->mask.assign(channels * matrix.words_per_plane, 0);
    auto set_mask = [&](uint64_t unit) {
        size_t c = unit / pixels;
        size_t bit = c * matrix.words_per_plane * 64 + unit % pixels;
        storage->mask[bit >> 6] |= 1ULL << (bit & 63);
    };

    if (keep >= total_units) {
        for (uint64_t unit = 0; unit < total_units; ++unit) set_mask(unit);
    } else {
        // Partial Fisher-Yates: after k swaps the prefix holds a uniform
        // k-subset of all units.
        std::vector<uint32_t> ids(total_units);
        std::iota(ids.begin(), ids.end(), 0u);
        Rng rng(seed);
        for (uint64_t i = 0; i < keep; ++i) {
            uint64_t j = i + rng.bounded(total_units - i);
            std::swap(ids[i], ids[j]);
        }
        for (uint64_t i = 0; i < keep; ++i) set_mask(ids[i]);
    }

    matrix.storage = std::move(storage);
    return matrix;
}

ObservationMatrix restrict_to_class(const ObservationMatrix& matrix,
                                    const std::string& label) {
    auto it = std::find(matrix.labels.begin(), matrix.labels.end(), label);
    if (it == matrix.labels.end())
        raise(ErrorKind::Vocabulary, "class '" + label + "' is not in the vocabulary");
    size_t channel = static_cast<size_t>(it - matrix.labels.begin());
    if (channel < matrix.channel_begin || channel >= matrix.channel_end)
        raise(ErrorKind::Vocabulary,
              "class '" + label + "' is outside the current channel view");
    ObservationMatrix restricted = matrix;
    restricted.channel_begin = channel;
    restricted.channel_end = channel + 1;
    return restricted;
}

std::string raster_channel_to_pgm(const RasterStack& stack, size_t channel) {
    std::ostringstream out;
    out << "P2\n" << stack.width << " " << stack.height << "\n255\n";
    for (int y = 0; y < stack.height; ++y) {
        for (int x = 0; x < stack.width; ++x) {
            out << (stack.pixel_set(channel, x, y) ? 255 : 0);
            out << (x + 1 == stack.width ? '\n' : ' ');
        }
    }
    return out.str();
}

}  // namespace annoqa
