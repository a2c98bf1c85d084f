#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "annoqa/bitplane.hpp"
#include "annoqa/datamodel.hpp"

namespace annoqa {

// One annotator's boxes on one image as per-class binary pixel channels.
// Channel planes are bit-packed and padded to a word boundary so the
// agreement kernel can mask whole channels by word range.
struct RasterStack {
    std::string image_id;
    std::string annotator_id;
    int width = 0;
    int height = 0;
    std::vector<std::string> labels;
    size_t words_per_plane = 0;
    std::vector<uint64_t> bits;  // labels.size() * words_per_plane
    std::vector<uint64_t> labeled_pixel_count;  // per channel

    size_t channel_count() const { return labels.size(); }
    std::span<const uint64_t> channel_words(size_t channel) const {
        return {bits.data() + channel * words_per_plane, words_per_plane};
    }
    bool pixel_set(size_t channel, int x, int y) const {
        size_t p = static_cast<size_t>(y) * width + x;
        return (bits[channel * words_per_plane + (p >> 6)] >> (p & 63)) & 1ULL;
    }
};

// `annotator_id` names the stack owner when `boxes` is empty (an annotator
// who processed the image and drew nothing).
RasterStack rasterize(const ImageRef& image, std::span<const LabeledBox> boxes,
                      const std::vector<std::string>& labels,
                      const std::string& annotator_id = "");

enum class Observation : uint8_t { Labeled, Unlabeled, Missing };

// Flattened pixel-channel observations for one image across annotators.
// Unit ids are channel-major: unit = channel * (W*H) + y*W + x. A rater
// without a stack did not process the image and contributes `Missing`
// everywhere; a rater who processed it and drew nothing contributes
// all-Unlabeled values. The random pixel drop is realized as a retention
// bitmask chosen by a partial Fisher-Yates shuffle, a pure function of
// (seed, dims, drop_fraction).
class ObservationMatrix {
public:
    struct Storage {
        std::vector<std::vector<uint64_t>> planes;  // per rater; empty = missing
        std::vector<uint64_t> mask;                 // retention, C * wpp words
    };

    int width = 0;
    int height = 0;
    std::vector<std::string> labels;
    std::vector<std::string> raters;
    std::vector<uint8_t> participating;  // per rater
    size_t words_per_plane = 0;
    uint64_t seed = 0;
    double drop_fraction = 0.0;
    // Channel view; restrict_to_class narrows it without copying planes.
    size_t channel_begin = 0;
    size_t channel_end = 0;

    std::shared_ptr<const Storage> storage;

    size_t rater_count() const { return raters.size(); }
    size_t participant_count() const;
    size_t channel_count() const { return channel_end - channel_begin; }
    size_t pixels_per_channel() const { return static_cast<size_t>(width) * height; }

    size_t view_word_begin() const { return channel_begin * words_per_plane; }
    size_t view_word_end() const { return channel_end * words_per_plane; }

    // Retained units inside the current channel view.
    uint64_t retained_units() const;
    // Ascending logical unit ids of retained units in the view.
    std::vector<uint64_t> retained_unit_ids() const;

    Observation value_at(uint64_t unit, size_t rater) const;
    bool unit_retained(uint64_t unit) const;
};

struct RaterStacks {
    std::string annotator_id;
    const RasterStack* stack = nullptr;  // nullptr = did not process the image
};

ObservationMatrix build_observation_matrix(std::span<const RaterStacks> raters,
                                           double drop_fraction, uint64_t seed);

ObservationMatrix restrict_to_class(const ObservationMatrix& matrix,
                                    const std::string& label);

// Debug dump of one channel as a PGM bitmap (labeled=255, unlabeled=0).
std::string raster_channel_to_pgm(const RasterStack& stack, size_t channel);

}  // namespace annoqa
