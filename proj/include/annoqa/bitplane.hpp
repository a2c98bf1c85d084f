#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <span>
#include <vector>

namespace annoqa {

// Fixed-size bit array packed into 64-bit words. Backing store for raster
// channels and retention masks; agreement counting runs on whole words.
class BitPlane {
public:
    BitPlane() = default;
    explicit BitPlane(size_t bit_count)
        : bits_(bit_count), words_((bit_count + 63) / 64, 0) {}

    size_t bit_count() const { return bits_; }
    size_t word_count() const { return words_.size(); }

    void set(size_t i) { words_[i >> 6] |= (1ULL << (i & 63)); }
    bool test(size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }

    // Sets bits [begin, end).
    void set_range(size_t begin, size_t end) {
        if (begin >= end) return;
        size_t wb = begin >> 6, we = (end - 1) >> 6;
        uint64_t first = ~0ULL << (begin & 63);
        uint64_t last = ~0ULL >> (63 - ((end - 1) & 63));
        if (wb == we) {
            words_[wb] |= first & last;
        } else {
            words_[wb] |= first;
            for (size_t w = wb + 1; w < we; ++w) words_[w] = ~0ULL;
            words_[we] |= last;
        }
    }

    uint64_t count() const {
        uint64_t total = 0;
        for (uint64_t w : words_) total += std::popcount(w);
        return total;
    }

    uint64_t count_words(size_t word_begin, size_t word_end) const {
        uint64_t total = 0;
        for (size_t w = word_begin; w < word_end; ++w) total += std::popcount(words_[w]);
        return total;
    }

    std::span<const uint64_t> words() const { return words_; }
    std::span<uint64_t> words_mut() { return words_; }
    const uint64_t* data() const { return words_.data(); }

    bool operator==(const BitPlane&) const = default;

private:
    size_t bits_ = 0;
    std::vector<uint64_t> words_;
};

}  // namespace annoqa
