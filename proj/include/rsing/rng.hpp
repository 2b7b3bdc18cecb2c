#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rsing {

// Philox4x64-10 block function.
using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

PhiloxCounter philox4x64(PhiloxCounter ctr, PhiloxKey key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// A counter-based stream: draws are a pure function of (root_seed, path, position).
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t root_seed, std::vector<std::uint64_t> path = {});

    std::uint64_t root_seed() const noexcept { return root_seed_; }
    const std::vector<std::uint64_t>& path() const noexcept { return path_; }

    // Child stream with index appended to the path; starts at position 0.
    RngStream substream(std::uint64_t index) const;

    // "seed/i/j/..." for census output.
    std::string path_string() const;

    std::uint64_t next_u64() noexcept;
    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    // Uniform integer in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;
    // Draws consumed so far.
    std::uint64_t position() const noexcept { return block_ * 4 - remaining_; }

    // URBG interface for <algorithm>.
    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept { return next_u64(); }

private:
    std::uint64_t root_seed_ = 0;
    std::vector<std::uint64_t> path_;
    PhiloxKey key_{0, 0};
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    unsigned remaining_ = 0;
};

// Fisher-Yates shuffle driven by a stream.
template <class T>
void shuffle(std::vector<T>& v, RngStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace rsing
