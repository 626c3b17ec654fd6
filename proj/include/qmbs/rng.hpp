#pragma once

#include <cstdint>
#include <random>

namespace qmbs {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Random stream identified by (master_seed, stream_index). The engine seed is a
// hash of both, so per-trial streams do not depend on scheduling.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : master_(master_seed), index_(stream_index) {
        std::uint64_t a = mix64(master_seed ^ mix64(stream_index + 0x632be59bd9b4e019ULL));
        std::uint64_t b = mix64(a ^ 0xd1b54a32d192ed03ULL);
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        eng_.seed(seq);
    }

    std::uint64_t master_seed() const { return master_; }
    std::uint64_t stream_index() const { return index_; }

    // Independent substream, e.g. one per trial.
    RngStream split(std::uint64_t sub) const {
        return RngStream(mix64(master_ ^ mix64(index_)) + 0x9e3779b97f4a7c15ULL * (sub + 1), sub);
    }

    double normal() { return gauss_(eng_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng_);
    }
    bool coin() { return (eng_() >> 63) != 0; }

    std::mt19937_64& engine() { return eng_; }

private:
    std::uint64_t master_;
    std::uint64_t index_;
    std::mt19937_64 eng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace qmbs
