#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ucip {

// Deterministic random source. All distributions are hand-rolled on top of
// mt19937_64 so that a given seed produces the same stream on every platform;
// std::*_distribution output is implementation-defined and would break
// byte-exact reruns of serialized results.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t n);

    // Standard normal via Box-Muller; the spare value is cached.
    double normal();

    // Index sampled from an (unnormalized) weight vector by CDF scan.
    std::size_t categorical(const std::vector<double>& weights);

    // In-place Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(xs[i - 1], xs[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Named sub-stream derivation: mixes (base, stream, index) through splitmix64
// so that independent consumers never share a stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

} // namespace ucip
