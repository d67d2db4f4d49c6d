#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace ddqkd {

// Seedable, platform-reproducible generator. The engine is std::mt19937_64
// (fully specified by the standard); uniforms take its top 53 bits and
// Gaussians use the Marsaglia polar method, so no library distribution is
// involved.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream id for (seed, a, b, ...), mixed with splitmix64.
    static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    double uniform();   // [0, 1)
    double gaussian();  // N(0, 1)

    void fill_gaussian(std::span<double> out);
    std::vector<double> gaussian_vector(std::size_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stream purposes, so every random draw in a frame has its own stream.
enum class Stream : std::uint64_t {
    symbols = 1,
    excess_noise = 2,
    vacuum = 3,
    electronic = 4,
    phase = 5,
};

}  // namespace ddqkd
