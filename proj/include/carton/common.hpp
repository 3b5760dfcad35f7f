#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace carton {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based and refers to the offending line.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line_no)
        : Error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    std::size_t line;
};

// Input geometry does not admit the requested operation (collinear points,
// fewer points than the fit needs, ...).
struct DegenerateInput : Error {
    using Error::Error;
};

// A pairwise term was asked to compare coincident geometry.
struct DegeneratePair : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct SizeLimitError : Error {
    using Error::Error;
};

// Requested metric has an empty denominator.
struct UndefinedMetric : Error {
    using Error::Error;
};

struct NoHingeError : Error {
    using Error::Error;
};

inline constexpr double kPi = 3.14159265358979323846;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Deterministic random source. All randomized operations in the library draw
// through this class only, with explicitly seeded instances, so results are
// reproducible run to run. The uniform/normal transforms are written out here
// instead of using std::*_distribution, whose output is
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t index(std::uint64_t n) { return gen_() % n; }

    // Standard normal via Box-Muller.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double sigma) { return sigma * normal(); }

    // Independent stream derived from this rng's seed lineage.
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(splitmix64(seed ^ splitmix64(stream + 1)));
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace carton
