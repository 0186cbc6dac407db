#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace affectseq {

// Recognition task: 7-class expression labels or continuous valence/arousal.
enum class Task { Expr, Va };

Task task_from_string(const std::string& name);
std::string to_string(Task task);

inline constexpr int kExprClasses = 7;
inline constexpr int kExprSentinel = -1;
inline constexpr double kVaSentinel = -5.0;

// Class index order is fixed; annotation files and embedding tables use it.
extern const char* const kExprClassNames[kExprClasses];

// Invalid or inconsistent configuration (bad parameter values, unknown keys).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or missing input data (files, annotations, waveforms).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Seeded random source. Derives every distribution from the raw mt19937_64
// stream itself, so sequences are reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi], both inclusive.
    int uniform_int(int lo, int hi);

    // Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace affectseq
