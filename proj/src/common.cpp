#include "affectseq/common.hpp"

#include <cmath>

namespace affectseq {

const char* const kExprClassNames[kExprClasses] = {
    "neutral", "anger", "disgust", "fear", "happiness", "sadness", "surprise"};

Task task_from_string(const std::string& name) {
    if (name == "expr") return Task::Expr;
    if (name == "va") return Task::Va;
    throw ConfigError("unknown task '" + name + "' (expected 'expr' or 'va')");
}

std::string to_string(Task task) {
    return task == Task::Expr ? "expr" : "va";
}

int Rng::uniform_int(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r >= limit);
    return lo + static_cast<int>(r % span);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u in (0, 1], v in [0, 1)
    const double u = 1.0 - uniform();
    const double v = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * M_PI * v;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace affectseq
