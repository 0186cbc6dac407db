#include "affectseq/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace affectseq {

namespace {
constexpr double kCccDenomEps = 1e-12;
}

CccStats ccc_stats(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("ccc: series lengths differ");
    if (x.size() < 2)
        throw std::invalid_argument("ccc: need at least 2 samples");

    const double n = static_cast<double>(x.size());
    CccStats s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s.mean_x += x[i];
        s.mean_y += y[i];
    }
    s.mean_x /= n;
    s.mean_y /= n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - s.mean_x;
        const double dy = y[i] - s.mean_y;
        s.var_x += dx * dx;
        s.var_y += dy * dy;
        s.cov_xy += dx * dy;
    }
    s.var_x /= n;
    s.var_y /= n;
    s.cov_xy /= n;
    return s;
}

double ccc(std::span<const double> x, std::span<const double> y, bool* degenerate) {
    const CccStats s = ccc_stats(x, y);
    const double mean_diff = s.mean_x - s.mean_y;
    const double denom = s.var_x + s.var_y + mean_diff * mean_diff;
    if (degenerate) *degenerate = denom < kCccDenomEps;
    if (denom < kCccDenomEps) return 0.0;
    return 2.0 * s.cov_xy / denom;
}

double accuracy(std::span<const int> pred, std::span<const int> gold) {
    if (pred.size() != gold.size())
        throw std::invalid_argument("accuracy: length mismatch");
    if (pred.empty())
        throw std::invalid_argument("accuracy: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == gold[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double macro_f1(std::span<const int> pred, std::span<const int> gold, int n_classes) {
    if (pred.size() != gold.size())
        throw std::invalid_argument("macro_f1: length mismatch");
    if (pred.empty())
        throw std::invalid_argument("macro_f1: empty input");
    if (n_classes < 1)
        throw std::invalid_argument("macro_f1: n_classes must be positive");

    std::vector<std::size_t> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int p = pred[i];
        const int g = gold[i];
        if (p < 0 || p >= n_classes || g < 0 || g >= n_classes)
            throw std::invalid_argument("macro_f1: label outside [0, n_classes)");
        if (p == g) {
            ++tp[p];
        } else {
            ++fp[p];
            ++fn[g];
        }
    }
    double sum = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    }
    return sum / static_cast<double>(n_classes);
}

double total_expr(double f1, double acc) {
    return 0.67 * f1 + 0.33 * acc;
}

double total_va(double ccc_v, double ccc_a) {
    return (ccc_v + ccc_a) / 2.0;
}

EvalReport evaluate_expr(std::span<const int> pred, std::span<const int> gold, int n_classes) {
    EvalReport report;
    report.task = Task::Expr;
    report.frames = pred.size();
    report.macro_f1 = macro_f1(pred, gold, n_classes);
    report.accuracy = accuracy(pred, gold);
    report.total_expr = total_expr(report.macro_f1, report.accuracy);
    return report;
}

EvalReport evaluate_va(std::span<const double> pred_v, std::span<const double> pred_a,
                       std::span<const double> gold_v, std::span<const double> gold_a) {
    EvalReport report;
    report.task = Task::Va;
    report.frames = pred_v.size();
    bool degenerate_v = false;
    bool degenerate_a = false;
    report.ccc_v = ccc(pred_v, gold_v, &degenerate_v);
    report.ccc_a = ccc(pred_a, gold_a, &degenerate_a);
    report.degenerate_ccc = degenerate_v || degenerate_a;
    report.total_va = total_va(report.ccc_v, report.ccc_a);
    return report;
}

}  // namespace affectseq
