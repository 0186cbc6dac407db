#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "affectseq/common.hpp"

namespace affectseq {

// Population (divide-by-N) first and second moments of a paired series.
struct CccStats {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double cov_xy = 0.0;
};

CccStats ccc_stats(std::span<const double> x, std::span<const double> y);

// Concordance correlation coefficient,
//   rho_c = 2 cov / (var_x + var_y + (mean_x - mean_y)^2),
// in [-1, 1]. Returns 0 when the denominator falls below 1e-12 (both series
// constant and equal); *degenerate reports whether that rule fired.
double ccc(std::span<const double> x, std::span<const double> y, bool* degenerate = nullptr);

// Fraction of exact label matches.
double accuracy(std::span<const int> pred, std::span<const int> gold);

// Unweighted mean of per-class F1. A class absent from both pred and gold
// contributes F1 = 0 and is still counted.
double macro_f1(std::span<const int> pred, std::span<const int> gold, int n_classes);

// Challenge aggregate scores.
double total_expr(double f1, double acc);     // 0.67 * f1 + 0.33 * acc
double total_va(double ccc_v, double ccc_a);  // (ccc_v + ccc_a) / 2

struct EvalReport {
    Task task = Task::Expr;
    std::size_t frames = 0;
    // Expression track
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    double total_expr = 0.0;
    // Valence/arousal track
    double ccc_v = 0.0;
    double ccc_a = 0.0;
    double total_va = 0.0;
    bool degenerate_ccc = false;
};

EvalReport evaluate_expr(std::span<const int> pred, std::span<const int> gold,
                         int n_classes = kExprClasses);
EvalReport evaluate_va(std::span<const double> pred_v, std::span<const double> pred_a,
                       std::span<const double> gold_v, std::span<const double> gold_a);

}  // namespace affectseq
