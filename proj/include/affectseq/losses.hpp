#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "affectseq/common.hpp"

namespace affectseq {

// Word-embedding vectors per class, row c for class index c.
struct EmbeddingTable {
    std::vector<std::string> class_names;
    Eigen::MatrixXd vectors;  // n_classes x dim

    int dim() const { return static_cast<int>(vectors.cols()); }
    int n_classes() const { return static_cast<int>(vectors.rows()); }

    // Text format, one line per class: name followed by dim floats. The file
    // must contain every name in index order; throws ConfigError otherwise.
    static EmbeddingTable load(const std::string& path,
                               const std::vector<std::string>& names_in_order);
    void save(const std::string& path) const;

    // Seeded stand-in table (entries uniform in [-1, 1]).
    static EmbeddingTable synthetic(std::uint64_t seed, int dim,
                                    const std::vector<std::string>& names_in_order);
};

// Frame inclusion mask; loss functions never read entries at excluded frames.
using FrameMask = std::vector<bool>;

struct MseLoss {
    double value = 0.0;
    Eigen::MatrixXd grad;  // d value / d pred, zeros at excluded entries
};

struct CccLoss {
    double value = 0.0;  // 1 - (ccc_v + ccc_a) / 2, in [0, 2]
    double ccc_v = 0.0;
    double ccc_a = 0.0;
    Eigen::VectorXd grad_pred_v;
    Eigen::VectorXd grad_pred_a;
};

struct CrossEntropyLoss {
    double value = 0.0;
    Eigen::MatrixXd grad_logits;  // frames x n_classes
};

struct EmbeddingLoss {
    double value = 0.0;
    Eigen::MatrixXd grad_fused;  // frames x feature dim
    Eigen::MatrixXd grad_proj;   // table dim x feature dim
};

struct CombinedExprLoss {
    double value = 0.0;
    Eigen::MatrixXd grad_logits;
    Eigen::MatrixXd grad_fused;
    Eigen::MatrixXd grad_proj;
};

// Mean squared error over included entries; grad = 2 (pred - target) / N.
MseLoss mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                 const FrameMask* include = nullptr);

// Sequence-level CCC loss over both valence and arousal, with the analytic
// gradient of the concordance coefficient w.r.t. the predictions.
CccLoss ccc_loss(const Eigen::VectorXd& pred_v, const Eigen::VectorXd& gold_v,
                 const Eigen::VectorXd& pred_a, const Eigen::VectorXd& gold_a);

// Per-series concordance gradient helper: rho and d rho / d pred.
double ccc_with_grad(const Eigen::VectorXd& pred, const Eigen::VectorXd& gold,
                     Eigen::VectorXd& grad_pred);

// Mean of -log softmax(logits)[gold] over included frames, max-subtracted
// softmax. gold must lie in [0, n_classes) at every included frame.
CrossEntropyLoss cross_entropy_loss(const Eigen::MatrixXd& logits,
                                    const std::vector<int>& gold,
                                    const FrameMask* include = nullptr);

// Squared L2 distance between projected features and the gold class
// embedding, mean over included frames:
//   mean_t || proj * fused_t - table[gold_t] ||^2
// normalize_by_dim divides by the embedding dimension when set.
EmbeddingLoss embedding_loss(const Eigen::MatrixXd& fused, const Eigen::MatrixXd& proj,
                             const EmbeddingTable& table, const std::vector<int>& gold,
                             const FrameMask* include = nullptr,
                             bool normalize_by_dim = false);

// Single-frame squared distance and gradients; the building block above.
double embedding_loss_frame(const Eigen::VectorXd& fused, const Eigen::MatrixXd& proj,
                            const Eigen::VectorXd& class_vector,
                            Eigen::VectorXd* grad_fused = nullptr,
                            Eigen::MatrixXd* grad_proj = nullptr);

// value = ce.value + lambda_emb * emb.value; gradients add linearly.
CombinedExprLoss combined_expr_loss(const CrossEntropyLoss& ce, const EmbeddingLoss& emb,
                                    double lambda_emb);

}  // namespace affectseq
