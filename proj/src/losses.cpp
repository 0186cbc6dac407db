#include "affectseq/losses.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace affectseq {

namespace {

constexpr double kCccDenomEps = 1e-12;

std::vector<std::size_t> included_indices(std::size_t n, const FrameMask* include) {
    std::vector<std::size_t> idx;
    if (!include) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return idx;
    }
    if (include->size() != n)
        throw std::invalid_argument("loss: mask length does not match frame count");
    for (std::size_t i = 0; i < n; ++i)
        if ((*include)[i]) idx.push_back(i);
    return idx;
}

}  // namespace

EmbeddingTable EmbeddingTable::load(const std::string& path,
                                    const std::vector<std::string>& names_in_order) {
    std::ifstream in(path);
    if (!in) throw DataError("embedding table: cannot open " + path);

    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string name;
        ss >> name;
        std::vector<double> vec;
        double v;
        while (ss >> v) vec.push_back(v);
        if (vec.empty()) throw DataError("embedding table: no values for '" + name + "'");
        if (!rows.empty() && vec.size() != rows.front().size())
            throw DataError("embedding table: inconsistent dimension at '" + name + "'");
        names.push_back(name);
        rows.push_back(std::move(vec));
    }
    if (rows.empty()) throw DataError("embedding table: " + path + " is empty");

    EmbeddingTable table;
    table.class_names = names_in_order;
    table.vectors.resize(static_cast<int>(names_in_order.size()),
                         static_cast<int>(rows.front().size()));
    for (std::size_t c = 0; c < names_in_order.size(); ++c) {
        bool found = false;
        for (std::size_t r = 0; r < names.size(); ++r) {
            if (names[r] == names_in_order[c]) {
                for (std::size_t j = 0; j < rows[r].size(); ++j)
                    table.vectors(static_cast<int>(c), static_cast<int>(j)) = rows[r][j];
                found = true;
                break;
            }
        }
        if (!found)
            throw ConfigError("embedding table: class '" + names_in_order[c] +
                              "' missing from " + path);
    }
    return table;
}

void EmbeddingTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("embedding table: cannot write " + path);
    out.precision(17);
    for (int c = 0; c < n_classes(); ++c) {
        out << class_names[c];
        for (int j = 0; j < dim(); ++j) out << ' ' << vectors(c, j);
        out << '\n';
    }
}

EmbeddingTable EmbeddingTable::synthetic(std::uint64_t seed, int dim,
                                         const std::vector<std::string>& names_in_order) {
    Rng rng(seed);
    EmbeddingTable table;
    table.class_names = names_in_order;
    table.vectors.resize(static_cast<int>(names_in_order.size()), dim);
    for (int c = 0; c < table.n_classes(); ++c)
        for (int j = 0; j < dim; ++j) table.vectors(c, j) = rng.uniform(-1.0, 1.0);
    return table;
}

MseLoss mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                 const FrameMask* include) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::invalid_argument("mse: shape mismatch");
    const auto idx = included_indices(static_cast<std::size_t>(pred.rows()), include);
    if (idx.empty()) throw std::invalid_argument("mse: no included entries");

    const double n = static_cast<double>(idx.size() * pred.cols());
    MseLoss loss;
    loss.grad = Eigen::MatrixXd::Zero(pred.rows(), pred.cols());
    for (std::size_t i : idx) {
        const auto row = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < pred.cols(); ++j) {
            const double diff = pred(row, j) - target(row, j);
            loss.value += diff * diff;
            loss.grad(row, j) = 2.0 * diff / n;
        }
    }
    loss.value /= n;
    return loss;
}

double ccc_with_grad(const Eigen::VectorXd& pred, const Eigen::VectorXd& gold,
                     Eigen::VectorXd& grad_pred) {
    if (pred.size() != gold.size())
        throw std::invalid_argument("ccc_loss: length mismatch");
    if (pred.size() < 2)
        throw std::invalid_argument("ccc_loss: need at least 2 samples");

    const double n = static_cast<double>(pred.size());
    const double mean_p = pred.mean();
    const double mean_g = gold.mean();
    const Eigen::ArrayXd dp = pred.array() - mean_p;
    const Eigen::ArrayXd dg = gold.array() - mean_g;
    const double var_p = dp.square().sum() / n;
    const double var_g = dg.square().sum() / n;
    const double cov = (dp * dg).sum() / n;
    const double mean_diff = mean_p - mean_g;
    const double denom = var_p + var_g + mean_diff * mean_diff;

    grad_pred = Eigen::VectorXd::Zero(pred.size());
    if (denom < kCccDenomEps) return 0.0;

    const double rho = 2.0 * cov / denom;
    // Quotient rule over the population statistics:
    //   d rho / d p_i = 2/(n denom) * (dg_i - rho (dp_i + mean_diff))
    grad_pred = (2.0 / (n * denom)) * (dg - rho * (dp + mean_diff)).matrix();
    return rho;
}

CccLoss ccc_loss(const Eigen::VectorXd& pred_v, const Eigen::VectorXd& gold_v,
                 const Eigen::VectorXd& pred_a, const Eigen::VectorXd& gold_a) {
    CccLoss loss;
    loss.ccc_v = ccc_with_grad(pred_v, gold_v, loss.grad_pred_v);
    loss.ccc_a = ccc_with_grad(pred_a, gold_a, loss.grad_pred_a);
    loss.value = 1.0 - (loss.ccc_v + loss.ccc_a) / 2.0;
    loss.grad_pred_v *= -0.5;
    loss.grad_pred_a *= -0.5;
    return loss;
}

CrossEntropyLoss cross_entropy_loss(const Eigen::MatrixXd& logits, const std::vector<int>& gold,
                                    const FrameMask* include) {
    if (static_cast<std::size_t>(logits.rows()) != gold.size())
        throw std::invalid_argument("cross_entropy: frame count mismatch");
    const auto idx = included_indices(gold.size(), include);
    if (idx.empty()) throw std::invalid_argument("cross_entropy: no included frames");

    const int n_classes = static_cast<int>(logits.cols());
    const double n = static_cast<double>(idx.size());
    CrossEntropyLoss loss;
    loss.grad_logits = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
    for (std::size_t i : idx) {
        const auto row = static_cast<Eigen::Index>(i);
        const int g = gold[i];
        if (g < 0 || g >= n_classes)
            throw std::invalid_argument("cross_entropy: gold label outside [0, n_classes)");
        const double m = logits.row(row).maxCoeff();
        const Eigen::ArrayXd shifted = logits.row(row).array() - m;
        const Eigen::ArrayXd expd = shifted.exp();
        const double z = expd.sum();
        loss.value += std::log(z) - shifted(g);
        loss.grad_logits.row(row) = (expd / (z * n)).matrix();
        loss.grad_logits(row, g) -= 1.0 / n;
    }
    loss.value /= n;
    return loss;
}

double embedding_loss_frame(const Eigen::VectorXd& fused, const Eigen::MatrixXd& proj,
                            const Eigen::VectorXd& class_vector, Eigen::VectorXd* grad_fused,
                            Eigen::MatrixXd* grad_proj) {
    if (proj.cols() != fused.size() || proj.rows() != class_vector.size())
        throw std::invalid_argument("embedding_loss: dimension mismatch");
    const Eigen::VectorXd diff = proj * fused - class_vector;
    if (grad_fused) *grad_fused = 2.0 * (proj.transpose() * diff);
    if (grad_proj) *grad_proj = 2.0 * diff * fused.transpose();
    return diff.squaredNorm();
}

EmbeddingLoss embedding_loss(const Eigen::MatrixXd& fused, const Eigen::MatrixXd& proj,
                             const EmbeddingTable& table, const std::vector<int>& gold,
                             const FrameMask* include, bool normalize_by_dim) {
    if (static_cast<std::size_t>(fused.rows()) != gold.size())
        throw std::invalid_argument("embedding_loss: frame count mismatch");
    const auto idx = included_indices(gold.size(), include);
    if (idx.empty()) throw std::invalid_argument("embedding_loss: no included frames");

    const double scale = normalize_by_dim ? 1.0 / table.dim() : 1.0;
    const double n = static_cast<double>(idx.size());
    EmbeddingLoss loss;
    loss.grad_fused = Eigen::MatrixXd::Zero(fused.rows(), fused.cols());
    loss.grad_proj = Eigen::MatrixXd::Zero(proj.rows(), proj.cols());
    Eigen::VectorXd grad_f;
    Eigen::MatrixXd grad_p;
    for (std::size_t i : idx) {
        const auto row = static_cast<Eigen::Index>(i);
        const int g = gold[i];
        if (g < 0 || g >= table.n_classes())
            throw ConfigError("embedding_loss: class " + std::to_string(g) +
                              " missing from the table");
        const Eigen::VectorXd f = fused.row(row).transpose();
        loss.value += embedding_loss_frame(f, proj, table.vectors.row(g).transpose(),
                                           &grad_f, &grad_p);
        loss.grad_fused.row(row) = (scale / n) * grad_f.transpose();
        loss.grad_proj += (scale / n) * grad_p;
    }
    loss.value *= scale / n;
    return loss;
}

CombinedExprLoss combined_expr_loss(const CrossEntropyLoss& ce, const EmbeddingLoss& emb,
                                    double lambda_emb) {
    if (lambda_emb < 0.0)
        throw std::invalid_argument("combined_expr_loss: lambda_emb must be >= 0");
    CombinedExprLoss loss;
    loss.value = ce.value + lambda_emb * emb.value;
    loss.grad_logits = ce.grad_logits;
    loss.grad_fused = lambda_emb * emb.grad_fused;
    loss.grad_proj = lambda_emb * emb.grad_proj;
    return loss;
}

}  // namespace affectseq
