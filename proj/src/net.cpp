#include "affectseq/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "affectseq/metrics.hpp"

namespace affectseq {

using nlohmann::json;

namespace {

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) {
    return 1.0 / (1.0 + (-x).exp());
}

void init_direction(LstmDirParams& p, int d_in, int h, Rng& rng) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(h));
    p.w_input.resize(4 * h, d_in);
    p.w_recur.resize(4 * h, h);
    p.bias = Eigen::VectorXd::Zero(4 * h);
    for (int r = 0; r < 4 * h; ++r) {
        for (int c = 0; c < d_in; ++c) p.w_input(r, c) = rng.uniform(-scale, scale);
        for (int c = 0; c < h; ++c) p.w_recur(r, c) = rng.uniform(-scale, scale);
    }
    p.bias.segment(h, h).setConstant(1.0);  // forget gate starts open
}

// Runs one direction over xs (already in that direction's time order).
void run_direction(const Eigen::MatrixXd& xs, const LstmDirParams& p, int h, DirCache& cache) {
    const int t_len = static_cast<int>(xs.rows());
    cache.x = xs;
    cache.h.resize(t_len, h);
    cache.c.resize(t_len, h);
    cache.tanh_c.resize(t_len, h);
    cache.gate_i.resize(t_len, h);
    cache.gate_f.resize(t_len, h);
    cache.gate_g.resize(t_len, h);
    cache.gate_o.resize(t_len, h);

    Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
    for (int t = 0; t < t_len; ++t) {
        const LstmCellResult cell =
            lstm_cell_forward(xs.row(t).transpose(), h_prev, c_prev, p);
        cache.gate_i.row(t) = cell.gate_i.transpose();
        cache.gate_f.row(t) = cell.gate_f.transpose();
        cache.gate_g.row(t) = cell.gate_g.transpose();
        cache.gate_o.row(t) = cell.gate_o.transpose();
        cache.c.row(t) = cell.c.transpose();
        cache.tanh_c.row(t) = cell.c.array().tanh().matrix().transpose();
        cache.h.row(t) = cell.h.transpose();
        h_prev = cell.h;
        c_prev = cell.c;
    }
}

// BPTT for one direction; grad_h is d loss / d h_t in this direction's time
// order. Returns parameter grads and d loss / d x.
void backward_direction(const DirCache& cache, const LstmDirParams& p, int h,
                        const Eigen::MatrixXd& grad_h, LstmDirParams& grads,
                        Eigen::MatrixXd& grad_x) {
    const int t_len = static_cast<int>(cache.x.rows());
    grads.w_input = Eigen::MatrixXd::Zero(p.w_input.rows(), p.w_input.cols());
    grads.w_recur = Eigen::MatrixXd::Zero(p.w_recur.rows(), p.w_recur.cols());
    grads.bias = Eigen::VectorXd::Zero(p.bias.size());
    grad_x = Eigen::MatrixXd::Zero(cache.x.rows(), cache.x.cols());

    Eigen::ArrayXd dh_carry = Eigen::ArrayXd::Zero(h);
    Eigen::ArrayXd dc_carry = Eigen::ArrayXd::Zero(h);
    Eigen::VectorXd dz(4 * h);
    for (int t = t_len - 1; t >= 0; --t) {
        const Eigen::ArrayXd gi = cache.gate_i.row(t).transpose().array();
        const Eigen::ArrayXd gf = cache.gate_f.row(t).transpose().array();
        const Eigen::ArrayXd gg = cache.gate_g.row(t).transpose().array();
        const Eigen::ArrayXd go = cache.gate_o.row(t).transpose().array();
        const Eigen::ArrayXd tc = cache.tanh_c.row(t).transpose().array();

        const Eigen::ArrayXd dh = grad_h.row(t).transpose().array() + dh_carry;
        const Eigen::ArrayXd dgo = dh * tc;
        const Eigen::ArrayXd dc = dh * go * (1.0 - tc.square()) + dc_carry;
        Eigen::ArrayXd c_prev = Eigen::ArrayXd::Zero(h);
        if (t > 0) c_prev = cache.c.row(t - 1).transpose().array();
        const Eigen::ArrayXd dgi = dc * gg;
        const Eigen::ArrayXd dgf = dc * c_prev;
        const Eigen::ArrayXd dgg = dc * gi;

        dz.segment(0, h) = (dgi * gi * (1.0 - gi)).matrix();
        dz.segment(h, h) = (dgf * gf * (1.0 - gf)).matrix();
        dz.segment(2 * h, h) = (dgg * (1.0 - gg.square())).matrix();
        dz.segment(3 * h, h) = (dgo * go * (1.0 - go)).matrix();

        grads.w_input.noalias() += dz * cache.x.row(t);
        if (t > 0) grads.w_recur.noalias() += dz * cache.h.row(t - 1);
        grads.bias += dz;
        grad_x.row(t) = (p.w_input.transpose() * dz).transpose();
        dh_carry = (p.w_recur.transpose() * dz).array();
        dc_carry = dc * gf;
    }
}

}  // namespace

LstmCellResult lstm_cell_forward(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                                 const Eigen::VectorXd& c_prev, const LstmDirParams& p) {
    const int h = static_cast<int>(h_prev.size());
    if (p.w_input.cols() != x.size() || p.w_recur.cols() != h || p.bias.size() != 4 * h ||
        c_prev.size() != h)
        throw std::invalid_argument("lstm_cell_forward: dimension mismatch");
    if (!x.allFinite() || !h_prev.allFinite() || !c_prev.allFinite())
        throw std::invalid_argument("lstm_cell_forward: non-finite input");

    const Eigen::VectorXd z = p.w_input * x + p.w_recur * h_prev + p.bias;
    LstmCellResult cell;
    cell.gate_i = sigmoid(z.segment(0, h).array()).matrix();
    cell.gate_f = sigmoid(z.segment(h, h).array()).matrix();
    cell.gate_g = z.segment(2 * h, h).array().tanh().matrix();
    cell.gate_o = sigmoid(z.segment(3 * h, h).array()).matrix();
    cell.c = (cell.gate_f.array() * c_prev.array() + cell.gate_i.array() * cell.gate_g.array())
                 .matrix();
    cell.h = (cell.gate_o.array() * cell.c.array().tanh()).matrix();
    return cell;
}

SeqModel SeqModel::init(Task task, int input_dim, int hidden_dim, Rng& rng, bool bidirectional,
                        int emb_dim) {
    if (input_dim < 1 || hidden_dim < 1)
        throw std::invalid_argument("SeqModel::init: dimensions must be positive");
    SeqModel model;
    model.task = task;
    model.lstm.input_dim = input_dim;
    model.lstm.hidden_dim = hidden_dim;
    model.lstm.bidirectional = bidirectional;
    init_direction(model.lstm.fwd, input_dim, hidden_dim, rng);
    if (bidirectional) init_direction(model.lstm.bwd, input_dim, hidden_dim, rng);

    const double scale = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    model.head_w.resize(model.n_out(), model.concat_dim());
    for (int r = 0; r < model.head_w.rows(); ++r)
        for (int c = 0; c < model.head_w.cols(); ++c)
            model.head_w(r, c) = rng.uniform(-scale, scale);
    model.head_b = Eigen::VectorXd::Zero(model.n_out());

    if (emb_dim > 0) {
        Eigen::MatrixXd proj(emb_dim, input_dim);
        for (int r = 0; r < emb_dim; ++r)
            for (int c = 0; c < input_dim; ++c) proj(r, c) = rng.uniform(-scale, scale);
        model.emb_projection = proj;
    }
    return model;
}

Eigen::MatrixXd bilstm_forward(const Eigen::MatrixXd& xs, const SeqModel& model,
                               ForwardCache* cache) {
    if (xs.rows() < 1) throw std::invalid_argument("bilstm_forward: empty sequence");
    if (xs.cols() != model.lstm.input_dim)
        throw std::invalid_argument("bilstm_forward: feature dimension mismatch");

    const int t_len = static_cast<int>(xs.rows());
    const int h = model.lstm.hidden_dim;
    ForwardCache local;
    ForwardCache& tape = cache ? *cache : local;

    run_direction(xs, model.lstm.fwd, h, tape.fwd);
    tape.concat.resize(t_len, model.concat_dim());
    tape.concat.leftCols(h) = tape.fwd.h;
    if (model.lstm.bidirectional) {
        run_direction(xs.colwise().reverse(), model.lstm.bwd, h, tape.bwd);
        tape.concat.rightCols(h) = tape.bwd.h.colwise().reverse();
    }

    Eigen::MatrixXd out = tape.concat * model.head_w.transpose();
    out.rowwise() += model.head_b.transpose();
    if (model.task == Task::Va) out = out.array().tanh().matrix();
    tape.outputs = out;
    return out;
}

SeqGradients seq_backward(const Eigen::MatrixXd& grad_outputs, const ForwardCache& cache,
                          const SeqModel& model) {
    if (grad_outputs.rows() != cache.outputs.rows() ||
        grad_outputs.cols() != cache.outputs.cols())
        throw std::invalid_argument("seq_backward: gradient shape does not match cache");

    const int h = model.lstm.hidden_dim;
    Eigen::MatrixXd dz = grad_outputs;
    if (model.task == Task::Va)
        dz = (dz.array() * (1.0 - cache.outputs.array().square())).matrix();

    SeqGradients grads;
    grads.head_w = dz.transpose() * cache.concat;
    grads.head_b = dz.colwise().sum().transpose();

    const Eigen::MatrixXd d_concat = dz * model.head_w;
    Eigen::MatrixXd grad_x_fwd;
    backward_direction(cache.fwd, model.lstm.fwd, h, d_concat.leftCols(h), grads.fwd,
                       grad_x_fwd);
    grads.inputs = grad_x_fwd;
    if (model.lstm.bidirectional) {
        Eigen::MatrixXd grad_x_bwd;
        backward_direction(cache.bwd, model.lstm.bwd, h,
                           d_concat.rightCols(h).colwise().reverse(), grads.bwd, grad_x_bwd);
        grads.inputs += grad_x_bwd.colwise().reverse();
    }
    return grads;
}

namespace {

std::size_t param_count(const SeqModel& model) {
    const auto dir_size = [](const LstmDirParams& p) {
        return static_cast<std::size_t>(p.w_input.size() + p.w_recur.size() + p.bias.size());
    };
    std::size_t n = dir_size(model.lstm.fwd);
    if (model.lstm.bidirectional) n += dir_size(model.lstm.bwd);
    n += static_cast<std::size_t>(model.head_w.size() + model.head_b.size());
    if (model.emb_projection) n += static_cast<std::size_t>(model.emb_projection->size());
    return n;
}

void copy_out(const Eigen::MatrixXd& m, Eigen::VectorXd& flat, Eigen::Index& pos) {
    flat.segment(pos, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    pos += m.size();
}

void copy_out(const Eigen::VectorXd& v, Eigen::VectorXd& flat, Eigen::Index& pos) {
    flat.segment(pos, v.size()) = v;
    pos += v.size();
}

void copy_in(Eigen::MatrixXd& m, const Eigen::VectorXd& flat, Eigen::Index& pos) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(pos, m.size());
    pos += m.size();
}

void copy_in(Eigen::VectorXd& v, const Eigen::VectorXd& flat, Eigen::Index& pos) {
    v = flat.segment(pos, v.size());
    pos += v.size();
}

}  // namespace

Eigen::VectorXd flatten_params(const SeqModel& model) {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(param_count(model)));
    Eigen::Index pos = 0;
    copy_out(model.lstm.fwd.w_input, flat, pos);
    copy_out(model.lstm.fwd.w_recur, flat, pos);
    copy_out(model.lstm.fwd.bias, flat, pos);
    if (model.lstm.bidirectional) {
        copy_out(model.lstm.bwd.w_input, flat, pos);
        copy_out(model.lstm.bwd.w_recur, flat, pos);
        copy_out(model.lstm.bwd.bias, flat, pos);
    }
    copy_out(model.head_w, flat, pos);
    copy_out(model.head_b, flat, pos);
    if (model.emb_projection) copy_out(*model.emb_projection, flat, pos);
    return flat;
}

void set_params(SeqModel& model, const Eigen::VectorXd& flat) {
    if (flat.size() != static_cast<Eigen::Index>(param_count(model)))
        throw std::invalid_argument("set_params: parameter count mismatch");
    Eigen::Index pos = 0;
    copy_in(model.lstm.fwd.w_input, flat, pos);
    copy_in(model.lstm.fwd.w_recur, flat, pos);
    copy_in(model.lstm.fwd.bias, flat, pos);
    if (model.lstm.bidirectional) {
        copy_in(model.lstm.bwd.w_input, flat, pos);
        copy_in(model.lstm.bwd.w_recur, flat, pos);
        copy_in(model.lstm.bwd.bias, flat, pos);
    }
    copy_in(model.head_w, flat, pos);
    copy_in(model.head_b, flat, pos);
    if (model.emb_projection) copy_in(*model.emb_projection, flat, pos);
}

Eigen::VectorXd flatten_grads(const SeqGradients& grads, const SeqModel& model,
                              const Eigen::MatrixXd* grad_proj) {
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count(model)));
    Eigen::Index pos = 0;
    copy_out(grads.fwd.w_input, flat, pos);
    copy_out(grads.fwd.w_recur, flat, pos);
    copy_out(grads.fwd.bias, flat, pos);
    if (model.lstm.bidirectional) {
        copy_out(grads.bwd.w_input, flat, pos);
        copy_out(grads.bwd.w_recur, flat, pos);
        copy_out(grads.bwd.bias, flat, pos);
    }
    copy_out(grads.head_w, flat, pos);
    copy_out(grads.head_b, flat, pos);
    if (model.emb_projection) {
        if (grad_proj) {
            copy_out(*grad_proj, flat, pos);
        } else {
            pos += model.emb_projection->size();
        }
    }
    return flat;
}

void TrainConfig::validate() const {
    if (learning_rate < 0.0) throw ConfigError("train: learning_rate must be >= 0");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (gradient_clip_norm <= 0.0) throw ConfigError("train: gradient_clip_norm must be > 0");
    if (optimizer != "adam" && optimizer != "sgd")
        throw ConfigError("train: optimizer must be 'adam' or 'sgd'");
    if (lambda_emb < 0.0) throw ConfigError("train: lambda_emb must be >= 0");
    if (va_mse_weight < 0.0) throw ConfigError("train: va_mse_weight must be >= 0");
}

namespace {

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    long step = 0;
};

void optimizer_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
                    const TrainConfig& cfg, AdamState& adam) {
    if (cfg.optimizer == "sgd") {
        params -= cfg.learning_rate * grads;
        return;
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (adam.step == 0) {
        adam.m = Eigen::VectorXd::Zero(params.size());
        adam.v = Eigen::VectorXd::Zero(params.size());
    }
    ++adam.step;
    adam.m = beta1 * adam.m + (1.0 - beta1) * grads;
    adam.v = (beta2 * adam.v.array() + (1.0 - beta2) * grads.array().square()).matrix();
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.step));
    params.array() -=
        cfg.learning_rate * (adam.m.array() / bc1) / ((adam.v.array() / bc2).sqrt() + eps);
}

// Frames that may contribute to a loss: inside the video and labeled.
FrameMask usable_frames(const SequenceWindow& win, Task task) {
    FrameMask mask(win.valid.size());
    for (std::size_t t = 0; t < mask.size(); ++t)
        mask[t] = win.valid[t] && win.labels[t].has_label(task);
    return mask;
}

struct WindowLoss {
    double value = 0.0;
    Eigen::MatrixXd grad_outputs;
    Eigen::MatrixXd grad_proj;  // empty when unused
    bool contributes = false;
};

WindowLoss window_loss(const SequenceWindow& win, const Eigen::MatrixXd& outputs,
                       const SeqModel& model, const EmbeddingTable* table,
                       const TrainConfig& cfg) {
    WindowLoss result;
    result.grad_outputs = Eigen::MatrixXd::Zero(outputs.rows(), outputs.cols());
    const FrameMask mask = usable_frames(win, model.task);
    const std::size_t usable =
        static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));

    if (model.task == Task::Expr) {
        if (usable == 0) return result;
        std::vector<int> gold(win.labels.size(), 0);
        for (std::size_t t = 0; t < win.labels.size(); ++t)
            if (mask[t]) gold[t] = win.labels[t].expr;
        const CrossEntropyLoss ce = cross_entropy_loss(outputs, gold, &mask);
        result.value = ce.value;
        result.grad_outputs = ce.grad_logits;
        if (cfg.lambda_emb > 0.0 && model.emb_projection && table) {
            const EmbeddingLoss emb =
                embedding_loss(win.features, *model.emb_projection, *table, gold, &mask);
            result.value += cfg.lambda_emb * emb.value;
            result.grad_proj = cfg.lambda_emb * emb.grad_proj;
        }
        result.contributes = true;
        return result;
    }

    // VA: sequence statistics need at least two usable frames.
    if (usable < 2) return result;
    Eigen::VectorXd pred_v(usable), pred_a(usable), gold_v(usable), gold_a(usable);
    std::vector<Eigen::Index> rows;
    rows.reserve(usable);
    for (std::size_t t = 0; t < mask.size(); ++t) {
        if (!mask[t]) continue;
        const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
        rows.push_back(static_cast<Eigen::Index>(t));
        pred_v(r) = outputs(static_cast<Eigen::Index>(t), 0);
        pred_a(r) = outputs(static_cast<Eigen::Index>(t), 1);
        gold_v(r) = win.labels[t].valence;
        gold_a(r) = win.labels[t].arousal;
    }
    const CccLoss ccc = ccc_loss(pred_v, gold_v, pred_a, gold_a);
    result.value = ccc.value;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        result.grad_outputs(rows[k], 0) = ccc.grad_pred_v(static_cast<Eigen::Index>(k));
        result.grad_outputs(rows[k], 1) = ccc.grad_pred_a(static_cast<Eigen::Index>(k));
    }
    if (cfg.va_mse_weight > 0.0) {
        Eigen::MatrixXd target(usable, 2);
        Eigen::MatrixXd pred(usable, 2);
        pred.col(0) = pred_v;
        pred.col(1) = pred_a;
        target.col(0) = gold_v;
        target.col(1) = gold_a;
        const MseLoss mse = mse_loss(pred, target);
        result.value += cfg.va_mse_weight * mse.value;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            result.grad_outputs(rows[k], 0) +=
                cfg.va_mse_weight * mse.grad(static_cast<Eigen::Index>(k), 0);
            result.grad_outputs(rows[k], 1) +=
                cfg.va_mse_weight * mse.grad(static_cast<Eigen::Index>(k), 1);
        }
    }
    result.contributes = true;
    return result;
}

}  // namespace

EpochLog evaluate_windows(const SeqModel& model, const std::vector<SequenceWindow>& windows) {
    EpochLog log;
    std::vector<int> pred_cls, gold_cls;
    std::vector<double> pred_v, pred_a, gold_v, gold_a;
    for (const SequenceWindow& win : windows) {
        const Eigen::MatrixXd out = bilstm_forward(win.features, model);
        const FrameMask mask = usable_frames(win, model.task);
        for (std::size_t t = 0; t < mask.size(); ++t) {
            if (!mask[t]) continue;
            const Eigen::Index r = static_cast<Eigen::Index>(t);
            if (model.task == Task::Expr) {
                Eigen::Index argmax = 0;
                out.row(r).maxCoeff(&argmax);
                pred_cls.push_back(static_cast<int>(argmax));
                gold_cls.push_back(win.labels[t].expr);
            } else {
                pred_v.push_back(out(r, 0));
                pred_a.push_back(out(r, 1));
                gold_v.push_back(win.labels[t].valence);
                gold_a.push_back(win.labels[t].arousal);
            }
        }
    }
    if (model.task == Task::Expr) {
        if (!pred_cls.empty()) log.val_accuracy = accuracy(pred_cls, gold_cls);
        log.val_metric = log.val_accuracy;
    } else {
        if (pred_v.size() >= 2) {
            log.val_ccc_v = ccc(pred_v, gold_v);
            log.val_ccc_a = ccc(pred_a, gold_a);
        }
        log.val_metric = std::min(log.val_ccc_v, log.val_ccc_a);
    }
    return log;
}

FitResult fit(SeqModel& model, const std::vector<SequenceWindow>& train,
              const std::vector<SequenceWindow>& val, const EmbeddingTable* table,
              const TrainConfig& cfg) {
    cfg.validate();
    if (train.empty()) throw std::invalid_argument("fit: no training windows");
    for (const SequenceWindow& win : train)
        if (win.features.cols() != model.lstm.input_dim)
            throw std::invalid_argument("fit: window feature dim does not match model");
    if (model.task == Task::Expr && cfg.lambda_emb > 0.0 && model.emb_projection && !table)
        throw ConfigError("fit: embedding loss enabled but no table provided");

    Rng rng(cfg.seed);
    Eigen::VectorXd params = flatten_params(model);
    AdamState adam;
    FitResult result;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates on the seeded stream keeps runs reproducible.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1],
                      order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            Eigen::VectorXd grad_acc = Eigen::VectorXd::Zero(params.size());
            std::size_t contributing = 0;

            for (std::size_t k = begin; k < end; ++k) {
                const SequenceWindow& win = train[order[k]];
                ForwardCache cache;
                const Eigen::MatrixXd out = bilstm_forward(win.features, model, &cache);
                const WindowLoss wl = window_loss(win, out, model, table, cfg);
                if (!wl.contributes) continue;
                ++contributing;
                loss_sum += wl.value;
                ++loss_count;
                const SeqGradients grads = seq_backward(wl.grad_outputs, cache, model);
                const Eigen::MatrixXd* proj_grad =
                    wl.grad_proj.size() > 0 ? &wl.grad_proj : nullptr;
                grad_acc += flatten_grads(grads, model, proj_grad);
            }
            if (contributing == 0) continue;
            grad_acc /= static_cast<double>(contributing);

            const double norm = grad_acc.norm();
            if (norm > cfg.gradient_clip_norm)
                grad_acc *= cfg.gradient_clip_norm / norm;
            optimizer_step(params, grad_acc, cfg, adam);
            set_params(model, params);
        }

        EpochLog log = val.empty() ? EpochLog{} : evaluate_windows(model, val);
        log.epoch = epoch;
        log.train_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        if (!std::isfinite(log.train_loss))
            throw std::runtime_error("fit: training diverged (loss is not finite) at epoch " +
                                     std::to_string(epoch));
        result.epochs.push_back(log);
        if (result.best_epoch < 0 || log.val_metric > result.best_metric) {
            result.best_metric = log.val_metric;
            result.best_epoch = epoch;
        }
        if (cfg.stop_at_metric >= 0.0 && log.val_metric >= cfg.stop_at_metric) break;
    }
    return result;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

json train_config_json(const TrainConfig& cfg) {
    return json{{"learning_rate", cfg.learning_rate},
                {"batch_size", cfg.batch_size},
                {"epochs", cfg.epochs},
                {"seed", cfg.seed},
                {"gradient_clip_norm", cfg.gradient_clip_norm},
                {"optimizer", cfg.optimizer},
                {"lambda_emb", cfg.lambda_emb},
                {"va_mse_weight", cfg.va_mse_weight},
                {"stop_at_metric", cfg.stop_at_metric}};
}

}  // namespace

void save_checkpoint(const std::string& path, const SeqModel& model, const TrainConfig* cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("checkpoint: cannot write " + path);
    out.write("SEQM", 4);
    put_u32(out, 1);  // version
    put_u32(out, static_cast<std::uint32_t>(model.lstm.input_dim));
    put_u32(out, static_cast<std::uint32_t>(model.lstm.hidden_dim));
    put_u32(out, model.task == Task::Expr ? 0u : 1u);
    put_u32(out, model.lstm.bidirectional ? 1u : 0u);
    put_u32(out, model.emb_projection
                     ? static_cast<std::uint32_t>(model.emb_projection->rows())
                     : 0u);
    const Eigen::VectorXd flat = flatten_params(model);
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!out) throw DataError("checkpoint: write failed for " + path);

    if (cfg) {
        std::ofstream sidecar(path + ".json");
        if (!sidecar) throw DataError("checkpoint: cannot write " + path + ".json");
        sidecar << train_config_json(*cfg).dump(2) << '\n';
    }
}

SeqModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::strncmp(magic, "SEQM", 4) != 0)
        throw DataError("checkpoint: " + path + " is not a SEQM file");
    const std::uint32_t version = get_u32(in);
    if (version != 1) throw DataError("checkpoint: unsupported version");
    const int input_dim = static_cast<int>(get_u32(in));
    const int hidden_dim = static_cast<int>(get_u32(in));
    const Task task = get_u32(in) == 0 ? Task::Expr : Task::Va;
    const bool bidirectional = get_u32(in) != 0;
    const int emb_dim = static_cast<int>(get_u32(in));
    if (!in) throw DataError("checkpoint: truncated header in " + path);

    Rng rng(0);
    SeqModel model = SeqModel::init(task, input_dim, hidden_dim, rng, bidirectional, emb_dim);
    Eigen::VectorXd flat(static_cast<Eigen::Index>(param_count(model)));
    in.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint: truncated payload in " + path);
    set_params(model, flat);
    return model;
}

}  // namespace affectseq
