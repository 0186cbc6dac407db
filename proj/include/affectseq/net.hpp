#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "affectseq/common.hpp"
#include "affectseq/data.hpp"
#include "affectseq/losses.hpp"

namespace affectseq {

// One LSTM direction. Gate rows are stacked input, forget, cell, output;
// rows [g*h, (g+1)*h) of each matrix belong to gate g in that order.
struct LstmDirParams {
    Eigen::MatrixXd w_input;  // 4h x d_in
    Eigen::MatrixXd w_recur;  // 4h x h
    Eigen::VectorXd bias;     // 4h
};

struct LstmParams {
    int input_dim = 0;
    int hidden_dim = 0;
    bool bidirectional = true;
    LstmDirParams fwd;
    LstmDirParams bwd;  // unused when bidirectional is false
};

struct LstmCellResult {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
    // Gate activations, each of size h.
    Eigen::VectorXd gate_i, gate_f, gate_g, gate_o;
};

// Single cell step: gates from W x + U h_prev + b, then
// c = f.c_prev + i.g and h = o.tanh(c). Fails fast on non-finite input.
LstmCellResult lstm_cell_forward(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                                 const Eigen::VectorXd& c_prev, const LstmDirParams& p);

// Bidirectional single-layer LSTM with a per-frame linear head.
// The expression head emits raw logits; the VA head applies tanh so outputs
// stay inside the label range (-1, 1).
struct SeqModel {
    Task task = Task::Expr;
    LstmParams lstm;
    Eigen::MatrixXd head_w;  // n_out x (2h or h)
    Eigen::VectorXd head_b;  // n_out
    std::optional<Eigen::MatrixXd> emb_projection;  // d_t x d_in

    int n_out() const { return task == Task::Expr ? kExprClasses : 2; }
    int concat_dim() const {
        return lstm.bidirectional ? 2 * lstm.hidden_dim : lstm.hidden_dim;
    }

    // Weights uniform in +-1/sqrt(h), forget-gate bias +1, other biases 0.
    static SeqModel init(Task task, int input_dim, int hidden_dim, Rng& rng,
                         bool bidirectional = true, int emb_dim = 0);
};

// Per-direction forward tape for backpropagation through time.
struct DirCache {
    Eigen::MatrixXd x;       // T x d_in, in this direction's time order
    Eigen::MatrixXd h;       // T x h
    Eigen::MatrixXd c;       // T x h
    Eigen::MatrixXd tanh_c;  // T x h
    Eigen::MatrixXd gate_i, gate_f, gate_g, gate_o;  // T x h
};

struct ForwardCache {
    DirCache fwd;
    DirCache bwd;
    Eigen::MatrixXd concat;   // T x concat_dim
    Eigen::MatrixXd outputs;  // T x n_out, after the head nonlinearity
};

// Seq2seq forward pass from zero initial states; one output row per frame.
Eigen::MatrixXd bilstm_forward(const Eigen::MatrixXd& xs, const SeqModel& model,
                               ForwardCache* cache = nullptr);

struct SeqGradients {
    LstmDirParams fwd;
    LstmDirParams bwd;
    Eigen::MatrixXd head_w;
    Eigen::VectorXd head_b;
    Eigen::MatrixXd inputs;  // T x d_in
};

// Exact reverse-mode gradients. grad_outputs is d loss / d outputs where
// outputs are what bilstm_forward returned (the VA tanh is handled here).
SeqGradients seq_backward(const Eigen::MatrixXd& grad_outputs, const ForwardCache& cache,
                          const SeqModel& model);

// Parameter vector layout (also the checkpoint payload order):
// fwd.W, fwd.U, fwd.b, [bwd.W, bwd.U, bwd.b,] head_w, head_b, [emb_projection]
// with matrices in Eigen's column-major order.
Eigen::VectorXd flatten_params(const SeqModel& model);
void set_params(SeqModel& model, const Eigen::VectorXd& flat);
Eigen::VectorXd flatten_grads(const SeqGradients& grads, const SeqModel& model,
                              const Eigen::MatrixXd* grad_proj = nullptr);

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 8;
    int epochs = 50;
    std::uint64_t seed = 0;
    double gradient_clip_norm = 5.0;
    std::string optimizer = "adam";  // "adam" or "sgd"
    double lambda_emb = 1.0;         // expression task only
    double va_mse_weight = 0.0;      // optional MSE term next to the CCC loss
    // Stop once the validation metric (expr: accuracy, va: min ccc) reaches
    // this value; negative disables.
    double stop_at_metric = -1.0;

    void validate() const;
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
    double val_ccc_v = 0.0;
    double val_ccc_a = 0.0;
    double val_metric = 0.0;
};

struct FitResult {
    std::vector<EpochLog> epochs;
    double best_metric = 0.0;
    int best_epoch = -1;
};

// Deterministic mini-batch training. Per-frame losses skip padded and
// sentinel-labeled frames; windows with fewer than two usable frames
// contribute nothing to the CCC loss. Aborts with an error on NaN loss.
FitResult fit(SeqModel& model, const std::vector<SequenceWindow>& train,
              const std::vector<SequenceWindow>& val, const EmbeddingTable* table,
              const TrainConfig& cfg);

// Binary checkpoint: "SEQM" header with dims and task, then the parameter
// vector as little-endian float64. A JSON sidecar (path + ".json") carries
// the train config when one is supplied.
void save_checkpoint(const std::string& path, const SeqModel& model,
                     const TrainConfig* cfg = nullptr);
SeqModel load_checkpoint(const std::string& path);

// Validation metrics on a window set (expr: frame accuracy; va: CCC of the
// concatenated valid frames).
EpochLog evaluate_windows(const SeqModel& model, const std::vector<SequenceWindow>& windows);

}  // namespace affectseq
