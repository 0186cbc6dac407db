#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "affectseq/common.hpp"
#include "affectseq/geometry.hpp"

namespace affectseq {

// Per-frame annotation. expr == -1 and valence/arousal == -5 are the
// unannotated sentinels; sentinel frames never reach a loss or metric.
struct FrameRecord {
    int frame_index = 0;
    int expr = kExprSentinel;
    double valence = kVaSentinel;
    double arousal = kVaSentinel;

    bool has_expr() const { return expr != kExprSentinel; }
    bool has_va() const { return valence != kVaSentinel && arousal != kVaSentinel; }
    bool has_label(Task task) const { return task == Task::Expr ? has_expr() : has_va(); }
};

// Fixed-length slice of a video. Padded frames repeat the last real frame
// and carry valid = false.
struct SequenceWindow {
    Eigen::MatrixXd features;  // T x d_in
    std::vector<FrameRecord> labels;
    std::vector<bool> valid;
    std::string video_id;

    int length() const { return static_cast<int>(features.rows()); }
};

// Pose JSON: a single object or an array of objects, each
//   {"frame_index": int, "pose_keypoints_2d": [75 numbers]}
// in BODY25 order x1,y1,c1,...,x25,y25,c25. The result is indexed by
// frame_index; frames missing from the file are nullopt.
std::vector<std::optional<KeypointSet>> parse_pose_json(const std::string& path);
std::string pose_to_json(const std::vector<KeypointSet>& frames);

// Annotation / prediction CSV. Headers:
//   expr gold:        frame_index,expr
//   expr predictions: frame_index,expr,p0,...,p6   (probability columns)
//   va:               frame_index,valence,arousal
struct PredictionFile {
    Task task = Task::Expr;
    std::vector<FrameRecord> records;
    Eigen::MatrixXd probs;  // rows match records when has_probs
    bool has_probs = false;
};

PredictionFile read_predictions(const std::string& path);
void write_predictions(const std::string& path, const PredictionFile& file);

// Windows start at 0, stride, 2*stride, ... while the start lies inside the
// video; a final partial window is padded with the last frame, valid = false.
std::vector<SequenceWindow> make_windows(const Eigen::MatrixXd& features,
                                         const std::vector<FrameRecord>& records,
                                         int window, int stride,
                                         const std::string& video_id = "");

struct SynthConfig {
    std::uint64_t seed = 0;
    int n_videos = 20;
    int frames_per_video = 256;
    Task task = Task::Expr;
    int dim = 32;
    // NaN selects the per-task default: 0.5 for expr, 0.1 for va.
    double noise_sigma = std::numeric_limits<double>::quiet_NaN();
};

struct SynthDataset {
    std::vector<std::string> video_ids;
    std::vector<Eigen::MatrixXd> features;
    std::vector<std::vector<FrameRecord>> records;

    // Class means (expr) or the 2-column feature lift (va) used to build the
    // features; exposed so tests can invert the construction.
    Eigen::MatrixXd generator_basis;
};

// Deterministic desk-scale dataset. Expression videos are runs of a single
// class whose mean separation is below the per-frame noise, so the class is
// recoverable only from temporal context. VA videos follow a smoothed,
// clipped random walk linearly lifted into feature space.
SynthDataset synth_dataset(const SynthConfig& cfg);

// File-backed or synthetic per-frame feature vectors for one stream.
class EmbeddingProvider {
public:
    // Binary "EMBD" file; rows of NaN mark absent frames.
    static EmbeddingProvider from_file(const std::string& path);
    static EmbeddingProvider synthetic(std::uint64_t seed, int frames, int dim);

    int frames() const { return static_cast<int>(values_.rows()); }
    int dim() const { return static_cast<int>(values_.cols()); }
    std::optional<Eigen::VectorXd> frame(int index) const;

private:
    Eigen::MatrixXd values_;
};

}  // namespace affectseq
