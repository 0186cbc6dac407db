#include "affectseq/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "affectseq/io/tensor_file.hpp"

namespace affectseq {

using nlohmann::json;

namespace {

KeypointSet keypoints_from_flat(const json& arr, int frame_index) {
    if (!arr.is_array() || arr.size() != 3 * kBodyJointCount)
        throw DataError("pose: frame " + std::to_string(frame_index) + " has " +
                        std::to_string(arr.size()) + " values, expected " +
                        std::to_string(3 * kBodyJointCount));
    KeypointSet kps;
    kps.frame_index = frame_index;
    for (int j = 0; j < kBodyJointCount; ++j) {
        Keypoint& kp = kps.joints[static_cast<std::size_t>(j)];
        kp.x = arr[3 * j].get<double>();
        kp.y = arr[3 * j + 1].get<double>();
        kp.confidence = arr[3 * j + 2].get<double>();
        if (!std::isfinite(kp.x) || !std::isfinite(kp.y) || !std::isfinite(kp.confidence))
            throw DataError("pose: non-finite value at frame " + std::to_string(frame_index));
        if (kp.confidence < 0.0 || kp.confidence > 1.0)
            throw DataError("pose: confidence outside [0,1] at frame " +
                            std::to_string(frame_index));
    }
    return kps;
}

}  // namespace

std::vector<std::optional<KeypointSet>> parse_pose_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("pose: cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw DataError("pose: malformed JSON in " + path + ": " + e.what());
    }

    const json frames = doc.is_array() ? doc : json::array({doc});
    int max_index = -1;
    std::vector<std::pair<int, KeypointSet>> parsed;
    for (const json& frame : frames) {
        if (!frame.is_object() || !frame.contains("frame_index") ||
            !frame.contains("pose_keypoints_2d"))
            throw DataError("pose: each frame needs frame_index and pose_keypoints_2d (" +
                            path + ")");
        const int index = frame["frame_index"].get<int>();
        if (index < 0) throw DataError("pose: negative frame_index in " + path);
        parsed.emplace_back(index, keypoints_from_flat(frame["pose_keypoints_2d"], index));
        max_index = std::max(max_index, index);
    }

    std::vector<std::optional<KeypointSet>> result(static_cast<std::size_t>(max_index + 1));
    for (auto& [index, kps] : parsed)
        result[static_cast<std::size_t>(index)] = std::move(kps);
    return result;
}

std::string pose_to_json(const std::vector<KeypointSet>& frames) {
    json arr = json::array();
    for (const KeypointSet& kps : frames) {
        json flat = json::array();
        for (const Keypoint& kp : kps.joints) {
            flat.push_back(kp.x);
            flat.push_back(kp.y);
            flat.push_back(kp.confidence);
        }
        arr.push_back({{"frame_index", kps.frame_index}, {"pose_keypoints_2d", flat}});
    }
    return arr.dump(2);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

PredictionFile read_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("csv: " + path + " is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line);
    PredictionFile file;
    if (header.size() >= 2 && header[0] == "frame_index" && header[1] == "expr") {
        file.task = Task::Expr;
        file.has_probs = header.size() > 2;
        if (file.has_probs && header.size() != 2 + kExprClasses)
            throw DataError("csv: " + path + " has a partial probability header");
    } else if (header.size() == 3 && header[0] == "frame_index" && header[1] == "valence" &&
               header[2] == "arousal") {
        file.task = Task::Va;
    } else {
        throw DataError("csv: unrecognized header in " + path);
    }

    std::vector<std::vector<double>> prob_rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        const std::size_t expected = file.task == Task::Va ? 3u
                                     : (file.has_probs ? 2u + kExprClasses : 2u);
        if (fields.size() != expected)
            throw DataError("csv: wrong column count at " + path + ":" +
                            std::to_string(line_no));
        try {
            FrameRecord rec;
            rec.frame_index = std::stoi(fields[0]);
            if (file.task == Task::Expr) {
                rec.expr = std::stoi(fields[1]);
                if (rec.expr != kExprSentinel && (rec.expr < 0 || rec.expr >= kExprClasses))
                    throw DataError("csv: expr label out of range at " + path + ":" +
                                    std::to_string(line_no));
                if (file.has_probs) {
                    std::vector<double> probs(kExprClasses);
                    for (int c = 0; c < kExprClasses; ++c)
                        probs[static_cast<std::size_t>(c)] = std::stod(fields[2 + c]);
                    prob_rows.push_back(std::move(probs));
                }
            } else {
                rec.valence = std::stod(fields[1]);
                rec.arousal = std::stod(fields[2]);
            }
            file.records.push_back(rec);
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError("csv: unparsable number at " + path + ":" +
                            std::to_string(line_no));
        }
    }

    if (file.has_probs) {
        file.probs.resize(static_cast<Eigen::Index>(prob_rows.size()), kExprClasses);
        for (std::size_t r = 0; r < prob_rows.size(); ++r)
            for (int c = 0; c < kExprClasses; ++c)
                file.probs(static_cast<Eigen::Index>(r), c) = prob_rows[r][c];
    }
    return file;
}

void write_predictions(const std::string& path, const PredictionFile& file) {
    std::ofstream out(path);
    if (!out) throw DataError("csv: cannot write " + path);
    if (file.task == Task::Expr) {
        out << "frame_index,expr";
        if (file.has_probs)
            for (int c = 0; c < kExprClasses; ++c) out << ",p" << c;
        out << '\n';
        for (std::size_t i = 0; i < file.records.size(); ++i) {
            out << file.records[i].frame_index << ',' << file.records[i].expr;
            if (file.has_probs)
                for (int c = 0; c < kExprClasses; ++c)
                    out << ',' << format_double(file.probs(static_cast<Eigen::Index>(i), c));
            out << '\n';
        }
    } else {
        out << "frame_index,valence,arousal\n";
        for (const FrameRecord& rec : file.records)
            out << rec.frame_index << ',' << format_double(rec.valence) << ','
                << format_double(rec.arousal) << '\n';
    }
    if (!out) throw DataError("csv: write failed for " + path);
}

std::vector<SequenceWindow> make_windows(const Eigen::MatrixXd& features,
                                         const std::vector<FrameRecord>& records,
                                         int window, int stride,
                                         const std::string& video_id) {
    if (window < 1 || stride < 1)
        throw std::invalid_argument("make_windows: window and stride must be >= 1");
    if (static_cast<std::size_t>(features.rows()) != records.size())
        throw std::invalid_argument("make_windows: feature/record count mismatch");

    const int n = static_cast<int>(records.size());
    std::vector<SequenceWindow> windows;
    for (int start = 0; start < n; start += stride) {
        SequenceWindow win;
        win.video_id = video_id;
        win.features.resize(window, features.cols());
        win.labels.resize(static_cast<std::size_t>(window));
        win.valid.resize(static_cast<std::size_t>(window));
        for (int t = 0; t < window; ++t) {
            const int src = std::min(start + t, n - 1);  // pad by repeating the last frame
            win.features.row(t) = features.row(src);
            win.labels[static_cast<std::size_t>(t)] = records[static_cast<std::size_t>(src)];
            win.valid[static_cast<std::size_t>(t)] = start + t < n;
        }
        windows.push_back(std::move(win));
    }
    return windows;
}

SynthDataset synth_dataset(const SynthConfig& cfg) {
    if (cfg.n_videos < 1 || cfg.frames_per_video < 1 || cfg.dim < 1)
        throw std::invalid_argument("synth_dataset: sizes must be positive");
    const double sigma = std::isnan(cfg.noise_sigma)
                             ? (cfg.task == Task::Expr ? 0.5 : 0.1)
                             : cfg.noise_sigma;

    Rng rng(cfg.seed);
    SynthDataset out;

    if (cfg.task == Task::Expr) {
        // Class means drawn once; separation stays below the per-frame noise
        // so single frames are ambiguous while short runs are not.
        Eigen::MatrixXd means(kExprClasses, cfg.dim);
        for (int c = 0; c < kExprClasses; ++c)
            for (int d = 0; d < cfg.dim; ++d) means(c, d) = rng.uniform(-0.4, 0.4);
        out.generator_basis = means;

        for (int v = 0; v < cfg.n_videos; ++v) {
            Eigen::MatrixXd feats(cfg.frames_per_video, cfg.dim);
            std::vector<FrameRecord> recs(static_cast<std::size_t>(cfg.frames_per_video));
            int t = 0;
            while (t < cfg.frames_per_video) {
                const int run = std::min(rng.uniform_int(24, 56), cfg.frames_per_video - t);
                const int cls = rng.uniform_int(0, kExprClasses - 1);
                for (int i = 0; i < run; ++i, ++t) {
                    for (int d = 0; d < cfg.dim; ++d)
                        feats(t, d) = means(cls, d) + sigma * rng.normal();
                    recs[static_cast<std::size_t>(t)].frame_index = t;
                    recs[static_cast<std::size_t>(t)].expr = cls;
                }
            }
            char id[32];
            std::snprintf(id, sizeof(id), "synth%03d", v);
            out.video_ids.emplace_back(id);
            out.features.push_back(std::move(feats));
            out.records.push_back(std::move(recs));
        }
        return out;
    }

    // VA: smoothed random walks lifted linearly into feature space.
    Eigen::MatrixXd lift(cfg.dim, 2);
    for (int d = 0; d < cfg.dim; ++d)
        for (int j = 0; j < 2; ++j) lift(d, j) = 0.7 * rng.normal();
    out.generator_basis = lift;

    constexpr int kSmoothHalf = 4;
    for (int v = 0; v < cfg.n_videos; ++v) {
        Eigen::MatrixXd walk(cfg.frames_per_video, 2);
        for (int j = 0; j < 2; ++j) {
            double value = rng.uniform(-0.5, 0.5);
            for (int t = 0; t < cfg.frames_per_video; ++t) {
                value = std::clamp(value + 0.12 * rng.normal(), -1.0, 1.0);
                walk(t, j) = value;
            }
        }
        // Centered moving average; window shrinks at the edges.
        Eigen::MatrixXd smooth(cfg.frames_per_video, 2);
        for (int t = 0; t < cfg.frames_per_video; ++t) {
            const int lo = std::max(0, t - kSmoothHalf);
            const int hi = std::min(cfg.frames_per_video - 1, t + kSmoothHalf);
            smooth.row(t) = walk.middleRows(lo, hi - lo + 1).colwise().mean();
        }

        Eigen::MatrixXd feats(cfg.frames_per_video, cfg.dim);
        std::vector<FrameRecord> recs(static_cast<std::size_t>(cfg.frames_per_video));
        for (int t = 0; t < cfg.frames_per_video; ++t) {
            Eigen::VectorXd noise(cfg.dim);
            for (int d = 0; d < cfg.dim; ++d) noise(d) = sigma * rng.normal();
            feats.row(t) = (lift * smooth.row(t).transpose() + noise).transpose();
            recs[static_cast<std::size_t>(t)].frame_index = t;
            recs[static_cast<std::size_t>(t)].valence = smooth(t, 0);
            recs[static_cast<std::size_t>(t)].arousal = smooth(t, 1);
        }
        char id[32];
        std::snprintf(id, sizeof(id), "synth%03d", v);
        out.video_ids.emplace_back(id);
        out.features.push_back(std::move(feats));
        out.records.push_back(std::move(recs));
    }
    return out;
}

EmbeddingProvider EmbeddingProvider::from_file(const std::string& path) {
    EmbeddingProvider provider;
    provider.values_ = io::read_matrix(path, "EMBD");
    return provider;
}

EmbeddingProvider EmbeddingProvider::synthetic(std::uint64_t seed, int frames, int dim) {
    Rng rng(seed);
    EmbeddingProvider provider;
    provider.values_.resize(frames, dim);
    for (int t = 0; t < frames; ++t)
        for (int d = 0; d < dim; ++d) provider.values_(t, d) = rng.normal();
    return provider;
}

std::optional<Eigen::VectorXd> EmbeddingProvider::frame(int index) const {
    if (index < 0 || index >= frames())
        throw std::invalid_argument("embedding provider: frame index out of range");
    const Eigen::VectorXd row = values_.row(index).transpose();
    if (row.hasNaN()) return std::nullopt;  // NaN rows mark absent frames
    return row;
}

}  // namespace affectseq
