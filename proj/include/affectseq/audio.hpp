#pragma once

#include <Eigen/Dense>
#include <vector>

#include "affectseq/common.hpp"

namespace affectseq {

struct Waveform {
    std::vector<double> samples;
    double sample_rate = 16000.0;
};

struct MelConfig {
    int sample_rate = 16000;
    int win_length = 1024;
    int hop_length = 256;
    int n_fft = 1024;
    int n_mels = 64;
    double f_min = 0.0;
    double f_max = 8000.0;
    double log_floor = 1e-10;

    int n_bins() const { return n_fft / 2 + 1; }
    int frame_count(std::size_t n_samples) const;
    void validate() const;  // throws ConfigError
};

// Log10-power mel features, frames x n_mels, self-describing via config.
struct MelSpectrogram {
    Eigen::MatrixXd values;
    MelConfig config;
};

// HTK mel scale, m = 2595 log10(1 + f / 700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Squared-magnitude DFT per frame: frames x (n_fft/2 + 1). Frame t covers
// samples [t*hop, t*hop + win) under a periodic Hann window; no padding, so
// the waveform must hold at least win_length samples.
Eigen::MatrixXd stft_power(const Waveform& w, const MelConfig& cfg);

// Triangular filters, n_mels x (n_fft/2 + 1). Centers are uniform on the mel
// scale between f_min and f_max; each row is peak-normalized to exactly 1.
Eigen::MatrixXd mel_filterbank(const MelConfig& cfg);

// log10(filterbank * power + log_floor) per frame.
MelSpectrogram melspectrogram(const Waveform& w, const MelConfig& cfg);

}  // namespace affectseq
