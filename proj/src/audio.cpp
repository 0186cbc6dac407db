#include "affectseq/audio.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace affectseq {

namespace {
// FFTW plan creation is not thread-safe; execution is.
std::mutex g_fftw_plan_mutex;
}  // namespace

int MelConfig::frame_count(std::size_t n_samples) const {
    if (n_samples < static_cast<std::size_t>(win_length)) return 0;
    return 1 + static_cast<int>((n_samples - win_length) / hop_length);
}

void MelConfig::validate() const {
    if (sample_rate <= 0) throw ConfigError("mel: sample_rate must be positive");
    if (n_fft <= 0) throw ConfigError("mel: n_fft must be positive");
    if (!(hop_length > 0 && hop_length <= win_length && win_length <= n_fft))
        throw ConfigError("mel: need 0 < hop_length <= win_length <= n_fft");
    if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0))
        throw ConfigError("mel: need 0 <= f_min < f_max <= sample_rate/2");
    if (n_mels < 1) throw ConfigError("mel: n_mels must be >= 1");
    if (log_floor <= 0.0) throw ConfigError("mel: log_floor must be positive");
}

double hz_to_mel(double hz) {
    return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
    return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Eigen::MatrixXd stft_power(const Waveform& w, const MelConfig& cfg) {
    cfg.validate();
    if (w.samples.size() < static_cast<std::size_t>(cfg.win_length))
        throw DataError("stft: waveform too short (" + std::to_string(w.samples.size()) +
                        " samples, window needs " + std::to_string(cfg.win_length) + ")");
    for (double s : w.samples)
        if (!std::isfinite(s)) throw DataError("stft: non-finite sample");

    const int frames = cfg.frame_count(w.samples.size());
    const int bins = cfg.n_bins();

    // Periodic Hann window over win_length samples.
    std::vector<double> window(cfg.win_length);
    for (int n = 0; n < cfg.win_length; ++n)
        window[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / cfg.win_length);

    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;
    {
        std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
        in = fftw_alloc_real(cfg.n_fft);
        out = fftw_alloc_complex(bins);
        plan = fftw_plan_dft_r2c_1d(cfg.n_fft, in, out, FFTW_ESTIMATE);
    }

    Eigen::MatrixXd power(frames, bins);
    for (int t = 0; t < frames; ++t) {
        const double* frame = w.samples.data() + static_cast<std::size_t>(t) * cfg.hop_length;
        for (int n = 0; n < cfg.win_length; ++n) in[n] = frame[n] * window[n];
        for (int n = cfg.win_length; n < cfg.n_fft; ++n) in[n] = 0.0;
        fftw_execute(plan);
        for (int k = 0; k < bins; ++k)
            power(t, k) = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    }

    {
        std::lock_guard<std::mutex> lock(g_fftw_plan_mutex);
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
    return power;
}

Eigen::MatrixXd mel_filterbank(const MelConfig& cfg) {
    cfg.validate();
    const int bins = cfg.n_bins();
    const double mel_lo = hz_to_mel(cfg.f_min);
    const double mel_hi = hz_to_mel(cfg.f_max);

    // n_mels + 2 uniformly spaced mel points; filter m peaks at point m + 1.
    std::vector<double> edges_hz(cfg.n_mels + 2);
    for (int i = 0; i < cfg.n_mels + 2; ++i)
        edges_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));

    Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, bins);
    const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.n_fft;
    for (int m = 0; m < cfg.n_mels; ++m) {
        const double lo = edges_hz[m];
        const double center = edges_hz[m + 1];
        const double hi = edges_hz[m + 2];
        double peak = 0.0;
        for (int k = 0; k < bins; ++k) {
            const double f = k * bin_hz;
            double weight = 0.0;
            if (f > lo && f < hi)
                weight = f <= center ? (f - lo) / (center - lo) : (hi - f) / (hi - center);
            fb(m, k) = weight;
            peak = std::max(peak, weight);
        }
        if (peak <= 0.0)
            throw ConfigError("mel: filter " + std::to_string(m) +
                              " has no FFT bin support (n_mels too large for n_fft)");
        fb.row(m) /= peak;
    }
    return fb;
}

MelSpectrogram melspectrogram(const Waveform& w, const MelConfig& cfg) {
    const Eigen::MatrixXd power = stft_power(w, cfg);
    const Eigen::MatrixXd fb = mel_filterbank(cfg);
    MelSpectrogram mel;
    mel.config = cfg;
    mel.values = ((power * fb.transpose()).array() + cfg.log_floor).log10().matrix();
    return mel;
}

}  // namespace affectseq
