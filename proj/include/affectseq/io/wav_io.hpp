#pragma once

#include <string>

#include "affectseq/audio.hpp"

namespace affectseq::io {

// 16-bit PCM WAV. Stereo files are averaged down to mono; samples are scaled
// to [-1, 1].
Waveform read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& w);

// Linear-interpolation resample; returns the input when rates already match.
Waveform resample_linear(const Waveform& w, double target_rate);

}  // namespace affectseq::io
