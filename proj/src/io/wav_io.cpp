#include "affectseq/io/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace affectseq::io {

namespace {

std::uint32_t le32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

Waveform read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("wav: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw DataError("wav: " + path + " is not a RIFF/WAVE file");

    int channels = 0;
    int bits = 0;
    double rate = 0.0;
    std::size_t data_begin = 0, data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t chunk_size = le32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_size < 16 || body + 16 > bytes.size())
                throw DataError("wav: malformed fmt chunk in " + path);
            const std::uint16_t format = le16(bytes.data() + body);
            channels = le16(bytes.data() + body + 2);
            rate = le32(bytes.data() + body + 4);
            bits = le16(bytes.data() + body + 14);
            if (format != 1) throw DataError("wav: only PCM (format 1) supported");
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_begin = body;
            data_size = std::min<std::size_t>(chunk_size, bytes.size() - body);
        }
        pos = body + chunk_size + (chunk_size & 1);  // chunks are word aligned
    }
    if (channels == 0 || rate <= 0.0) throw DataError("wav: missing fmt chunk in " + path);
    if (bits != 16) throw DataError("wav: only 16-bit PCM supported");
    if (channels != 1 && channels != 2) throw DataError("wav: only mono or stereo supported");
    if (data_begin == 0) throw DataError("wav: missing data chunk in " + path);

    const std::size_t n_frames = data_size / (2 * channels);
    Waveform w;
    w.sample_rate = rate;
    w.samples.resize(n_frames);
    const unsigned char* p = bytes.data() + data_begin;
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const std::int16_t s =
                static_cast<std::int16_t>(le16(p + (i * channels + c) * 2));
            acc += static_cast<double>(s) / 32768.0;
        }
        w.samples[i] = acc / channels;
    }
    return w;
}

void write_wav(const std::string& path, const Waveform& w) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("wav: cannot write " + path);
    const std::uint32_t data_size = static_cast<std::uint32_t>(w.samples.size() * 2);
    const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(w.sample_rate));

    auto put32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto put16 = [&](std::uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff)};
        out.write(reinterpret_cast<char*>(b), 2);
    };

    out.write("RIFF", 4);
    put32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put32(16);
    put16(1);  // PCM
    put16(1);  // mono
    put32(rate);
    put32(rate * 2);  // byte rate
    put16(2);         // block align
    put16(16);        // bits per sample
    out.write("data", 4);
    put32(data_size);
    for (double s : w.samples) {
        const double clamped = std::clamp(s, -1.0, 1.0);
        const std::int16_t q = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
        put16(static_cast<std::uint16_t>(q));
    }
}

Waveform resample_linear(const Waveform& w, double target_rate) {
    if (target_rate <= 0.0) throw ConfigError("resample: target rate must be positive");
    if (w.sample_rate == target_rate || w.samples.empty()) {
        Waveform out = w;
        out.sample_rate = target_rate;
        return out;
    }
    const double ratio = w.sample_rate / target_rate;
    const std::size_t n_out = static_cast<std::size_t>(
        std::floor(static_cast<double>(w.samples.size() - 1) / ratio)) + 1;
    Waveform out;
    out.sample_rate = target_rate;
    out.samples.resize(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        const double pos = i * ratio;
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, w.samples.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        out.samples[i] = w.samples[lo] * (1.0 - frac) + w.samples[hi] * frac;
    }
    return out;
}

}  // namespace affectseq::io
