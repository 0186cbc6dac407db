#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "affectseq/common.hpp"

namespace affectseq::io {

// Shared binary matrix container used by the "MELS" and "EMBD" formats:
// a 24-byte header, then row-major float32 values.
//   bytes 0..3   magic
//   bytes 4..7   version (u32, little endian)
//   bytes 8..11  rows
//   bytes 12..15 cols
//   bytes 16..19 aux0   (MELS: sample_rate, EMBD: 0)
//   bytes 20..23 aux1   (MELS: hop_length, EMBD: 0)
struct TensorHeader {
    char magic[5] = {0};
    std::uint32_t version = 1;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint32_t aux0 = 0;
    std::uint32_t aux1 = 0;
};

void write_matrix(const std::string& path, const char* magic, const Eigen::MatrixXd& values,
                  std::uint32_t aux0 = 0, std::uint32_t aux1 = 0);

Eigen::MatrixXd read_matrix(const std::string& path, const char* expected_magic,
                            TensorHeader* header = nullptr);

}  // namespace affectseq::io
