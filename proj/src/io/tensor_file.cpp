#include "affectseq/io/tensor_file.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace affectseq::io {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

}  // namespace

void write_matrix(const std::string& path, const char* magic, const Eigen::MatrixXd& values,
                  std::uint32_t aux0, std::uint32_t aux1) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("tensor file: cannot write " + path);
    out.write(magic, 4);
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(values.rows()));
    put_u32(out, static_cast<std::uint32_t>(values.cols()));
    put_u32(out, aux0);
    put_u32(out, aux1);
    std::vector<float> row(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c)
            row[static_cast<std::size_t>(c)] = static_cast<float>(values(r, c));
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw DataError("tensor file: write failed for " + path);
}

Eigen::MatrixXd read_matrix(const std::string& path, const char* expected_magic,
                            TensorHeader* header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("tensor file: cannot open " + path);
    TensorHeader h;
    in.read(h.magic, 4);
    if (!in || std::strncmp(h.magic, expected_magic, 4) != 0)
        throw DataError("tensor file: " + path + " is not a " + expected_magic + " file");
    h.version = get_u32(in);
    h.rows = get_u32(in);
    h.cols = get_u32(in);
    h.aux0 = get_u32(in);
    h.aux1 = get_u32(in);
    if (!in) throw DataError("tensor file: truncated header in " + path);
    if (h.version != 1)
        throw DataError("tensor file: unsupported version in " + path);

    Eigen::MatrixXd values(h.rows, h.cols);
    std::vector<float> row(h.cols);
    for (std::uint32_t r = 0; r < h.rows; ++r) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw DataError("tensor file: truncated payload in " + path);
        for (std::uint32_t c = 0; c < h.cols; ++c) values(r, c) = row[c];
    }
    if (header) *header = h;
    return values;
}

}  // namespace affectseq::io
