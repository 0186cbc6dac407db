#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "affectseq/common.hpp"

namespace affectseq {

inline constexpr int kBodyJointCount = 25;

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;
};

// BODY25 joint set for one frame.
struct KeypointSet {
    std::array<Keypoint, kBodyJointCount> joints{};
    int frame_index = 0;
};

// Integer pixel bounds, half open: rows [top, bottom), columns [left, right).
struct BBox {
    int top = 0;
    int bottom = 0;
    int left = 0;
    int right = 0;

    int height() const { return bottom - top; }
    int width() const { return right - left; }
    bool contains(int row, int col) const {
        return row >= top && row < bottom && col >= left && col < right;
    }
};

struct ExpansionConfig {
    double lambda_x = 0.1;
    double lambda_y = 0.25;
    double conf_threshold = 0.10;
};

// 8-bit image, row-major H x W x C.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;

    static Image zeros(int h, int w, int c);

    std::uint8_t& at(int row, int col, int ch) {
        return pixels[static_cast<std::size_t>((row * width + col) * channels + ch)];
    }
    std::uint8_t at(int row, int col, int ch) const {
        return pixels[static_cast<std::size_t>((row * width + col) * channels + ch)];
    }
};

// Expanded agent bounding box from pose keypoints. Joints with confidence
// below cfg.conf_threshold are discarded; the box spanning the survivors is
// widened by lambda_x/lambda_y times its extent, rounded outward to integer
// pixels and clipped to the image. Returns nullopt when no joint survives.
std::optional<BBox> compute_agent_bbox(const KeypointSet& kps, int height, int width,
                                       const ExpansionConfig& cfg = {});

// Copy of img with every pixel inside bbox set to zero on all channels.
// An absent bbox returns the image unchanged (undetected agent).
Image mask_agent(const Image& img, const std::optional<BBox>& bbox);

// Sub-image covered by bbox. An absent bbox yields the entire image; a
// degenerate (zero extent) side is clamped to one pixel inside the image.
Image crop_body(const Image& img, const std::optional<BBox>& bbox);

}  // namespace affectseq
