#include "affectseq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace affectseq {

Image Image::zeros(int h, int w, int c) {
    Image img;
    img.height = h;
    img.width = w;
    img.channels = c;
    img.pixels.assign(static_cast<std::size_t>(h) * w * c, 0);
    return img;
}

std::optional<BBox> compute_agent_bbox(const KeypointSet& kps, int height, int width,
                                       const ExpansionConfig& cfg) {
    if (height <= 0 || width <= 0)
        throw std::invalid_argument("compute_agent_bbox: image dimensions must be positive");

    double min_x = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    int surviving = 0;
    for (const Keypoint& joint : kps.joints) {
        if (!std::isfinite(joint.x) || !std::isfinite(joint.y))
            throw std::invalid_argument("compute_agent_bbox: non-finite joint coordinate");
        if (joint.confidence < cfg.conf_threshold) continue;
        min_x = std::min(min_x, joint.x);
        max_x = std::max(max_x, joint.x);
        min_y = std::min(min_y, joint.y);
        max_y = std::max(max_y, joint.y);
        ++surviving;
    }
    if (surviving == 0) return std::nullopt;

    const double expand_x = cfg.lambda_x * (max_x - min_x);
    const double expand_y = cfg.lambda_y * (max_y - min_y);

    // Real-valued bounds, then outward rounding so the agent is never clipped.
    const double bottom = std::min(max_y + expand_y, static_cast<double>(height));
    const double right = std::min(max_x + expand_x, static_cast<double>(width));
    const double top = std::max(0.0, min_y - expand_y);
    const double left = std::max(0.0, min_x - expand_x);

    BBox box;
    box.top = std::clamp(static_cast<int>(std::floor(top)), 0, height);
    box.left = std::clamp(static_cast<int>(std::floor(left)), 0, width);
    box.bottom = std::clamp(static_cast<int>(std::ceil(bottom)), box.top, height);
    box.right = std::clamp(static_cast<int>(std::ceil(right)), box.left, width);
    return box;
}

namespace {

void check_bbox(const Image& img, const BBox& box, const char* op) {
    if (box.top < 0 || box.left < 0 || box.top > box.bottom || box.left > box.right ||
        box.bottom > img.height || box.right > img.width)
        throw std::invalid_argument(std::string(op) + ": bbox out of image bounds");
}

}  // namespace

Image mask_agent(const Image& img, const std::optional<BBox>& bbox) {
    if (!bbox) return img;
    check_bbox(img, *bbox, "mask_agent");
    Image out = img;
    const std::size_t row_span = static_cast<std::size_t>(bbox->width()) * img.channels;
    for (int row = bbox->top; row < bbox->bottom; ++row) {
        std::uint8_t* start = &out.at(row, bbox->left, 0);
        std::memset(start, 0, row_span);
    }
    return out;
}

Image crop_body(const Image& img, const std::optional<BBox>& bbox) {
    if (!bbox) return img;
    check_bbox(img, *bbox, "crop_body");

    // Zero-extent sides clamp to a single pixel kept inside the image.
    int top = bbox->top;
    int left = bbox->left;
    int rows = bbox->height();
    int cols = bbox->width();
    if (rows == 0) {
        top = std::min(top, img.height - 1);
        rows = 1;
    }
    if (cols == 0) {
        left = std::min(left, img.width - 1);
        cols = 1;
    }

    Image out;
    out.height = rows;
    out.width = cols;
    out.channels = img.channels;
    out.pixels.resize(static_cast<std::size_t>(rows) * cols * img.channels);
    const std::size_t row_span = static_cast<std::size_t>(cols) * img.channels;
    for (int row = 0; row < rows; ++row) {
        const std::uint8_t* src = &img.at(top + row, left, 0);
        std::memcpy(&out.pixels[row * row_span], src, row_span);
    }
    return out;
}

}  // namespace affectseq
