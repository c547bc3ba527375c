#pragma once

#include <cstdint>
#include <cstddef>
#include <utility>
#include <vector>

#include "mariscope/error.hpp"

namespace mariscope {

/// Decoded raster, the unit flowing through every pipeline stage.
/// Row-major, interleaved channels, 8-bit intensities.
struct Frame {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 = grayscale, 3 = RGB
    int frame_index = 0;
    std::vector<std::uint8_t> data;

    static Frame make(int width, int height, int channels, std::uint8_t fill = 0) {
        Frame f;
        f.width = width;
        f.height = height;
        f.channels = channels;
        f.data.assign(static_cast<std::size_t>(width) * height * channels, fill);
        f.validate();
        return f;
    }

    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    bool same_shape(const Frame& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    /// Enforces the container invariants; intensities are 8-bit by construction.
    void validate() const {
        if (width < 2 || height < 2)
            throw Error("frame dimensions must be at least 2x2, got " + std::to_string(width) + "x" +
                        std::to_string(height));
        if (channels != 1 && channels != 3)
            throw Error("frame must have 1 or 3 channels, got " + std::to_string(channels));
        if (data.size() != static_cast<std::size_t>(width) * height * channels)
            throw Error("frame data size does not match width*height*channels");
    }
};

/// Integer pixel coordinate, (x, y) with y growing downward.
struct PixelCoord {
    int x = 0;
    int y = 0;
    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

}  // namespace mariscope
