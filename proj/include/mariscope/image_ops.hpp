#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mariscope/frame.hpp"
#include "mariscope/parallel.hpp"

namespace mariscope {

/// Per-pixel Sobel response. Orientation is atan2(gy, gx) in radians with
/// image y growing downward.
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<float> magnitude;
    std::vector<float> orientation;

    float mag(int x, int y) const { return magnitude[static_cast<std::size_t>(y) * width + x]; }
};

enum class SegmentLength { Long, Medium, Short };

/// Thinned binary edge image plus its 8-connected chains, classified by length.
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;  // 1 = edge pixel

    struct Segment {
        std::vector<PixelCoord> pixels;
        SegmentLength length_class = SegmentLength::Short;
        int length() const { return static_cast<int>(pixels.size()); }
    };
    std::vector<Segment> segments;

    bool edge_at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
    std::size_t edge_count() const {
        std::size_t n = 0;
        for (auto m : mask) n += m;
        return n;
    }
};

struct EdgeParams {
    double high_thresh = 80.0;
    double low_thresh = 40.0;
    // Chain length classes; <= 0 means the max(W,H)/3 and max(W,H)/10 defaults.
    int t_long = -1;
    int t_med = -1;
};

/// Per-channel normalized histogram with exact population mean/variance.
struct ColorDistribution {
    int channels = 0;
    int bins = 0;
    std::vector<double> histogram;  // channels * bins, each channel sums to 1
    std::array<double, 3> mean{};
    std::array<double, 3> variance{};
    long long pixel_count = 0;

    double hist(int c, int b) const { return histogram[static_cast<std::size_t>(c) * bins + b]; }
};

/// ITU-R 601 luma: gray = round(0.299 R + 0.587 G + 0.114 B).
inline Frame to_grayscale(const Frame& frame) {
    if (frame.channels != 3) throw ChannelMismatch("to_grayscale expects a 3-channel frame");
    Frame out;
    out.width = frame.width;
    out.height = frame.height;
    out.channels = 1;
    out.frame_index = frame.frame_index;
    out.data.resize(frame.pixel_count());
    const std::uint8_t* src = frame.data.data();
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double g = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
        long v = std::lround(g);
        if (v < 0) v = 0;
        if (v > 255) v = 255;
        out.data[i] = static_cast<std::uint8_t>(v);
    }
    return out;
}

/// Replicates a grayscale plane into an RGB frame (overlay plumbing).
inline Frame to_rgb(const Frame& frame) {
    if (frame.channels == 3) return frame;
    Frame out;
    out.width = frame.width;
    out.height = frame.height;
    out.channels = 3;
    out.frame_index = frame.frame_index;
    out.data.resize(frame.pixel_count() * 3);
    for (std::size_t i = 0; i < frame.data.size(); ++i) {
        out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = frame.data[i];
    }
    return out;
}

/// 3x3 Sobel gradients with replicated borders.
inline GradientField sobel_gradient(const Frame& frame, int threads = 1) {
    if (frame.channels != 1) throw ChannelMismatch("sobel_gradient expects a grayscale frame");
    const int w = frame.width, h = frame.height;
    GradientField g;
    g.width = w;
    g.height = h;
    g.magnitude.resize(frame.pixel_count());
    g.orientation.resize(frame.pixel_count());

    parallel_for(0, static_cast<std::size_t>(h), threads, [&](std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y < y1; ++y) {
            const int yi = static_cast<int>(y);
            const int ym = yi > 0 ? yi - 1 : 0;
            const int yp = yi < h - 1 ? yi + 1 : h - 1;
            for (int x = 0; x < w; ++x) {
                const int xm = x > 0 ? x - 1 : 0;
                const int xp = x < w - 1 ? x + 1 : w - 1;
                const int p00 = frame.at(xm, ym), p01 = frame.at(x, ym), p02 = frame.at(xp, ym);
                const int p10 = frame.at(xm, yi), p12 = frame.at(xp, yi);
                const int p20 = frame.at(xm, yp), p21 = frame.at(x, yp), p22 = frame.at(xp, yp);
                const int gx = (p02 + 2 * p12 + p22) - (p00 + 2 * p10 + p20);
                const int gy = (p20 + 2 * p21 + p22) - (p00 + 2 * p01 + p02);
                const std::size_t i = y * w + x;
                g.magnitude[i] = std::sqrt(static_cast<float>(gx) * gx + static_cast<float>(gy) * gy);
                g.orientation[i] = std::atan2(static_cast<float>(gy), static_cast<float>(gx));
            }
        }
    });
    return g;
}

namespace detail {

// Non-maximum suppression neighbor pair for a gradient orientation, quantized
// to 4 sectors. Returns the neighbor offsets ordered so that the second one is
// the lexicographically larger (y, x); the survivor rule compares >= against
// the first and > against the second, so exactly one pixel of a tied ridge
// survives.
inline void nms_neighbors(float orientation, int& dx, int& dy) {
    float a = orientation * (180.0f / 3.14159265358979323846f);
    if (a < 0) a += 180.0f;  // direction is modulo pi
    if (a >= 180.0f) a -= 180.0f;
    if (a < 22.5f || a >= 157.5f) {
        dx = 1; dy = 0;           // horizontal gradient, compare left/right
    } else if (a < 67.5f) {
        dx = 1; dy = 1;           // diagonal
    } else if (a < 112.5f) {
        dx = 0; dy = 1;           // vertical gradient, compare up/down
    } else {
        dx = -1; dy = 1;          // anti-diagonal
    }
}

}  // namespace detail

/// Sobel + non-maximum suppression + hysteresis edge detector, with
/// 8-connected chain extraction and length classification.
inline EdgeMap edge_map(const Frame& frame, const EdgeParams& params = {}, int threads = 1) {
    if (frame.channels != 1) throw ChannelMismatch("edge_map expects a grayscale frame");
    if (params.low_thresh < 0 || params.low_thresh > params.high_thresh)
        throw InvalidThresholds("need 0 <= low_thresh <= high_thresh");
    const int w = frame.width, h = frame.height;
    int t_long = params.t_long;
    int t_med = params.t_med;
    if (t_long <= 0) t_long = std::max(w, h) / 3;
    if (t_med <= 0) t_med = std::max(w, h) / 10;
    if (t_med < 1) t_med = 1;
    if (t_long <= t_med) t_long = t_med + 1;
    if (params.t_long > 0 && params.t_med > 0 && params.t_med >= params.t_long)
        throw InvalidThresholds("need T_med < T_long");

    const GradientField g = sobel_gradient(frame, threads);

    // Thin: a pixel survives if its magnitude is >= the earlier neighbor and
    // > the later neighbor along the gradient direction.
    std::vector<std::uint8_t> thin(frame.pixel_count(), 0);
    parallel_for(0, static_cast<std::size_t>(h), threads, [&](std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y < y1; ++y) {
            const int yi = static_cast<int>(y);
            for (int x = 0; x < w; ++x) {
                const std::size_t i = y * w + x;
                const float m = g.magnitude[i];
                if (m < params.low_thresh) continue;
                int dx, dy;
                detail::nms_neighbors(g.orientation[i], dx, dy);
                const int xb = x - dx, yb = yi - dy;
                const int xa = x + dx, ya = yi + dy;
                const float before = frame.in_bounds(xb, yb) ? g.mag(xb, yb) : 0.0f;
                const float after = frame.in_bounds(xa, ya) ? g.mag(xa, ya) : 0.0f;
                if (m >= before && m > after) thin[i] = 1;
            }
        }
    });

    // Hysteresis: keep weak pixels only when 8-connected to a strong one.
    EdgeMap em;
    em.width = w;
    em.height = h;
    em.mask.assign(frame.pixel_count(), 0);
    std::vector<PixelCoord> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!thin[i] || em.mask[i] || g.magnitude[i] < params.high_thresh) continue;
            em.mask[i] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const PixelCoord p = stack.back();
                stack.pop_back();
                for (int ny = p.y - 1; ny <= p.y + 1; ++ny) {
                    for (int nx = p.x - 1; nx <= p.x + 1; ++nx) {
                        if (!frame.in_bounds(nx, ny)) continue;
                        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                        if (thin[j] && !em.mask[j]) {
                            em.mask[j] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
        }
    }

    // Chains: 8-connected components of the final mask, in row-major seed order.
    std::vector<std::uint8_t> seen(frame.pixel_count(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!em.mask[i] || seen[i]) continue;
            EdgeMap::Segment seg;
            seen[i] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const PixelCoord p = stack.back();
                stack.pop_back();
                seg.pixels.push_back(p);
                for (int ny = p.y - 1; ny <= p.y + 1; ++ny) {
                    for (int nx = p.x - 1; nx <= p.x + 1; ++nx) {
                        if (!frame.in_bounds(nx, ny)) continue;
                        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
                        if (em.mask[j] && !seen[j]) {
                            seen[j] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
            const int len = seg.length();
            seg.length_class = len >= t_long  ? SegmentLength::Long
                               : len >= t_med ? SegmentLength::Medium
                                              : SegmentLength::Short;
            em.segments.push_back(std::move(seg));
        }
    }
    return em;
}

/// Normalized per-channel histograms and exact population statistics over a
/// pixel region.
inline ColorDistribution region_distribution(const Frame& frame, std::span<const PixelCoord> region,
                                             int bins = 64) {
    if (region.empty()) throw EmptyRegion("region_distribution needs a non-empty region");
    if (bins < 1 || bins > 256) throw Error("bins must be in [1, 256]");
    ColorDistribution d;
    d.channels = frame.channels;
    d.bins = bins;
    d.pixel_count = static_cast<long long>(region.size());
    d.histogram.assign(static_cast<std::size_t>(frame.channels) * bins, 0.0);

    std::array<long long, 3> sum{};
    std::array<long long, 3> sumsq{};
    std::vector<long long> counts(static_cast<std::size_t>(frame.channels) * bins, 0);
    for (const PixelCoord& p : region) {
        if (!frame.in_bounds(p.x, p.y)) throw Error("region coordinate out of bounds");
        for (int c = 0; c < frame.channels; ++c) {
            const int v = frame.at(p.x, p.y, c);
            sum[c] += v;
            sumsq[c] += static_cast<long long>(v) * v;
            counts[static_cast<std::size_t>(c) * bins + v * bins / 256] += 1;
        }
    }
    const double n = static_cast<double>(d.pixel_count);
    for (int c = 0; c < frame.channels; ++c) {
        d.mean[c] = static_cast<double>(sum[c]) / n;
        const double var = static_cast<double>(sumsq[c]) / n - d.mean[c] * d.mean[c];
        d.variance[c] = var > 0.0 ? var : 0.0;
        for (int b = 0; b < bins; ++b)
            d.histogram[static_cast<std::size_t>(c) * bins + b] =
                static_cast<double>(counts[static_cast<std::size_t>(c) * bins + b]) / n;
    }
    return d;
}

}  // namespace mariscope
