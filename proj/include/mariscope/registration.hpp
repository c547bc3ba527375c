#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "mariscope/horizon.hpp"
#include "mariscope/image_ops.hpp"
#include "mariscope/parallel.hpp"

namespace mariscope {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// 2D similarity transform. rotation_deg follows the horizon alpha
/// convention (positive rotation raises the right side of the scene);
/// applying a transform with rotation r to a frame increases its horizon
/// alpha by r. The point map is p' = scale * R * p + (dx, dy) about the
/// coordinate origin.
struct FrameTransform {
    double rotation_deg = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    double scale = 1.0;

    // Image y grows downward, so the scene-convention rotation maps to the
    // opposite angle in pixel coordinates.
    double image_angle_rad() const { return -rotation_deg * std::numbers::pi / 180.0; }

    Vec2 apply(Vec2 p) const {
        const double a = image_angle_rad();
        const double c = std::cos(a), s = std::sin(a);
        return {scale * (c * p.x - s * p.y) + dx, scale * (s * p.x + c * p.y) + dy};
    }

    FrameTransform inverse() const {
        FrameTransform inv;
        inv.rotation_deg = -rotation_deg;
        inv.scale = 1.0 / scale;
        const double a = inv.image_angle_rad();
        const double c = std::cos(a), s = std::sin(a);
        inv.dx = -inv.scale * (c * dx - s * dy);
        inv.dy = -inv.scale * (s * dx + c * dy);
        return inv;
    }

    /// first, then second (composed(p) = second(first(p))).
    static FrameTransform compose(const FrameTransform& first, const FrameTransform& second) {
        FrameTransform t;
        t.rotation_deg = first.rotation_deg + second.rotation_deg;
        t.scale = first.scale * second.scale;
        const Vec2 shifted = second.apply({first.dx, first.dy});
        t.dx = shifted.x;
        t.dy = shifted.y;
        return t;
    }

    static FrameTransform identity() { return {}; }
};

/// Roll/pitch correction from two horizon estimates: the returned transform
/// maps frame b onto frame a. Yaw is unobservable from the horizon alone, so
/// it contributes no horizontal shift.
inline FrameTransform align_by_horizon(const HorizonEstimate& est_a, const HorizonEstimate& est_b,
                                       int width, int height) {
    const double d_alpha = est_a.alpha_deg - est_b.alpha_deg;
    const double cx = (width - 1.0) / 2.0;
    const double cy = (height - 1.0) / 2.0;
    const double psi = -d_alpha * std::numbers::pi / 180.0;
    const double c = std::cos(psi), s = std::sin(psi);

    // Rotate b's horizon line about the image center, then read off the
    // vertical offset left at the center column.
    const double bx = 0.0, by = est_b.y - cy;  // b's horizon center relative to image center
    const Vec2 p_rot{cx + c * bx - s * by, cy + s * bx + c * by};
    const double alpha_a_rad = est_a.alpha_deg * std::numbers::pi / 180.0;
    const Vec2 dir{std::cos(alpha_a_rad), -std::sin(alpha_a_rad)};
    const double t_line = (cx - p_rot.x) / dir.x;
    const double y_rotated = p_rot.y + t_line * dir.y;
    const double dy = est_a.y - y_rotated;

    FrameTransform t;
    t.rotation_deg = d_alpha;
    t.scale = 1.0;
    // Fold "rotate about center" into the origin-anchored form.
    t.dx = cx - (c * cx - s * cy);
    t.dy = cy - (s * cx + c * cy) + dy;
    return t;
}

enum class Interpolation { Nearest, Bilinear };

struct WarpResult {
    Frame frame;
    std::vector<std::uint8_t> valid;  // 1 where the source sample was in bounds

    bool valid_at(int x, int y) const { return valid[static_cast<std::size_t>(y) * frame.width + x] != 0; }
};

/// Inverse-mapped resampling; out-of-bounds sources fill with 0 and are
/// flagged in the validity mask.
inline WarpResult warp(const Frame& frame, const FrameTransform& t,
                       Interpolation interp = Interpolation::Bilinear, int threads = 1) {
    WarpResult out;
    out.frame.width = frame.width;
    out.frame.height = frame.height;
    out.frame.channels = frame.channels;
    out.frame.frame_index = frame.frame_index;
    out.frame.data.assign(frame.data.size(), 0);
    out.valid.assign(frame.pixel_count(), 0);

    const FrameTransform inv = t.inverse();
    const int w = frame.width, h = frame.height, ch = frame.channels;
    parallel_for(0, static_cast<std::size_t>(h), threads, [&](std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const Vec2 src = inv.apply({static_cast<double>(x), static_cast<double>(y)});
                const std::size_t i = y * w + x;
                if (interp == Interpolation::Nearest) {
                    const long sx = std::lround(src.x), sy = std::lround(src.y);
                    if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
                    for (int c = 0; c < ch; ++c)
                        out.frame.data[i * ch + c] = frame.at(static_cast<int>(sx), static_cast<int>(sy), c);
                    out.valid[i] = 1;
                } else {
                    if (src.x < 0.0 || src.x > w - 1.0 || src.y < 0.0 || src.y > h - 1.0) continue;
                    const int x0 = static_cast<int>(src.x), y0i = static_cast<int>(src.y);
                    const int x1 = x0 < w - 1 ? x0 + 1 : x0;
                    const int y1i = y0i < h - 1 ? y0i + 1 : y0i;
                    const double fx = src.x - x0, fy = src.y - y0i;
                    for (int c = 0; c < ch; ++c) {
                        const double v00 = frame.at(x0, y0i, c), v10 = frame.at(x1, y0i, c);
                        const double v01 = frame.at(x0, y1i, c), v11 = frame.at(x1, y1i, c);
                        const double v = (1 - fy) * ((1 - fx) * v00 + fx * v10) +
                                         fy * ((1 - fx) * v01 + fx * v11);
                        long q = std::lround(v);
                        if (q < 0) q = 0;
                        if (q > 255) q = 255;
                        out.frame.data[i * ch + c] = static_cast<std::uint8_t>(q);
                    }
                    out.valid[i] = 1;
                }
            }
        }
    });
    return out;
}

struct StripShift {
    int shift = 0;
    double peak = 0.0;
};

/// Normalized cross-correlation of a horizontal strip around the horizon.
/// The returned shift s maximizes the correlation of a(x) against b(x + s):
/// if b's content is a's content moved right by k pixels, the result is +k.
inline StripShift strip_cross_correlation(const Frame& a, const Frame& b, const HorizonEstimate& horizon,
                                          int strip_height, int max_shift) {
    if (!a.same_shape(b)) throw SizeMismatch("strip correlation needs frames of identical shape");
    if (strip_height < 1) throw StripOutOfBounds("strip height must be positive");
    if (max_shift < 0 || max_shift >= a.width / 2)
        throw StripOutOfBounds("max_shift must be in [0, width/2)");
    const int y0 = static_cast<int>(std::lround(horizon.y)) - strip_height / 2;
    if (y0 < 0 || y0 + strip_height > a.height)
        throw StripOutOfBounds("strip rows fall outside the frames");

    const Frame ga = a.channels == 3 ? to_grayscale(a) : a;
    const Frame gb = b.channels == 3 ? to_grayscale(b) : b;
    const int w = a.width;

    auto strip_variance = [&](const Frame& f) {
        long long sum = 0, sumsq = 0;
        for (int y = y0; y < y0 + strip_height; ++y)
            for (int x = 0; x < w; ++x) {
                const int v = f.at(x, y);
                sum += v;
                sumsq += static_cast<long long>(v) * v;
            }
        const double n = static_cast<double>(strip_height) * w;
        const double mean = sum / n;
        return sumsq / n - mean * mean;
    };
    if (strip_variance(ga) <= 0.0 || strip_variance(gb) <= 0.0)
        throw FlatStrip("strip has zero variance, correlation undefined");

    StripShift best;
    bool have = false;
    for (int s = -max_shift; s <= max_shift; ++s) {
        const int x_lo = std::max(0, -s);
        const int x_hi = std::min(w, w - s);
        if (x_hi - x_lo < 2) continue;
        double sum_a = 0, sum_b = 0, sum_aa = 0, sum_bb = 0, sum_ab = 0;
        const double n = static_cast<double>(x_hi - x_lo) * strip_height;
        for (int y = y0; y < y0 + strip_height; ++y) {
            for (int x = x_lo; x < x_hi; ++x) {
                const double va = ga.at(x, y);
                const double vb = gb.at(x + s, y);
                sum_a += va;
                sum_b += vb;
                sum_aa += va * va;
                sum_bb += vb * vb;
                sum_ab += va * vb;
            }
        }
        const double cov = sum_ab - sum_a * sum_b / n;
        const double var_a = sum_aa - sum_a * sum_a / n;
        const double var_b = sum_bb - sum_b * sum_b / n;
        if (var_a <= 0.0 || var_b <= 0.0) continue;  // flat overlap window
        const double ncc = cov / std::sqrt(var_a * var_b);
        const bool better = !have || ncc > best.peak ||
                            (ncc == best.peak && (std::abs(s) < std::abs(best.shift) ||
                                                  (std::abs(s) == std::abs(best.shift) && s < best.shift)));
        if (better) {
            best.shift = s;
            best.peak = ncc;
            have = true;
        }
    }
    if (!have) throw FlatStrip("every overlap window is flat");
    return best;
}

/// Least-squares similarity fit mapping the b points onto the a points.
/// Exact when the pairs are consistent.
inline FrameTransform landmark_transform(const std::vector<std::pair<Vec2, Vec2>>& pairs) {
    if (pairs.size() < 2) throw DegenerateConfiguration("need at least 2 point pairs");
    double cax = 0, cay = 0, cbx = 0, cby = 0;
    for (const auto& [pa, pb] : pairs) {
        cax += pa.x;
        cay += pa.y;
        cbx += pb.x;
        cby += pb.y;
    }
    const double n = static_cast<double>(pairs.size());
    cax /= n;
    cay /= n;
    cbx /= n;
    cby /= n;

    double dot = 0, cross = 0, norm_b = 0;
    for (const auto& [pa, pb] : pairs) {
        const double ax = pa.x - cax, ay = pa.y - cay;
        const double bx = pb.x - cbx, by = pb.y - cby;
        dot += bx * ax + by * ay;
        cross += bx * ay - by * ax;
        norm_b += bx * bx + by * by;
    }
    if (norm_b < 1e-18) throw DegenerateConfiguration("source points are coincident");

    const double psi = std::atan2(cross, dot);
    const double scale = std::sqrt(dot * dot + cross * cross) / norm_b;
    if (!(scale > 0.0)) throw DegenerateConfiguration("degenerate scale");

    FrameTransform t;
    t.rotation_deg = -psi * 180.0 / std::numbers::pi;
    t.scale = scale;
    const double c = std::cos(psi), s = std::sin(psi);
    t.dx = cax - scale * (c * cbx - s * cby);
    t.dy = cay - scale * (s * cbx + c * cby);
    return t;
}

/// Per-pixel absolute difference.
inline Frame difference_image(const Frame& a, const Frame& b) {
    if (!a.same_shape(b)) throw SizeMismatch("difference_image needs identical shapes");
    Frame out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = static_cast<std::uint8_t>(std::abs(static_cast<int>(a.data[i]) - b.data[i]));
    return out;
}

}  // namespace mariscope
