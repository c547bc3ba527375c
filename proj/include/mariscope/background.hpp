#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mariscope/frame.hpp"
#include "mariscope/image_ops.hpp"
#include "mariscope/parallel.hpp"

namespace mariscope {

/// Binary foreground labeling for one frame.
struct ForegroundMask {
    int width = 0;
    int height = 0;
    int frame_index = 0;
    std::vector<std::uint8_t> fg;  // 1 = foreground

    static ForegroundMask make(int w, int h, int frame_index = 0) {
        ForegroundMask m;
        m.width = w;
        m.height = h;
        m.frame_index = frame_index;
        m.fg.assign(static_cast<std::size_t>(w) * h, 0);
        return m;
    }
    bool at(int x, int y) const { return fg[static_cast<std::size_t>(y) * width + x] != 0; }
    std::size_t foreground_count() const {
        std::size_t n = 0;
        for (auto v : fg) n += v;
        return n;
    }
};

struct BackgroundParams {
    double rho = 0.02;        // learning rate
    double k = 2.5;           // match threshold in standard deviations
    double var_init = 225.0;  // variance assigned to fresh observations
    double var_floor = 4.0;
    // mixture-only
    int components = 4;
    double background_portion = 0.8;  // T
    double w_init = 0.05;
};

/// Per-pixel single Gaussian background model. A pixel matches when the
/// sample lies within k standard deviations of its mean; only matched pixels
/// adapt. The mean updates before the variance, so the variance sees the
/// updated mean.
class SingleGaussianModel {
public:
    SingleGaussianModel(int width, int height, const BackgroundParams& params = {})
        : width_(width), height_(height), params_(params),
          mean_(static_cast<std::size_t>(width) * height, 0.0),
          var_(static_cast<std::size_t>(width) * height, 0.0),
          init_(static_cast<std::size_t>(width) * height, 0) {
        if (params.rho <= 0.0 || params.rho >= 1.0) throw Error("learning rate must be in (0,1)");
    }

    ForegroundMask update(const Frame& frame, int threads = 1) {
        const Frame gray = frame.channels == 3 ? to_grayscale(frame) : frame;
        if (gray.width != width_ || gray.height != height_)
            throw SizeMismatch("frame does not match model dimensions");
        ForegroundMask mask = ForegroundMask::make(width_, height_, frame.frame_index);
        const double rho = params_.rho, k = params_.k;
        parallel_for(0, gray.pixel_count(), threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const double x = gray.data[i];
                if (!init_[i]) {
                    init_[i] = 1;
                    mean_[i] = x;
                    var_[i] = std::max(params_.var_init, params_.var_floor);
                    continue;  // background
                }
                const double sigma = std::sqrt(var_[i]);
                if (std::abs(x - mean_[i]) <= k * sigma) {
                    mean_[i] = (1.0 - rho) * mean_[i] + rho * x;
                    const double d = x - mean_[i];
                    var_[i] = std::max((1.0 - rho) * var_[i] + rho * d * d, params_.var_floor);
                } else {
                    mask.fg[i] = 1;  // model unchanged on unmatched pixels
                }
            }
        });
        return mask;
    }

    double mean_at(int x, int y) const { return mean_[static_cast<std::size_t>(y) * width_ + x]; }
    double var_at(int x, int y) const { return var_[static_cast<std::size_t>(y) * width_ + x]; }
    const BackgroundParams& params() const { return params_; }

private:
    int width_, height_;
    BackgroundParams params_;
    std::vector<double> mean_, var_;
    std::vector<std::uint8_t> init_;
};

/// Per-pixel adaptive Gaussian mixture, components kept sorted by w/sigma.
/// Background components are the smallest prefix whose weights exceed the
/// background portion T.
class MixtureModel {
public:
    MixtureModel(int width, int height, const BackgroundParams& params = {})
        : width_(width), height_(height), params_(params), n_active_(static_cast<std::size_t>(width) * height, 0) {
        if (params.rho <= 0.0 || params.rho >= 1.0) throw Error("learning rate must be in (0,1)");
        if (params.components < 1) throw Error("mixture needs at least one component");
        if (params.background_portion <= 0.0 || params.background_portion >= 1.0)
            throw Error("background portion must be in (0,1)");
        const std::size_t slots = static_cast<std::size_t>(width) * height * params.components;
        weight_.assign(slots, 0.0);
        mean_.assign(slots, 0.0);
        var_.assign(slots, 0.0);
    }

    ForegroundMask update(const Frame& frame, int threads = 1) {
        const Frame gray = frame.channels == 3 ? to_grayscale(frame) : frame;
        if (gray.width != width_ || gray.height != height_)
            throw SizeMismatch("frame does not match model dimensions");
        ForegroundMask mask = ForegroundMask::make(width_, height_, frame.frame_index);
        parallel_for(0, gray.pixel_count(), threads, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) mask.fg[i] = update_pixel(i, gray.data[i]) ? 0 : 1;
        });
        return mask;
    }

    int components() const { return params_.components; }
    double weight_at(std::size_t pixel, int c) const { return weight_[pixel * params_.components + c]; }
    double var_at(std::size_t pixel, int c) const { return var_[pixel * params_.components + c]; }
    int active_at(std::size_t pixel) const { return n_active_[pixel]; }
    const BackgroundParams& params() const { return params_; }

private:
    // Returns true when the pixel is background.
    bool update_pixel(std::size_t pixel, double x) {
        const int K = params_.components;
        double* w = &weight_[pixel * K];
        double* mu = &mean_[pixel * K];
        double* var = &var_[pixel * K];
        int n = n_active_[pixel];

        if (n == 0) {
            w[0] = 1.0;
            mu[0] = x;
            var[0] = std::max(params_.var_init, params_.var_floor);
            n_active_[pixel] = 1;
            return true;  // just initialized
        }

        int match = -1;
        for (int c = 0; c < n; ++c) {
            if (std::abs(x - mu[c]) <= params_.k * std::sqrt(var[c])) {
                match = c;
                break;
            }
        }

        if (match >= 0) {
            for (int c = 0; c < n; ++c) w[c] = (1.0 - params_.rho) * w[c] + (c == match ? params_.rho : 0.0);
            const double rate = std::min(1.0, params_.rho / w[match]);
            mu[match] = (1.0 - rate) * mu[match] + rate * x;
            const double d = x - mu[match];
            var[match] = std::max((1.0 - rate) * var[match] + rate * d * d, params_.var_floor);
        } else {
            int slot;
            if (n < K) {
                slot = n;
                n_active_[pixel] = ++n;
            } else {
                slot = 0;  // replace the lowest-weight component
                for (int c = 1; c < n; ++c)
                    if (w[c] < w[slot]) slot = c;
            }
            w[slot] = params_.w_init;
            mu[slot] = x;
            var[slot] = std::max(params_.var_init, params_.var_floor);
            double total = 0.0;
            for (int c = 0; c < n; ++c) total += w[c];
            for (int c = 0; c < n; ++c) w[c] /= total;
            match = slot;
        }

        // Keep components ordered by w/sigma descending (insertion sort, K is tiny).
        for (int c = 1; c < n; ++c) {
            const double fw = w[c], fm = mu[c], fv = var[c];
            const double fit = fw / std::sqrt(fv);
            int j = c - 1;
            while (j >= 0 && w[j] / std::sqrt(var[j]) < fit) {
                w[j + 1] = w[j];
                mu[j + 1] = mu[j];
                var[j + 1] = var[j];
                if (match == j) match = j + 1;
                --j;
            }
            if (j + 1 != c) {
                w[j + 1] = fw;
                mu[j + 1] = fm;
                var[j + 1] = fv;
                if (match == c) match = j + 1;
            }
        }

        // Smallest prefix of the sorted components whose weights sum past T.
        double cum = 0.0;
        int bg_count = 0;
        for (int c = 0; c < n; ++c) {
            cum += w[c];
            ++bg_count;
            if (cum > params_.background_portion) break;
        }
        return match < bg_count;
    }

    int width_, height_;
    BackgroundParams params_;
    std::vector<double> weight_, mean_, var_;
    std::vector<std::uint8_t> n_active_;
};

enum class BackgroundMethod { SingleGaussian, Gmm };

inline BackgroundMethod background_method_from_string(const std::string& s) {
    if (s == "sg" || s == "single-gaussian") return BackgroundMethod::SingleGaussian;
    if (s == "gmm") return BackgroundMethod::Gmm;
    throw Error("unknown background method: " + s);
}

/// Runs a background model over a frame sequence; warmup frames adapt the
/// model but emit no mask.
inline std::vector<ForegroundMask> run_background_subtraction(const std::vector<Frame>& frames,
                                                              BackgroundMethod method,
                                                              const BackgroundParams& params, int warmup,
                                                              int threads = 1) {
    if (frames.empty()) throw EmptySequence("background subtraction needs at least one frame");
    if (warmup < 0 || warmup >= static_cast<int>(frames.size()))
        throw Error("warmup must be smaller than the sequence length");
    std::vector<ForegroundMask> masks;
    if (method == BackgroundMethod::SingleGaussian) {
        SingleGaussianModel model(frames[0].width, frames[0].height, params);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            ForegroundMask m = model.update(frames[i], threads);
            if (static_cast<int>(i) >= warmup) masks.push_back(std::move(m));
        }
    } else {
        MixtureModel model(frames[0].width, frames[0].height, params);
        for (std::size_t i = 0; i < frames.size(); ++i) {
            ForegroundMask m = model.update(frames[i], threads);
            if (static_cast<int>(i) >= warmup) masks.push_back(std::move(m));
        }
    }
    return masks;
}

/// Mask file convention: 0 = background, 255 = foreground.
inline Frame mask_to_frame(const ForegroundMask& mask) {
    Frame f = Frame::make(mask.width, mask.height, 1);
    f.frame_index = mask.frame_index;
    for (std::size_t i = 0; i < mask.fg.size(); ++i) f.data[i] = mask.fg[i] ? 255 : 0;
    return f;
}

inline ForegroundMask frame_to_mask(const Frame& frame) {
    if (frame.channels != 1) throw ChannelMismatch("mask frames are grayscale");
    ForegroundMask m = ForegroundMask::make(frame.width, frame.height, frame.frame_index);
    for (std::size_t i = 0; i < frame.data.size(); ++i) m.fg[i] = frame.data[i] >= 128 ? 1 : 0;
    return m;
}

}  // namespace mariscope
