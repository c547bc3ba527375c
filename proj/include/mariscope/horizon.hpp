#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mariscope/image_ops.hpp"
#include "mariscope/parallel.hpp"

namespace mariscope {

/// Horizon parametrization: Y is the vertical position of the horizon's
/// center measured from the upper image edge, alpha its signed angle with the
/// horizontal axis. Positive alpha means the right end of the horizon sits
/// higher in the scene (smaller image y at larger x).
struct HorizonEstimate {
    double y = 0.0;
    double alpha_deg = 0.0;
    double score = 0.0;
    int candidate_rank = 0;
};

/// Line in rho-theta form: x cos(theta) + y sin(theta) = rho, theta in
/// degrees within [0, 180).
struct LineCandidate {
    double rho = 0.0;
    double theta_deg = 0.0;
    int votes = 0;
};

struct HoughParams {
    double rho_step = 1.0;
    double theta_step_deg = 0.5;
    int top_k = 10;
};

enum class DistanceMetric { MeanShift, Bhattacharyya, IntraVariance };

inline const char* to_string(DistanceMetric m) {
    switch (m) {
        case DistanceMetric::MeanShift: return "mean-shift";
        case DistanceMetric::Bhattacharyya: return "bhattacharyya";
        case DistanceMetric::IntraVariance: return "intra-variance";
    }
    return "?";
}

inline DistanceMetric metric_from_string(const std::string& s) {
    if (s == "mean-shift") return DistanceMetric::MeanShift;
    if (s == "bhattacharyya") return DistanceMetric::Bhattacharyya;
    if (s == "intra-variance") return DistanceMetric::IntraVariance;
    throw Error("unknown statistical distance metric: " + s);
}

namespace detail {

// Candidate ordering: votes descending, then more horizontal (|theta - 90|
// ascending), then smaller rho, then smaller theta.
struct HoughCell {
    int rho_idx;
    int theta_idx;
    int votes;
};

inline bool hough_cell_less(const HoughCell& a, const HoughCell& b, double rho_step, double theta_step,
                            double rho_offset) {
    if (a.votes != b.votes) return a.votes > b.votes;
    const double ta = std::abs(a.theta_idx * theta_step - 90.0);
    const double tb = std::abs(b.theta_idx * theta_step - 90.0);
    if (ta != tb) return ta < tb;
    const double ra = a.rho_idx * rho_step - rho_offset;
    const double rb = b.rho_idx * rho_step - rho_offset;
    if (ra != rb) return ra < rb;
    return a.theta_idx < b.theta_idx;
}

}  // namespace detail

/// Hough transform over the edge mask. Every edge pixel votes once per theta
/// cell; integer votes make the result independent of accumulation order.
inline std::vector<LineCandidate> hough_lines(const EdgeMap& edges, const HoughParams& params = {},
                                              int threads = 1) {
    if (params.rho_step <= 0 || params.theta_step_deg <= 0 || params.top_k < 1)
        throw Error("invalid Hough parameters");
    std::vector<PixelCoord> pixels;
    for (int y = 0; y < edges.height; ++y)
        for (int x = 0; x < edges.width; ++x)
            if (edges.edge_at(x, y)) pixels.push_back({x, y});
    if (pixels.empty()) throw NoEdgePixels("edge map has no edge pixels");

    const int n_theta = static_cast<int>(std::lround(180.0 / params.theta_step_deg));
    const double rho_offset = std::hypot(edges.width - 1.0, edges.height - 1.0);
    const int n_rho = static_cast<int>(std::lround(2.0 * rho_offset / params.rho_step)) + 1;

    std::vector<double> cos_t(n_theta), sin_t(n_theta);
    for (int it = 0; it < n_theta; ++it) {
        const double theta = it * params.theta_step_deg * std::numbers::pi / 180.0;
        cos_t[it] = std::cos(theta);
        sin_t[it] = std::sin(theta);
    }

    // Partition edge pixels across threads; per-thread accumulators merge by
    // integer addition, bit-identical to the sequential pass.
    const std::size_t cells = static_cast<std::size_t>(n_rho) * n_theta;
    const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(pixels.size())));
    std::vector<std::vector<int>> partial(static_cast<std::size_t>(n_workers));
    {
        const std::size_t chunk = (pixels.size() + n_workers - 1) / n_workers;
        parallel_for(0, static_cast<std::size_t>(n_workers), n_workers, [&](std::size_t w0, std::size_t w1) {
            for (std::size_t wi = w0; wi < w1; ++wi) {
                auto& acc = partial[wi];
                acc.assign(cells, 0);
                const std::size_t lo = wi * chunk;
                const std::size_t hi = std::min(pixels.size(), lo + chunk);
                for (std::size_t p = lo; p < hi; ++p) {
                    const double x = pixels[p].x, y = pixels[p].y;
                    for (int it = 0; it < n_theta; ++it) {
                        const double rho = x * cos_t[it] + y * sin_t[it];
                        const int ir = static_cast<int>(std::llround((rho + rho_offset) / params.rho_step));
                        acc[static_cast<std::size_t>(ir) * n_theta + it] += 1;
                    }
                }
            }
        });
    }
    std::vector<int>& acc = partial[0];
    for (int wi = 1; wi < n_workers; ++wi)
        for (std::size_t i = 0; i < cells; ++i) acc[i] += partial[wi][i];

    std::vector<detail::HoughCell> nonzero;
    for (int ir = 0; ir < n_rho; ++ir)
        for (int it = 0; it < n_theta; ++it) {
            const int v = acc[static_cast<std::size_t>(ir) * n_theta + it];
            if (v > 0) nonzero.push_back({ir, it, v});
        }

    const std::size_t k = std::min<std::size_t>(params.top_k, nonzero.size());
    std::partial_sort(nonzero.begin(), nonzero.begin() + k, nonzero.end(),
                      [&](const detail::HoughCell& a, const detail::HoughCell& b) {
                          return detail::hough_cell_less(a, b, params.rho_step, params.theta_step_deg,
                                                         rho_offset);
                      });

    std::vector<LineCandidate> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        out.push_back({nonzero[i].rho_idx * params.rho_step - rho_offset,
                       nonzero[i].theta_idx * params.theta_step_deg, nonzero[i].votes});
    return out;
}

/// Converts a line candidate to the (Y, alpha) horizon parametrization; Y is
/// evaluated at the image's vertical center column x = (width - 1) / 2.
inline std::pair<double, double> line_to_horizon_params(const LineCandidate& line, int width) {
    const double theta = line.theta_deg * std::numbers::pi / 180.0;
    const double s = std::sin(theta);
    if (std::abs(s) < 1e-9) throw VerticalLine("line is vertical, no horizon parametrization");
    const double xc = (width - 1.0) / 2.0;
    const double y = (line.rho - xc * std::cos(theta)) / s;
    const double alpha = 90.0 - line.theta_deg;  // atan(cot theta) for theta in (0, 180)
    return {y, alpha};
}

struct SplitRegions {
    std::vector<PixelCoord> upper;
    std::vector<PixelCoord> lower;
};

/// Partitions the frame's pixels into the regions above and below the
/// candidate line. A pixel on the line belongs to the lower region.
inline SplitRegions split_regions(const Frame& frame, const LineCandidate& candidate) {
    const double theta = candidate.theta_deg * std::numbers::pi / 180.0;
    const double s = std::sin(theta);
    if (std::abs(s) < 1e-9) throw VerticalLine("cannot split on a vertical candidate");
    const double c = std::cos(theta);
    std::vector<double> cut(frame.width);
    for (int x = 0; x < frame.width; ++x) cut[x] = (candidate.rho - x * c) / s;

    SplitRegions r;
    r.upper.reserve(frame.pixel_count() / 2);
    r.lower.reserve(frame.pixel_count() / 2);
    for (int y = 0; y < frame.height; ++y)
        for (int x = 0; x < frame.width; ++x)
            (y < cut[x] ? r.upper : r.lower).push_back({x, y});
    if (r.upper.empty() || r.lower.empty())
        throw DegenerateSplit("candidate leaves an empty region");
    return r;
}

/// Statistical distance between two color distributions; higher separates
/// better for every metric.
inline double statistical_distance(const ColorDistribution& a, const ColorDistribution& b,
                                   DistanceMetric metric) {
    if (a.bins != b.bins || a.channels != b.channels)
        throw BinMismatch("distributions use different bin layouts");
    switch (metric) {
        case DistanceMetric::MeanShift: {
            double d = 0.0;
            for (int c = 0; c < a.channels; ++c) d += (a.mean[c] - b.mean[c]) * (a.mean[c] - b.mean[c]);
            return d;
        }
        case DistanceMetric::Bhattacharyya: {
            double d = 0.0;
            for (int c = 0; c < a.channels; ++c) {
                double bc = 0.0;
                for (int i = 0; i < a.bins; ++i) bc += std::sqrt(a.hist(c, i) * b.hist(c, i));
                if (bc > 1.0) bc = 1.0;
                d += -std::log(bc > 1e-300 ? bc : 1e-300);
            }
            return d;
        }
        case DistanceMetric::IntraVariance: {
            double v = 0.0;
            for (int c = 0; c < a.channels; ++c) v += a.variance[c] + b.variance[c];
            return 1.0 / (1.0 + v);
        }
    }
    throw Error("unreachable metric");
}

struct HorizonConfig {
    EdgeParams edge;
    HoughParams hough;
    DistanceMetric metric = DistanceMetric::MeanShift;
    int bins = 64;
    double min_region_fraction = 0.02;  // smaller splits are degenerate slivers
    int min_votes = 0;                  // <= 0: max(20, width / 8)
};

/// Scores the top Hough candidates by the statistical distance between the two
/// regions each one creates and returns the best split as the horizon.
inline HorizonEstimate detect_horizon(const Frame& frame, const HorizonConfig& config = {},
                                      int threads = 1) {
    const Frame gray = frame.channels == 3 ? to_grayscale(frame) : frame;
    const EdgeMap edges = edge_map(gray, config.edge, threads);
    if (edges.edge_count() == 0) throw NoLineFeatures("no edge pixels, cannot propose horizon candidates");

    const std::vector<LineCandidate> candidates = hough_lines(edges, config.hough, threads);
    const int min_votes = config.min_votes > 0 ? config.min_votes : std::max(20, frame.width / 8);
    if (candidates.empty() || candidates.front().votes < min_votes)
        throw NoLineFeatures("strongest line candidate is below the vote floor");

    const double min_region = config.min_region_fraction * static_cast<double>(frame.pixel_count());
    bool found = false;
    HorizonEstimate best;
    std::string last_reason = "no candidates";
    for (std::size_t rank = 0; rank < candidates.size(); ++rank) {
        const LineCandidate& cand = candidates[rank];
        double y, alpha;
        try {
            std::tie(y, alpha) = line_to_horizon_params(cand, frame.width);
        } catch (const VerticalLine&) {
            last_reason = "vertical candidate";
            continue;
        }
        if (y < 0.0 || y > frame.height) {
            last_reason = "line center outside the image";
            continue;
        }
        SplitRegions split;
        try {
            split = split_regions(frame, cand);
        } catch (const DegenerateSplit&) {
            last_reason = "empty region";
            continue;
        }
        if (static_cast<double>(split.upper.size()) < min_region ||
            static_cast<double>(split.lower.size()) < min_region) {
            last_reason = "sliver region below the size floor";
            continue;
        }
        const ColorDistribution up = region_distribution(frame, split.upper, config.bins);
        const ColorDistribution low = region_distribution(frame, split.lower, config.bins);
        const double score = statistical_distance(up, low, config.metric);
        if (!found || score > best.score) {
            found = true;
            best.y = y;
            best.alpha_deg = alpha;
            best.score = score;
            best.candidate_rank = static_cast<int>(rank);
        }
    }
    if (!found) throw DegenerateSplit("all candidates degenerate: " + last_reason);
    return best;
}

}  // namespace mariscope
