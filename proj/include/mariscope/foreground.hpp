#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mariscope/background.hpp"

namespace mariscope {

/// Connected foreground region treated as one detection.
struct Blob {
    int frame_index = 0;
    int x = 0, y = 0, w = 0, h = 0;  // bounding box
    int area = 0;
    double cx = 0.0, cy = 0.0;  // centroid
};

enum class MotionLabel { Undetermined, Static, Dynamic };

inline const char* to_string(MotionLabel m) {
    switch (m) {
        case MotionLabel::Undetermined: return "undetermined";
        case MotionLabel::Static: return "static";
        case MotionLabel::Dynamic: return "dynamic";
    }
    return "?";
}

struct Track {
    int id = 0;
    std::vector<Blob> history;  // strictly increasing frame_index
    MotionLabel label = MotionLabel::Undetermined;
    int last_frame = -1;

    const Blob& last() const { return history.back(); }
};

/// Extracts maximal connected foreground regions with area >= min_area,
/// ordered by area descending, ties by top-left box corner.
inline std::vector<Blob> connected_components(const ForegroundMask& mask, int connectivity = 8,
                                              int min_area = 1) {
    if (connectivity != 4 && connectivity != 8) throw Error("connectivity must be 4 or 8");
    const int w = mask.width, h = mask.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);

    // Union-find over provisional labels (two-pass labeling).
    std::vector<int> parent;
    auto find = [&](int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (!mask.fg[i]) continue;
            int best = -1;
            auto consider = [&](int nx, int ny) {
                if (nx < 0 || nx >= w || ny < 0) return;
                const int l = label[static_cast<std::size_t>(ny) * w + nx];
                if (l < 0) return;
                if (best < 0) {
                    best = l;
                } else {
                    unite(best, l);
                }
            };
            consider(x - 1, y);
            consider(x, y - 1);
            if (connectivity == 8) {
                consider(x - 1, y - 1);
                consider(x + 1, y - 1);
            }
            if (best < 0) {
                best = static_cast<int>(parent.size());
                parent.push_back(best);
            }
            label[i] = find(best);
        }
    }

    struct Agg {
        long long sx = 0, sy = 0;
        int area = 0;
        int min_x = 1 << 30, min_y = 1 << 30, max_x = -1, max_y = -1;
    };
    std::vector<int> root_of(parent.size());
    for (std::size_t r = 0; r < parent.size(); ++r) root_of[r] = find(static_cast<int>(r));
    std::vector<Agg> agg(parent.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int l = label[static_cast<std::size_t>(y) * w + x];
            if (l < 0) continue;
            Agg& a = agg[root_of[l]];
            a.sx += x;
            a.sy += y;
            a.area += 1;
            a.min_x = std::min(a.min_x, x);
            a.min_y = std::min(a.min_y, y);
            a.max_x = std::max(a.max_x, x);
            a.max_y = std::max(a.max_y, y);
        }
    }

    std::vector<Blob> blobs;
    for (std::size_t r = 0; r < parent.size(); ++r) {
        if (root_of[r] != static_cast<int>(r)) continue;
        const Agg& a = agg[r];
        if (a.area < min_area) continue;
        Blob b;
        b.frame_index = mask.frame_index;
        b.x = a.min_x;
        b.y = a.min_y;
        b.w = a.max_x - a.min_x + 1;
        b.h = a.max_y - a.min_y + 1;
        b.area = a.area;
        b.cx = static_cast<double>(a.sx) / a.area;
        b.cy = static_cast<double>(a.sy) / a.area;
        blobs.push_back(b);
    }
    std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
        if (a.area != b.area) return a.area > b.area;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return blobs;
}

struct TrackerParams {
    double max_dist = 30.0;  // centroid gating distance for association
    int gap_max = 5;         // frames a track survives unseen
    int l_min = 20;          // history needed before motion is judged
    double eps = 2.0;        // static/dynamic deviation threshold in pixels
};

/// Motion label from centroid spread: static when the centroid's maximum
/// deviation from its mean over the last l_min frames stays within eps.
inline MotionLabel classify_motion(const Track& track, double eps, int l_min) {
    if (static_cast<int>(track.history.size()) < l_min) return MotionLabel::Undetermined;
    const std::size_t n = track.history.size();
    const std::size_t begin = n - static_cast<std::size_t>(l_min);
    double mx = 0, my = 0;
    for (std::size_t i = begin; i < n; ++i) {
        mx += track.history[i].cx;
        my += track.history[i].cy;
    }
    mx /= l_min;
    my /= l_min;
    double max_dev = 0;
    for (std::size_t i = begin; i < n; ++i) {
        const double d = std::hypot(track.history[i].cx - mx, track.history[i].cy - my);
        max_dev = std::max(max_dev, d);
    }
    return max_dev <= eps ? MotionLabel::Static : MotionLabel::Dynamic;
}

/// Greedy nearest-centroid association: smallest distance first, one blob per
/// track. Unmatched blobs open new tracks; tracks unseen longer than gap_max
/// are closed (moved out of the active list).
inline void associate_blobs(std::vector<Track>& tracks, const std::vector<Blob>& blobs, int frame_index,
                            const TrackerParams& params, int& next_track_id,
                            std::vector<Track>* closed = nullptr) {
    for (const Blob& b : blobs)
        if (b.frame_index != frame_index)
            throw FrameOrderViolation("blobs must all come from the current frame");
    for (const Track& t : tracks)
        if (frame_index <= t.last_frame)
            throw FrameOrderViolation("blob frame is not later than track history");

    struct Pair {
        double dist;
        std::size_t track;
        std::size_t blob;
    };
    std::vector<Pair> pairs;
    for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
        for (std::size_t bi = 0; bi < blobs.size(); ++bi) {
            const double d =
                std::hypot(tracks[ti].last().cx - blobs[bi].cx, tracks[ti].last().cy - blobs[bi].cy);
            if (d <= params.max_dist) pairs.push_back({d, ti, bi});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (tracks[a.track].id != tracks[b.track].id) return tracks[a.track].id < tracks[b.track].id;
        return a.blob < b.blob;
    });

    std::vector<char> track_used(tracks.size(), 0), blob_used(blobs.size(), 0);
    for (const Pair& p : pairs) {
        if (track_used[p.track] || blob_used[p.blob]) continue;
        track_used[p.track] = 1;
        blob_used[p.blob] = 1;
        Track& t = tracks[p.track];
        t.history.push_back(blobs[p.blob]);
        t.last_frame = frame_index;
        t.label = classify_motion(t, params.eps, params.l_min);
    }
    for (std::size_t bi = 0; bi < blobs.size(); ++bi) {
        if (blob_used[bi]) continue;
        Track t;
        t.id = next_track_id++;
        t.history.push_back(blobs[bi]);
        t.last_frame = frame_index;
        tracks.push_back(std::move(t));
    }
    if (frame_index >= 0) {
        auto expired = [&](const Track& t) { return frame_index - t.last_frame > params.gap_max; };
        if (closed) {
            for (const Track& t : tracks)
                if (expired(t)) closed->push_back(t);
        }
        std::erase_if(tracks, expired);
    }
}

/// Frame-ordered tracker wrapping associate_blobs; single writer per stream.
class Tracker {
public:
    explicit Tracker(const TrackerParams& params = {}) : params_(params) {}

    void update(const std::vector<Blob>& blobs) {
        associate_blobs(active_, blobs, params_, next_id_, &closed_);
    }

    const std::vector<Track>& active() const { return active_; }
    const std::vector<Track>& closed() const { return closed_; }
    const TrackerParams& params() const { return params_; }

    std::vector<Track> all_tracks() const {
        std::vector<Track> out = closed_;
        out.insert(out.end(), active_.begin(), active_.end());
        std::sort(out.begin(), out.end(), [](const Track& a, const Track& b) { return a.id < b.id; });
        return out;
    }

private:
    TrackerParams params_;
    std::vector<Track> active_;
    std::vector<Track> closed_;
    int next_id_ = 0;
};

}  // namespace mariscope
