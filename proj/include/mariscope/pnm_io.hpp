#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "mariscope/frame.hpp"

namespace mariscope {

namespace detail {

// Skips whitespace and '#' comment lines between PNM header tokens.
inline int next_pnm_token(std::istream& in) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            in.unget();
            return c;
        }
        c = in.get();
    }
    return EOF;
}

inline long read_pnm_int(std::istream& in, const std::string& path) {
    if (next_pnm_token(in) == EOF) throw IoError("truncated PNM header: " + path);
    long v = 0;
    in >> v;
    if (!in) throw IoError("malformed PNM header: " + path);
    return v;
}

}  // namespace detail

/// Reads a binary PGM (P5) or PPM (P6) file with maxval 255.
inline Frame read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw IoError("not a binary PGM/PPM file: " + path.string());
    const int channels = magic[1] == '5' ? 1 : 3;

    const long w = detail::read_pnm_int(in, path.string());
    const long h = detail::read_pnm_int(in, path.string());
    const long maxval = detail::read_pnm_int(in, path.string());
    if (maxval != 255) throw IoError("unsupported PNM maxval " + std::to_string(maxval) + ": " + path.string());
    in.get();  // single whitespace after maxval

    Frame f;
    f.width = static_cast<int>(w);
    f.height = static_cast<int>(h);
    f.channels = channels;
    f.data.resize(static_cast<std::size_t>(w) * h * channels);
    in.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size()));
    if (!in) throw IoError("truncated PNM payload: " + path.string());
    f.validate();
    return f;
}

/// Writes a frame as binary PGM (1 channel) or PPM (3 channels).
inline void write_pnm(const Frame& frame, const std::filesystem::path& path) {
    frame.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path.string());
    out << (frame.channels == 1 ? "P5" : "P6") << "\n"
        << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.data.data()), static_cast<std::streamsize>(frame.data.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

/// Canonical numbered frame filename, e.g. frame_000042.ppm.
inline std::filesystem::path frame_path(const std::filesystem::path& dir, const char* stem, int index,
                                        const char* ext) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%06d.%s", stem, index, ext);
    return dir / name;
}

struct FrameEntry {
    int index = 0;
    std::filesystem::path path;
};

/// Lists frame files in a directory, ordered by the number embedded in the
/// filename (the last run of digits in the stem).
inline std::vector<FrameEntry> list_frames(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<FrameEntry> entries;
    for (const auto& de : std::filesystem::directory_iterator(dir)) {
        if (!de.is_regular_file()) continue;
        const auto ext = de.path().extension().string();
        if (ext != ".pgm" && ext != ".ppm") continue;
        const std::string stem = de.path().stem().string();
        auto last = stem.find_last_not_of("0123456789");
        std::string digits = last == std::string::npos ? stem : stem.substr(last + 1);
        if (digits.empty()) continue;
        entries.push_back({std::stoi(digits), de.path()});
    }
    std::sort(entries.begin(), entries.end(), [](const FrameEntry& a, const FrameEntry& b) {
        return a.index != b.index ? a.index < b.index : a.path < b.path;
    });
    return entries;
}

}  // namespace mariscope
