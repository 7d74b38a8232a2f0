#include "sdprop/sparse.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace sdprop {

void SparseDepth::validate() const {
    if (width < 1 || height < 1)
        throw error("SparseDepth: host dims must be >= 1");
    std::set<std::pair<int, int>> seen;
    for (const SparseEntry& e : entries) {
        if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height)
            throw error("SparseDepth: entry out of bounds");
        if (!(e.depth > 0.0) || !std::isfinite(e.depth))
            throw error("SparseDepth: depths must be > 0 and finite");
        if (e.conf < 0.0 || e.conf > 1.0)
            throw error("SparseDepth: conf must be in [0,1]");
        if (!seen.insert({e.x, e.y}).second)
            throw error("SparseDepth: duplicate coordinates");
    }
}

void write_sparse_depth(const std::string& path, const SparseDepth& s) {
    std::ofstream f(path);
    if (!f)
        throw error("cannot open for writing: " + path);
    f << "sparse_depth " << s.width << " " << s.height << " " << s.entries.size() << "\n";
    char buf[128];
    for (const SparseEntry& e : s.entries) {
        std::snprintf(buf, sizeof buf, "%d %d %.9g %.9g\n", e.x, e.y, e.depth, e.conf);
        f << buf;
    }
    if (!f)
        throw error("short sparse depth write");
}

SparseDepth read_sparse_depth(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw error("cannot open for reading: " + path);
    std::string magic;
    SparseDepth s;
    size_t count = 0;
    if (!(f >> magic >> s.width >> s.height >> count) || magic != "sparse_depth")
        throw error("sparse depth header mismatch: " + path);
    s.entries.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        SparseEntry e;
        if (!(f >> e.x >> e.y >> e.depth >> e.conf))
            throw error("sparse depth truncated: " + path);
        s.entries.push_back(e);
    }
    s.validate();
    return s;
}

Grid2D<int32_t> sparse_index_map(const SparseDepth& s) {
    Grid2D<int32_t> idx(s.width, s.height, -1);
    for (size_t i = 0; i < s.entries.size(); ++i)
        idx.at(s.entries[i].x, s.entries[i].y) = int32_t(i);
    return idx;
}

} // namespace sdprop
