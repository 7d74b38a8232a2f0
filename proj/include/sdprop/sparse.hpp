#pragma once

#include <string>
#include <vector>

#include "sdprop/grid.hpp"

namespace sdprop {

struct SparseEntry {
    int x = 0;
    int y = 0;
    double depth = 0.0;   // > 0
    double conf = 1.0;    // [0,1]
};

// Sparse depth observations over a width x height host grid. Coordinates are
// unique and in bounds, depths strictly positive.
struct SparseDepth {
    int width = 0;
    int height = 0;
    std::vector<SparseEntry> entries;

    void validate() const;
};

// Text format, lossless at 9 significant digits:
//   sparse_depth <width> <height> <count>
//   x y depth conf          (one line per entry)
void write_sparse_depth(const std::string& path, const SparseDepth& s);
SparseDepth read_sparse_depth(const std::string& path);

// Dense index of sparse entries: -1 where no entry, else index into entries.
Grid2D<int32_t> sparse_index_map(const SparseDepth& s);

} // namespace sdprop
