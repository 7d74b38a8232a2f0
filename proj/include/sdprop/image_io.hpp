#pragma once

#include <string>

#include "sdprop/grid.hpp"

namespace sdprop {

// PFM, little-endian float32 (scale -1.0), rows stored bottom-up per the
// format convention. "Pf" = 1 channel (depth), "PF" = 3 channels (normals).
void write_pfm(const std::string& path, const DepthGrid& g);
DepthGrid read_pfm(const std::string& path);
void write_pfm_normals(const std::string& path, const NormalGrid& g);
NormalGrid read_pfm_normals(const std::string& path);

// 16-bit PGM (P5, maxval 65535, big-endian samples). Depth is stored in
// millimeters, rounded; 0 stays the invalid sentinel.
void write_pgm16_depth(const std::string& path, const DepthGrid& g);
DepthGrid read_pgm16_depth(const std::string& path);

// 8-bit PGM for masks: 0 = false, 255 = true.
void write_pgm_mask(const std::string& path, const MaskGrid& g);
MaskGrid read_pgm_mask(const std::string& path);

// Binary PPM (P6, maxval 255), channels quantized from [0,1].
void write_ppm(const std::string& path, const ColorGrid& g);
ColorGrid read_ppm(const std::string& path);

} // namespace sdprop
