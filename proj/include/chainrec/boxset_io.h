#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "chainrec/grid.h"

namespace chainrec {

// CSV with header "ix,iy", one member cell per line in id order.
std::string to_csv(const BoxSet& s);
BoxSet boxset_from_csv(const Grid& grid, std::istream& in);

void write_csv(const std::filesystem::path& path, const BoxSet& s);
BoxSet read_csv(const Grid& grid, const std::filesystem::path& path);

// Sidecar: {"bounds": [re_lo, re_hi, im_lo, im_hi], "depth": d, "membership": {...}}.
nlohmann::json grid_to_json(const Grid& grid);
Grid grid_from_json(const nlohmann::json& j);

// Binary PGM (P5), one pixel per lattice cell, 255 = member. The top image
// row is the highest iy.
void write_pgm(const std::filesystem::path& path, const BoxSet& s);

}  // namespace chainrec
