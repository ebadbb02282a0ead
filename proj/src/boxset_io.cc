#include "chainrec/boxset_io.h"

#include <fstream>
#include <sstream>

#include "chainrec/errors.h"

namespace chainrec {

std::string to_csv(const BoxSet& s) {
  std::string out = "ix,iy\n";
  out.reserve(out.size() + s.size() * 10);
  for (CellId id : s) {
    const Cell c = s.grid().cell(id);
    out += std::to_string(c.ix);
    out += ',';
    out += std::to_string(c.iy);
    out += '\n';
  }
  return out;
}

BoxSet boxset_from_csv(const Grid& grid, std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "ix,iy") {
    throw ConfigError("cell CSV must start with header 'ix,iy'");
  }
  std::vector<CellId> ids;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    long long ix = -1;
    long long iy = -1;
    char comma = 0;
    if (!(fields >> ix >> comma >> iy) || comma != ',' || ix < 0 || iy < 0 ||
        ix >= grid.side() || iy >= grid.side()) {
      throw ConfigError("malformed cell CSV line " + std::to_string(lineno));
    }
    ids.push_back(grid.id(Cell{static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy)}));
  }
  return BoxSet(grid, std::move(ids));
}

void write_csv(const std::filesystem::path& path, const BoxSet& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_csv(s);
}

BoxSet read_csv(const Grid& grid, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return boxset_from_csv(grid, in);
}

nlohmann::json grid_to_json(const Grid& grid) {
  const auto& b = grid.bounds();
  nlohmann::json membership;
  if (grid.membership().kind == Membership::Kind::kDisc) {
    membership = {{"kind", "disc"},
                  {"center", {grid.membership().center.real(), grid.membership().center.imag()}},
                  {"radius", grid.membership().radius}};
  } else {
    membership = {{"kind", "rect"}};
  }
  return {{"bounds", {b.re.lo, b.re.hi, b.im.lo, b.im.hi}},
          {"depth", grid.depth()},
          {"membership", membership}};
}

Grid grid_from_json(const nlohmann::json& j) {
  try {
    const auto& b = j.at("bounds");
    if (!b.is_array() || b.size() != 4) throw ConfigError("grid.bounds must have 4 numbers");
    const IntervalBox2 bounds = IntervalBox2::from_bounds(b[0].get<double>(), b[1].get<double>(),
                                                          b[2].get<double>(), b[3].get<double>());
    Membership m = Membership::rect();
    if (j.contains("membership")) {
      const auto& mj = j.at("membership");
      const std::string kind = mj.at("kind").get<std::string>();
      if (kind == "disc") {
        Point center{0.0, 0.0};
        if (mj.contains("center")) {
          center = {mj.at("center").at(0).get<double>(), mj.at("center").at(1).get<double>()};
        }
        m = Membership::disc(center, mj.value("radius", 1.0));
      } else if (kind != "rect") {
        throw ConfigError("grid.membership.kind must be 'disc' or 'rect'");
      }
    }
    return Grid(bounds, j.at("depth").get<int>(), m);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed grid sidecar: ") + e.what());
  }
}

void write_pgm(const std::filesystem::path& path, const BoxSet& s) {
  const Grid& grid = s.grid();
  grid.require_dense("PGM raster");
  const std::uint32_t n = grid.side();
  std::string pixels(grid.lattice_size(), '\0');
  for (CellId id : s) {
    const Cell c = grid.cell(id);
    pixels[std::size_t{n - 1 - c.iy} * n + c.ix] = static_cast<char>(255);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "P5\n" << n << ' ' << n << "\n255\n";
  out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace chainrec
