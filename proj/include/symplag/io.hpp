#pragma once
// File formats.
//   Scalar field:  CSV "x,y,re,im", one row per node, plus a JSON sidecar
//                  {nx, ny, x0, y0, dx, dy} next to it (same stem, .json).
//   Immersion:     CSV "i,j,x,y,f1,f2,f3,f4" with optional frame columns
//                  X11..X44 (row-major), plus the same JSON sidecar.
//   Mesh:          Wavefront OBJ height surface over (x, y): vertex
//                  (x, y, f_a), texture coordinate (f_b, 0), two triangles
//                  per grid cell.
// Doubles are written with 17 significant digits, which round-trips exactly.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cartan.hpp"

namespace symplag::io {

namespace fs = std::filesystem;
using nlohmann::json;

inline json geom_to_json(const GridGeom& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"x0", g.x0}, {"y0", g.y0}, {"dx", g.dx}, {"dy", g.dy}};
}

inline GridGeom geom_from_json(const json& j) {
  try {
    GridGeom g{j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("x0").get<double>(),
               j.at("y0").get<double>(), j.at("dx").get<double>(), j.at("dy").get<double>()};
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad grid geometry: ") + e.what());
  }
}

inline fs::path sidecar_path(const fs::path& csv) { return fs::path(csv).replace_extension(".json"); }

inline std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream os(p);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  return os;
}

inline std::ifstream open_in(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot open " + p.string());
  return is;
}

inline json read_json(const fs::path& p) {
  auto is = open_in(p);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& p, const json& j) {
  auto os = open_out(p);
  os << j.dump(2) << "\n";
}

inline std::vector<double> parse_row(const std::string& line, std::size_t expect, const fs::path& p, std::size_t lineno) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      throw IoError(p.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
    }
  }
  if (out.size() != expect)
    throw IoError(p.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(expect) + " columns");
  return out;
}

// ---- scalar fields ---------------------------------------------------------------

inline void write_field_csv(const fs::path& p, const ComplexGrid& f) {
  auto os = open_out(p);
  os << "x,y,re,im\n";
  for (int i = 0; i < f.nx(); ++i)
    for (int j = 0; j < f.ny(); ++j)
      os << fmt17(f.geom.x(i)) << ',' << fmt17(f.geom.y(j)) << ',' << fmt17(f(i, j).real()) << ','
         << fmt17(f(i, j).imag()) << '\n';
  write_json(sidecar_path(p), geom_to_json(f.geom));
}

inline ComplexGrid read_field_csv(const fs::path& p) {
  const GridGeom g = geom_from_json(read_json(sidecar_path(p)));
  auto is = open_in(p);
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,re,im", 0) != 0) throw IoError(p.string() + ": missing header x,y,re,im");
  ComplexGrid f(g);
  std::size_t n = 0, lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto r = parse_row(line, 4, p, lineno);
    if (n >= g.size()) throw IoError(p.string() + ": more rows than the sidecar geometry allows");
    const int i = static_cast<int>(n / g.ny), j = static_cast<int>(n % g.ny);
    if (std::abs(r[0] - g.x(i)) > 1e-9 * std::max(1.0, std::abs(g.x(i))) ||
        std::abs(r[1] - g.y(j)) > 1e-9 * std::max(1.0, std::abs(g.y(j))))
      throw IoError(p.string() + ":" + std::to_string(lineno) + ": node position disagrees with sidecar geometry");
    f(i, j) = {r[2], r[3]};
    ++n;
  }
  if (n != g.size()) throw IoError(p.string() + ": expected " + std::to_string(g.size()) + " rows, got " + std::to_string(n));
  return f;
}

// ---- immersions ------------------------------------------------------------------

inline void write_immersion_csv(const fs::path& p, const ImmersionGrid& m, const Grid<Mat5>* frames = nullptr) {
  if (frames) require_same(m.geom, frames->geom);
  auto os = open_out(p);
  os << "i,j,x,y,f1,f2,f3,f4";
  if (frames)
    for (int r = 1; r <= 4; ++r)
      for (int c = 1; c <= 4; ++c) os << ",X" << r << c;
  os << '\n';
  for (int i = 0; i < m.nx(); ++i)
    for (int j = 0; j < m.ny(); ++j) {
      os << i << ',' << j << ',' << fmt17(m.geom.x(i)) << ',' << fmt17(m.geom.y(j));
      for (int k = 0; k < 4; ++k) os << ',' << fmt17(m(i, j)(k));
      if (frames)
        for (int r = 1; r <= 4; ++r)
          for (int c = 1; c <= 4; ++c) os << ',' << fmt17((*frames)(i, j)(r, c));
      os << '\n';
    }
  write_json(sidecar_path(p), geom_to_json(m.geom));
}

struct ImmersionFile {
  ImmersionGrid f;
  bool has_frames = false;
  Grid<Mat5> frames;
};

// Geometry comes from the sidecar when present, else from the i,j,x,y columns.
inline ImmersionFile read_immersion_csv(const fs::path& p) {
  auto is = open_in(p);
  std::string header;
  if (!std::getline(is, header) || header.rfind("i,j,x,y,f1,f2,f3,f4", 0) != 0)
    throw IoError(p.string() + ": missing header i,j,x,y,f1,f2,f3,f4");
  const bool frames = header.find(",X11") != std::string::npos;
  const std::size_t cols = frames ? 24 : 8;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 1;
  int nx = 0, ny = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    rows.push_back(parse_row(line, cols, p, lineno));
    nx = std::max(nx, static_cast<int>(rows.back()[0]) + 1);
    ny = std::max(ny, static_cast<int>(rows.back()[1]) + 1);
  }
  GridGeom g;
  if (fs::exists(sidecar_path(p))) {
    g = geom_from_json(read_json(sidecar_path(p)));
  } else {
    if (nx < 2 || ny < 2) throw IoError(p.string() + ": cannot infer geometry without a sidecar");
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    for (const auto& r : rows) {
      if (r[0] == 0 && r[1] == 0) x0 = r[2], y0 = r[3];
      if (r[0] == 1 && r[1] == 0) x1 = r[2];
      if (r[0] == 0 && r[1] == 1) y1 = r[3];
    }
    g = {nx, ny, x0, y0, x1 - x0, y1 - y0};
    g.validate();
  }
  if (rows.size() != g.size() || nx != g.nx || ny != g.ny)
    throw IoError(p.string() + ": row count does not match grid " + std::to_string(g.nx) + "x" + std::to_string(g.ny));
  ImmersionFile out{ImmersionGrid(g), frames, Grid<Mat5>(g, Mat5::Identity())};
  for (const auto& r : rows) {
    const int i = static_cast<int>(r[0]), j = static_cast<int>(r[1]);
    if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) throw IoError(p.string() + ": node index out of range");
    out.f(i, j) = Vec4(r[4], r[5], r[6], r[7]);
    if (frames) {
      Mat5& S = out.frames(i, j);
      S.block<4, 1>(1, 0) = out.f(i, j);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) S(1 + a, 1 + b) = r[8 + 4 * a + b];
    }
  }
  return out;
}

// ---- meshes ----------------------------------------------------------------------

enum class MeshFormat { csv, obj_f1f2, obj_f3f4 };

inline MeshFormat parse_mesh_format(const std::string& s) {
  if (s == "csv") return MeshFormat::csv;
  if (s == "obj-xy-f1f2") return MeshFormat::obj_f1f2;
  if (s == "obj-xy-f3f4") return MeshFormat::obj_f3f4;
  throw ConfigError("unknown mesh format '" + s + "' (csv, obj-xy-f1f2, obj-xy-f3f4)");
}

inline void write_obj(const fs::path& p, const ImmersionGrid& m, int a, int b) {
  auto os = open_out(p);
  os << "# height surface over (x, y): z = f" << a + 1 << ", texture u = f" << b + 1 << "\n";
  for (int i = 0; i < m.nx(); ++i)
    for (int j = 0; j < m.ny(); ++j)
      os << "v " << fmt17(m.geom.x(i)) << ' ' << fmt17(m.geom.y(j)) << ' ' << fmt17(m(i, j)(a)) << '\n';
  for (int i = 0; i < m.nx(); ++i)
    for (int j = 0; j < m.ny(); ++j) os << "vt " << fmt17(m(i, j)(b)) << " 0\n";
  auto id = [&](int i, int j) { return m.index(i, j) + 1; };
  for (int i = 0; i + 1 < m.nx(); ++i)
    for (int j = 0; j + 1 < m.ny(); ++j) {
      const auto v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      os << "f " << v00 << '/' << v00 << ' ' << v10 << '/' << v10 << ' ' << v11 << '/' << v11 << '\n';
      os << "f " << v00 << '/' << v00 << ' ' << v11 << '/' << v11 << ' ' << v01 << '/' << v01 << '\n';
    }
}

inline void export_mesh(const ImmersionGrid& m, MeshFormat fmt, const fs::path& p) {
  for (const auto& v : m.v)
    if (!v.allFinite()) throw IoError("immersion contains non-finite values");
  switch (fmt) {
    case MeshFormat::csv: write_immersion_csv(p, m); break;
    case MeshFormat::obj_f1f2: write_obj(p, m, 0, 1); break;
    case MeshFormat::obj_f3f4: write_obj(p, m, 2, 3); break;
  }
}

}  // namespace symplag::io
