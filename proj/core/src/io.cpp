#include "dakit/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dakit {

namespace {

// the format is little endian; this code targets little-endian hosts
void put_u32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void put_f64(std::ofstream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
double get_f64(std::ifstream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

} // namespace

void write_state_swf1(const std::string& path, const GridSpec& grid, const StateField& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write("SWF1", 4);
  put_u32(out, static_cast<std::uint32_t>(grid.nx));
  put_u32(out, static_cast<std::uint32_t>(grid.ny));
  put_f64(out, grid.dx);
  put_f64(out, grid.dy);
  put_f64(out, grid.gravity);
  for (int c = 0; c < 3; ++c)
    out.write(reinterpret_cast<const char*>(s.comp(c).data()), static_cast<std::streamsize>(8 * s.comp(c).size()));
  if (!out) throw std::runtime_error("short write on " + path);
}

std::pair<GridSpec, StateField> read_state_swf1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SWF1", 4) != 0) throw std::runtime_error(path + ": not a SWF1 snapshot");
  GridSpec g;
  g.nx = static_cast<int>(get_u32(in));
  g.ny = static_cast<int>(get_u32(in));
  g.dx = get_f64(in);
  g.dy = get_f64(in);
  g.gravity = get_f64(in);
  g.validate();
  StateField s(g);
  for (int c = 0; c < 3; ++c)
    in.read(reinterpret_cast<char*>(s.comp(c).data()), static_cast<std::streamsize>(8 * s.comp(c).size()));
  if (!in) throw std::runtime_error(path + ": truncated snapshot");
  return {g, s};
}

void write_state_csv(const std::string& path, const GridSpec& grid, const StateField& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x,y,h,hu,hv\n";
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      out << format_full(grid.xc(i)) << ',' << format_full(grid.yc(j)) << ',' << format_full(s.h(i, j)) << ','
          << format_full(s.hu(i, j)) << ',' << format_full(s.hv(i, j)) << '\n';
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace dakit
