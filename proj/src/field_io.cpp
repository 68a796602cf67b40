#include "parcon/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace parcon {

namespace {

void append_value(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_row(std::string& out, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    append_value(out, v[i]);
  }
  out += '\n';
}

std::string header_line(const char* tag, const Grids& grids) {
  const SpatialGrid& s = grids.space;
  std::string out = tag;
  out += ' ';
  out += std::to_string(s.dim);
  out += ' ';
  out += std::to_string(s.nodes[0]);
  out += ' ';
  out += std::to_string(s.dim == 2 ? s.nodes[1] : 1);
  out += ' ';
  append_value(out, s.extent[0]);
  out += ' ';
  append_value(out, s.dim == 2 ? s.extent[1] : 0.0);
  out += ' ';
  append_value(out, grids.time.horizon);
  out += ' ';
  out += std::to_string(grids.time.steps);
  return out;
}

struct ParsedHeader {
  Grids grids;
  std::string extra;  // trailing token after the fixed fields, if any
};

ParsedHeader read_header(std::istream& in, const char* tag,
                         const std::filesystem::path& path, bool want_extra) {
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("empty file: " + path.string());
  }
  std::istringstream hs(line);
  std::string found;
  int dim = 0, nx = 0, ny = 0, steps = 0;
  double lx = 0.0, ly = 0.0, horizon = 0.0;
  hs >> found >> dim >> nx >> ny >> lx >> ly >> horizon >> steps;
  if (!hs || found != tag) {
    throw IoError("malformed " + std::string(tag) + " header in " +
                  path.string());
  }
  if ((dim != 1 && dim != 2) || nx < 3 || (dim == 2 && ny < 3) || steps < 1 ||
      horizon <= 0.0 || lx <= 0.0 || (dim == 2 && ly <= 0.0)) {
    throw IoError("invalid " + std::string(tag) + " header values in " +
                  path.string());
  }
  ParsedHeader h;
  h.grids.space = dim == 1 ? SpatialGrid::interval(nx, lx)
                           : SpatialGrid::rectangle(nx, ny, lx, ly);
  h.grids.time = TimeGrid{horizon, steps};
  if (want_extra) {
    hs >> h.extra;
    if (!hs) {
      throw IoError("missing sign mode in measure header of " + path.string());
    }
  }
  return h;
}

void read_row(std::istream& in, double* v, std::size_t n,
              const std::filesystem::path& path) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> v[i])) {
      throw IoError("truncated data in " + path.string());
    }
  }
}

}  // namespace

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open for writing: " + tmp.string());
    }
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("rename failed for " + path.string());
  }
}

void write_field(const std::filesystem::path& path, const Grids& grids,
                 const GridFunction& values) {
  if (!values.matches(grids)) {
    throw DimensionMismatch("field shape does not match grids");
  }
  std::string out = header_line("field", grids);
  out += '\n';
  const std::size_t ni = values.interior_count();
  for (int k = 0; k <= values.steps(); ++k) {
    append_row(out, values.level(k).data(), ni);
  }
  write_text_atomic(path, out);
}

FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open: " + path.string());
  }
  ParsedHeader h = read_header(in, "field", path, false);
  FieldFile f;
  f.grids = h.grids;
  f.values = GridFunction(f.grids);
  const std::size_t ni = f.values.interior_count();
  for (int k = 0; k <= f.values.steps(); ++k) {
    read_row(in, f.values.level(k).data(), ni, path);
  }
  double extra;
  if (in >> extra) {
    throw IoError("trailing data in " + path.string());
  }
  return f;
}

void write_measure(const std::filesystem::path& path, const Grids& grids,
                   const MeasurePair& measure) {
  if (!measure.matches(grids)) {
    throw DimensionMismatch("measure shape does not match grids");
  }
  std::string out = header_line("measure", grids);
  out += ' ';
  out += measure.sign_mode == MeasurePair::Sign::Nonnegative ? "nonnegative"
                                                             : "signed";
  out += '\n';
  const std::size_t ni = measure.interior;
  for (int k = 1; k <= measure.steps; ++k) {
    append_row(out, measure.mass_q.data() +
                        static_cast<std::size_t>(k - 1) * ni,
               ni);
  }
  append_row(out, measure.mass_terminal.data(), ni);
  write_text_atomic(path, out);
}

MeasureFile read_measure(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open: " + path.string());
  }
  ParsedHeader h = read_header(in, "measure", path, true);
  MeasurePair::Sign sign;
  if (h.extra == "nonnegative") {
    sign = MeasurePair::Sign::Nonnegative;
  } else if (h.extra == "signed") {
    sign = MeasurePair::Sign::Signed;
  } else {
    throw IoError("unknown sign mode \"" + h.extra + "\" in " + path.string());
  }
  MeasureFile m;
  m.grids = h.grids;
  m.measure = MeasurePair::zero(m.grids, sign);
  const std::size_t ni = m.measure.interior;
  for (int k = 1; k <= m.measure.steps; ++k) {
    read_row(in,
             m.measure.mass_q.data() + static_cast<std::size_t>(k - 1) * ni,
             ni, path);
  }
  read_row(in, m.measure.mass_terminal.data(), ni, path);
  double extra;
  if (in >> extra) {
    throw IoError("trailing data in " + path.string());
  }
  if (sign == MeasurePair::Sign::Nonnegative && m.measure.min_mass() < 0.0) {
    throw SignViolation("measure file declares nonnegative but carries "
                        "negative mass: " +
                        path.string());
  }
  return m;
}

}  // namespace parcon
