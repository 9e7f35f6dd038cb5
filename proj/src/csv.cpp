#include "csv.hpp"

#include <charconv>
#include <cmath>

#include "errors.hpp"

namespace velmat {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string csv_escape(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) throw Error(ErrorCode::invalid_argument, "cannot open " + path.string() + " for writing");
}

void CsvWriter::line(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(cells[i]);
  }
  out_ << "\r\n";
  if (!out_) throw Error(ErrorCode::invalid_argument, "write to " + path_.string() + " failed");
}

void CsvWriter::header(const std::vector<std::string>& names) { line(names); }

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  line(cells);
}

namespace {

std::vector<std::string> coord_names(int d) {
  std::vector<std::string> h;
  for (int a = 0; a < d; ++a) h.push_back("x" + std::to_string(a + 1));
  return h;
}

}  // namespace

void write_velocity_csv(const std::filesystem::path& path, const VelocityField& f) {
  const int d = f.grid.dim();
  CsvWriter w(path);
  auto h = coord_names(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) h.push_back("M" + std::to_string(i + 1) + std::to_string(j + 1));
  w.header(h);
  for (std::size_t n = 0; n < f.grid.size(); ++n) {
    if (!f.valid[n]) continue;
    const Point p = f.grid.point(n);
    std::vector<double> r(p.begin(), p.begin() + d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) r.push_back(f.M[n](i, j));
    w.row(r);
  }
}

void write_distance_csv(const std::filesystem::path& path, const DistanceField& f) {
  const int d = f.grid.dim();
  CsvWriter w(path);
  auto h = coord_names(d);
  h.push_back("value");
  w.header(h);
  for (std::size_t n = 0; n < f.grid.size(); ++n) {
    const Point p = f.grid.point(n);
    std::vector<double> r(p.begin(), p.begin() + d);
    r.push_back(f.value[n]);
    w.row(r);
  }
}

void write_evolution_csv(const std::filesystem::path& path, const EvolutionLog& log, int d) {
  CsvWriter w(path);
  std::vector<std::string> h{"t", "energy"};
  for (int a = 0; a < d; ++a) {
    h.push_back("supp_lo_" + std::to_string(a + 1));
    h.push_back("supp_hi_" + std::to_string(a + 1));
  }
  h.push_back("boundary_margin");
  h.push_back("max_abs");
  w.header(h);
  const double nan = std::nan("");
  for (const LogEntry& e : log.entries) {
    std::vector<double> r{e.t, e.energy};
    for (int a = 0; a < d; ++a) {
      r.push_back(e.support.empty ? nan : e.support.lo[a]);
      r.push_back(e.support.empty ? nan : e.support.hi[a]);
    }
    r.push_back(e.boundary_margin);
    r.push_back(e.max_abs);
    w.row(r);
  }
}

void write_snapshot_csv(const std::filesystem::path& path, const WaveState& s) {
  const int d = s.grid.dim();
  CsvWriter w(path);
  auto h = coord_names(d);
  for (std::size_t c = 0; c < s.k; ++c) {
    h.push_back("re_" + std::to_string(c + 1));
    h.push_back("im_" + std::to_string(c + 1));
  }
  w.header(h);
  for (std::size_t n = 0; n < s.grid.size(); ++n) {
    const Point p = s.grid.point(n);
    std::vector<double> r(p.begin(), p.begin() + d);
    for (std::size_t c = 0; c < s.k; ++c) {
      r.push_back(s.psi[n * s.k + c].real());
      r.push_back(s.psi[n * s.k + c].imag());
    }
    w.row(r);
  }
}

}  // namespace velmat
