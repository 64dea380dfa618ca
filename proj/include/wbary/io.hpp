#pragma once

// File formats: measure CSV (`x1,...,xD,w`), experiment CSVs, PGM rasters
// and SVG scatter plots. Numbers are written in shortest round-trip form.

#include "common.hpp"
#include "measures.hpp"
#include "pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wbary {

inline std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline double parse_number(std::string_view s, std::string_view what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw InvalidInput("cannot parse " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

// ---------------------------------------------------------------------------
// Measure CSV

inline void write_measure_csv(std::ostream& os, const DiscreteMeasure& mu) {
  for (Index d = 0; d < mu.dim(); ++d) os << 'x' << (d + 1) << ',';
  os << "w\n";
  for (Index k = 0; k < mu.size(); ++k) {
    for (Index d = 0; d < mu.dim(); ++d) os << format_number(mu.points(k, d)) << ',';
    os << format_number(mu.weights[k]) << '\n';
  }
}

inline DiscreteMeasure read_measure_csv(std::istream& is, const std::string& source = "input") {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput(source + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  const auto D = static_cast<Index>(header.size()) - 1;
  if (D < 1 || header.back() != "w") throw InvalidInput(source + ": header must be x1,...,xD,w");
  for (Index d = 0; d < D; ++d)
    if (header[static_cast<std::size_t>(d)] != "x" + std::to_string(d + 1))
      throw InvalidInput(source + ": header must be x1,...,xD,w");
  std::vector<double> coords, weights;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (static_cast<Index>(fields.size()) != D + 1)
      throw InvalidInput(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(D + 1) + " fields");
    for (Index d = 0; d < D; ++d) coords.push_back(parse_number(fields[static_cast<std::size_t>(d)], "coordinate"));
    weights.push_back(parse_number(fields.back(), "weight"));
  }
  const auto n = static_cast<Index>(weights.size());
  Matrix pts(n, D);
  for (Index k = 0; k < n; ++k)
    for (Index d = 0; d < D; ++d) pts(k, d) = coords[static_cast<std::size_t>(k * D + d)];
  return make_measure(std::move(pts), Eigen::Map<const Vector>(weights.data(), n));
}

inline void save_measure(const std::string& path, const DiscreteMeasure& mu) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write " + path);
  write_measure_csv(os, mu);
}

inline DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot read " + path);
  return read_measure_csv(is, path);
}

// ---------------------------------------------------------------------------
// Experiment CSVs

inline void write_records_csv(std::ostream& os, std::span<const ExperimentRecord> records) {
  os << "S,R,rep,seed,frechet,rel_err,runtime_ms\n";
  for (const auto& r : records) {
    os << r.S << ',' << r.R << ',' << r.rep << ',' << r.seed << ',' << format_number(r.frechet) << ',';
    if (r.rel_err) os << format_number(*r.rel_err);
    os << ',' << format_number(r.runtime_ms) << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, std::span<const SummaryRow> rows) {
  os << "S,R,mean_err,sd_err\n";
  for (const auto& r : rows)
    os << r.S << ',' << r.R << ',' << format_number(r.mean_err) << ',' << format_number(r.sd_err) << '\n';
}

// ---------------------------------------------------------------------------
// Grayscale rasters

/// Row-major intensities in [0, 1], row 0 at the top.
struct Image {
  Index width = 0;
  Index height = 0;
  std::vector<double> pixels;

  double& at(Index r, Index c) { return pixels[static_cast<std::size_t>(r * width + c)]; }
  double at(Index r, Index c) const { return pixels[static_cast<std::size_t>(r * width + c)]; }
};

namespace detail {

inline std::string pgm_token(std::istream& is) {
  std::string tok;
  char ch;
  while (is.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(is, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace detail

/// Reads P2 (ASCII) or P5 (binary, 8 or 16 bit) PGM.
inline Image read_pgm(std::istream& is) {
  const std::string magic = detail::pgm_token(is);
  if (magic != "P2" && magic != "P5") throw InvalidInput("not a PGM file (magic '" + magic + "')");
  Image img;
  long maxval = 0;
  try {
    img.width = std::stol(detail::pgm_token(is));
    img.height = std::stol(detail::pgm_token(is));
    maxval = std::stol(detail::pgm_token(is));
  } catch (const std::exception&) {
    throw InvalidInput("PGM header is malformed");
  }
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535) throw InvalidInput("PGM header out of range");
  const auto count = static_cast<std::size_t>(img.width * img.height);
  img.pixels.resize(count);
  if (magic == "P2") {
    for (auto& px : img.pixels) {
      const std::string tok = detail::pgm_token(is);
      if (tok.empty()) throw InvalidInput("PGM data truncated");
      const auto v = parse_number(tok, "PGM pixel");
      if (v < 0 || v > static_cast<double>(maxval)) throw InvalidInput("PGM pixel out of range");
      px = v / static_cast<double>(maxval);
    }
  } else {
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(count * static_cast<std::size_t>(bytes));
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
      throw InvalidInput("PGM data truncated");
    for (std::size_t k = 0; k < count; ++k) {
      const unsigned v = bytes == 2 ? (unsigned{raw[2 * k]} << 8) | raw[2 * k + 1] : raw[k];
      img.pixels[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return img;
}

/// Writes 8-bit binary PGM (P5), or ASCII (P2) when `ascii`.
inline void write_pgm(std::ostream& os, const Image& img, bool ascii = false) {
  os << (ascii ? "P2" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  for (Index r = 0; r < img.height; ++r) {
    for (Index c = 0; c < img.width; ++c) {
      const double v = std::clamp(img.at(r, c), 0.0, 1.0);
      const auto byte = static_cast<unsigned>(std::lround(v * 255.0));
      if (ascii)
        os << byte << (c + 1 == img.width ? '\n' : ' ');
      else
        os.put(static_cast<char>(byte));
    }
  }
}

inline Image load_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("cannot read " + path);
  return read_pgm(is);
}

inline void save_pgm(const std::string& path, const Image& img, bool ascii = false) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("cannot write " + path);
  write_pgm(os, img, ascii);
}

// ---------------------------------------------------------------------------
// SVG scatter

/// Atoms of 2D measures as discs with area proportional to weight, one color
/// per measure, in a square canvas fitted to the joint bounding box.
inline void write_svg_scatter(std::ostream& os, std::span<const DiscreteMeasure> measures, int size = 600) {
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  if (measures.empty()) throw InvalidInput("nothing to plot");
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x, hi_x = -lo_x, hi_y = -lo_x;
  double max_w = 0.0;
  for (const auto& m : measures) {
    if (m.dim() != 2) throw InvalidInput("SVG scatter needs 2D measures");
    lo_x = std::min(lo_x, m.points.col(0).minCoeff());
    hi_x = std::max(hi_x, m.points.col(0).maxCoeff());
    lo_y = std::min(lo_y, m.points.col(1).minCoeff());
    hi_y = std::max(hi_y, m.points.col(1).maxCoeff());
    max_w = std::max(max_w, m.weights.maxCoeff());
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double margin = 20.0, inner = size - 2 * margin;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << std::fixed << std::setprecision(2);
  for (std::size_t i = 0; i < measures.size(); ++i) {
    const auto& m = measures[i];
    os << "<g fill=\"" << palette[i % std::size(palette)] << "\" fill-opacity=\"0.7\">\n";
    for (Index k = 0; k < m.size(); ++k) {
      const double x = margin + inner * (m.points(k, 0) - lo_x) / span;
      const double y = size - margin - inner * (m.points(k, 1) - lo_y) / span;
      const double r = 1.0 + 5.0 * std::sqrt(m.weights[k] / max_w);
      os << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << r << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
}

}  // namespace wbary
