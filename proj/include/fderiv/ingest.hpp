#pragma once

// CSV input, growth-rate preprocessing and report output.
//
// Curves file:   header "t,<id1>,<id2>,...", one row per grid point.
// Responses:     header "id,y" (or a single "y" column), one row per curve,
//                in the same order as the curve columns.
// Heights:       header "id,<label1>,...,<labelJ>", one row per subject.
// Ages:          header "age", one row per measurement age (J rows).
// Floats are written with 17 significant digits.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <span>
#include <system_error>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fderiv/derivative.hpp"
#include "fderiv/error.hpp"
#include "fderiv/fpca.hpp"
#include "fderiv/function_space.hpp"

namespace fderiv {

using Json = nlohmann::json;

namespace csv {

using Row = std::vector<std::string>;

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline Row split(std::string_view line) {
  Row out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// All non-blank lines, split on commas. First row is the header.
inline std::vector<Row> read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split(line));
  }
  return rows;
}

inline double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    fail(ErrorKind::FormatError, "bad number '" + s + "' in " + context);
  return v;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  }

  Writer& row(const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out_ << ',';
      out_ << cells[c];
    }
    out_ << '\n';
    if (!out_) fail(ErrorKind::IoError, "write failed on '" + path_.string() + "'");
    return *this;
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace csv

/// Maps strictly increasing times onto [0,1]. Returns (points, origin, scale).
inline std::tuple<std::vector<double>, double, double> rescale_to_unit(const std::vector<double>& t) {
  require(t.size() >= 2, ErrorKind::FormatError, "need at least 2 time points");
  for (std::size_t k = 1; k < t.size(); ++k)
    require(t[k] > t[k - 1], ErrorKind::FormatError, "time points must be strictly increasing");
  const double origin = t.front();
  const double scale = t.back() - t.front();
  std::vector<double> out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = (t[k] - origin) / scale;
  out.front() = 0.0;
  out.back() = 1.0;
  return {std::move(out), origin, scale};
}

inline Sample load_curves_csv(const std::filesystem::path& path) {
  const auto rows = csv::read(path);
  require(!rows.empty(), ErrorKind::FormatError, "'" + path.string() + "' is empty");
  const csv::Row& header = rows.front();
  require(header.size() >= 2, ErrorKind::FormatError, "curves file needs a grid column and at least one curve");
  const std::size_t m = rows.size() - 1;
  require(m >= 2, ErrorKind::FormatError, "curves file needs at least 2 grid points");
  const std::size_t n = header.size() - 1;

  std::vector<double> t(m);
  std::vector<std::vector<double>> values(n, std::vector<double>(m));
  for (std::size_t r = 0; r < m; ++r) {
    const csv::Row& row = rows[r + 1];
    require(row.size() == header.size(), ErrorKind::FormatError,
            "row " + std::to_string(r + 2) + " has " + std::to_string(row.size()) + " fields, expected " +
                std::to_string(header.size()));
    const std::string ctx = path.filename().string() + " row " + std::to_string(r + 2);
    t[r] = csv::parse_double(row[0], ctx);
    for (std::size_t i = 0; i < n; ++i) values[i][r] = csv::parse_double(row[i + 1], ctx);
  }
  auto [points, origin, scale] = rescale_to_unit(t);
  GridPtr grid = Grid::make(std::move(points));
  std::vector<Curve> curves;
  curves.reserve(n);
  for (auto& v : values) curves.emplace_back(grid, std::move(v));
  Sample s = make_sample(std::move(curves), std::vector<std::string>(header.begin() + 1, header.end()));
  s.time_origin = origin;
  s.time_scale = scale;
  return s;
}

/// Writes curves in the loader's layout, grid column first (on [0,1]).
inline void write_curves_csv(const std::filesystem::path& path, const GridPtr& grid,
                             const std::vector<std::pair<std::string, const Curve*>>& columns,
                             const std::string& grid_label = "t") {
  csv::Writer w(path);
  std::vector<std::string> header{grid_label};
  for (const auto& [name, curve] : columns) header.push_back(name);
  w.row(header);
  if (!grid) return;
  for (std::size_t k = 0; k < grid->size(); ++k) {
    std::vector<std::string> row{csv::format_double(grid->point(k))};
    for (const auto& [name, curve] : columns) row.push_back(csv::format_double((*curve)[k]));
    w.row(row);
  }
}

inline void write_sample_csv(const std::filesystem::path& path, const Sample& sample) {
  std::vector<std::pair<std::string, const Curve*>> cols;
  for (std::size_t i = 0; i < sample.size(); ++i) cols.emplace_back(sample.ids[i], &sample.curves[i]);
  write_curves_csv(path, sample.grid, cols);
}

inline std::vector<double> load_responses_csv(const std::filesystem::path& path, std::size_t expected) {
  const auto rows = csv::read(path);
  require(rows.size() >= 2, ErrorKind::FormatError, "responses file has no data rows");
  const std::size_t width = rows.front().size();
  require(width == 1 || width == 2, ErrorKind::FormatError, "responses file must have columns 'y' or 'id,y'");
  std::vector<double> y;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    require(rows[r].size() == width, ErrorKind::FormatError, "ragged row in responses file");
    y.push_back(csv::parse_double(rows[r].back(), path.filename().string() + " row " + std::to_string(r + 1)));
  }
  require(y.size() == expected, ErrorKind::FormatError,
          "expected " + std::to_string(expected) + " responses, found " + std::to_string(y.size()));
  return y;
}

inline void write_responses_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                                const std::vector<double>& y) {
  csv::Writer w(path);
  w.row({"id", "y"});
  for (std::size_t i = 0; i < y.size(); ++i) w.row({ids[i], csv::format_double(y[i])});
}

/// Heights (rows = subjects) at common measurement ages.
struct LongitudinalTable {
  std::vector<double> ages;
  std::vector<std::vector<double>> heights;
  std::vector<std::string> ids;

  /// Columns with age <= max_age.
  LongitudinalTable up_to(double max_age) const {
    LongitudinalTable out;
    out.ids = ids;
    std::size_t keep = 0;
    while (keep < ages.size() && ages[keep] <= max_age) ++keep;
    out.ages.assign(ages.begin(), ages.begin() + static_cast<std::ptrdiff_t>(keep));
    for (const auto& row : heights) out.heights.emplace_back(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep));
    return out;
  }

  /// Column index of an exact age.
  std::optional<std::size_t> column_of(double age) const {
    for (std::size_t j = 0; j < ages.size(); ++j)
      if (std::abs(ages[j] - age) <= 1e-9) return j;
    return std::nullopt;
  }
};

inline void validate(const LongitudinalTable& table) {
  for (std::size_t j = 1; j < table.ages.size(); ++j)
    require(table.ages[j] > table.ages[j - 1], ErrorKind::FormatError, "ages must be strictly increasing");
  require(table.ids.size() == table.heights.size(), ErrorKind::FormatError, "ids and height rows differ in count");
  for (const auto& row : table.heights) {
    require(row.size() == table.ages.size(), ErrorKind::FormatError, "height row length differs from ages");
    for (double h : row) require(std::isfinite(h), ErrorKind::FormatError, "height is not finite");
  }
}

inline LongitudinalTable load_longitudinal_csv(const std::filesystem::path& heights_path,
                                               const std::filesystem::path& ages_path) {
  LongitudinalTable table;
  const auto age_rows = csv::read(ages_path);
  require(age_rows.size() >= 2, ErrorKind::FormatError, "ages file has no data rows");
  for (std::size_t r = 1; r < age_rows.size(); ++r) {
    require(age_rows[r].size() == 1, ErrorKind::FormatError, "ages file must have a single column");
    table.ages.push_back(csv::parse_double(age_rows[r][0], "ages row " + std::to_string(r + 1)));
  }
  const auto rows = csv::read(heights_path);
  require(rows.size() >= 2, ErrorKind::FormatError, "heights file has no data rows");
  require(rows.front().size() == table.ages.size() + 1, ErrorKind::FormatError,
          "heights header must have an id column plus one column per age");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    require(rows[r].size() == rows.front().size(), ErrorKind::FormatError,
            "ragged row " + std::to_string(r + 1) + " in heights file");
    table.ids.push_back(rows[r][0]);
    std::vector<double> h;
    for (std::size_t c = 1; c < rows[r].size(); ++c)
      h.push_back(csv::parse_double(rows[r][c], "heights row " + std::to_string(r + 1)));
    table.heights.push_back(std::move(h));
  }
  validate(table);
  return table;
}

struct DifferenceQuotients {
  std::vector<double> midpoints;
  std::vector<double> rates;
};

/// (h_{j+1} - h_j) / (s_{j+1} - s_j) at the midpoints (s_j + s_{j+1}) / 2.
inline DifferenceQuotients difference_quotients(std::span<const double> ages, std::span<const double> heights) {
  require(ages.size() == heights.size() && ages.size() >= 2, ErrorKind::InvalidArgument,
          "need matching ages and heights, at least 2 of each");
  DifferenceQuotients out;
  for (std::size_t j = 0; j + 1 < ages.size(); ++j) {
    out.midpoints.push_back(0.5 * (ages[j] + ages[j + 1]));
    out.rates.push_back((heights[j + 1] - heights[j]) / (ages[j + 1] - ages[j]));
  }
  return out;
}

/// Growth-rate curves on the rescaled midpoint grid.
inline Sample growth_rates(const LongitudinalTable& table) {
  validate(table);
  if (table.ages.size() < 3)
    fail(ErrorKind::InsufficientTimepoints, "growth rates need at least 3 measurement ages");
  require(!table.heights.empty(), ErrorKind::EmptySample, "table has no subjects");
  std::vector<double> mid;
  std::vector<std::vector<double>> rates;
  for (const auto& row : table.heights) {
    auto dq = difference_quotients(table.ages, row);
    mid = std::move(dq.midpoints);
    rates.push_back(std::move(dq.rates));
  }
  auto [points, origin, scale] = rescale_to_unit(mid);
  GridPtr grid = Grid::make(std::move(points));
  std::vector<Curve> curves;
  for (auto& r : rates) curves.emplace_back(grid, std::move(r));
  Sample s = make_sample(std::move(curves), table.ids);
  s.time_origin = origin;
  s.time_scale = scale;
  return s;
}

/// One evaluation point of the derivative estimator.
struct GammaRow {
  std::string label;
  DerivativeEstimate estimate;
};

/// Everything a run may export. Absent parts produce header-only files.
struct Report {
  std::optional<EigenSystem> eig;
  std::vector<std::string> score_ids;
  std::size_t gamma_components = 0;
  std::vector<GammaRow> gammas;
  std::vector<std::pair<std::string, Curve>> dgfs;
  Json summary = Json::object();
};

namespace detail {

inline std::string numbered(const std::string& prefix, std::size_t j) { return prefix + std::to_string(j + 1); }

}  // namespace detail

/// Writes eigen.csv, scores.csv, gamma.csv, dgf.csv and summary.json into dir.
inline void export_report(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorKind::IoError, "cannot create '" + dir.string() + "'");

  {
    std::vector<std::pair<std::string, const Curve*>> cols;
    GridPtr grid;
    if (report.eig) {
      grid = report.eig->mean.grid();
      cols.emplace_back("mean", &report.eig->mean);
      for (std::size_t j = 0; j < report.eig->components(); ++j)
        cols.emplace_back(detail::numbered("psi", j), &report.eig->eigenfunctions[j]);
      write_curves_csv(dir / "eigen.csv", grid, cols);
    } else {
      csv::Writer(dir / "eigen.csv").row({"t", "mean"});
    }
  }

  {
    csv::Writer w(dir / "scores.csv");
    const std::size_t k = report.eig ? report.eig->components() : 0;
    std::vector<std::string> header{"id"};
    for (std::size_t j = 0; j < k; ++j) header.push_back(detail::numbered("xi", j));
    w.row(header);
    if (report.eig) {
      const auto& sc = report.eig->scores;
      for (Eigen::Index i = 0; i < sc.rows(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        std::vector<std::string> row{idx < report.score_ids.size() ? report.score_ids[idx] : std::to_string(idx + 1)};
        for (std::size_t j = 0; j < k; ++j) row.push_back(csv::format_double(sc(i, static_cast<Eigen::Index>(j))));
        w.row(row);
      }
    }
  }

  {
    csv::Writer w(dir / "gamma.csv");
    const std::size_t k = report.gamma_components;
    std::vector<std::string> header{"point"};
    for (std::size_t j = 0; j < k; ++j) header.push_back(detail::numbered("gamma", j));
    for (std::size_t j = 0; j < k; ++j) header.push_back(detail::numbered("pairs", j));
    for (std::size_t j = 0; j < k; ++j) header.push_back(detail::numbered("absent", j));
    w.row(header);
    for (const auto& [label, est] : report.gammas) {
      std::vector<std::string> row{label};
      for (std::size_t j = 0; j < k; ++j)
        row.push_back(j < est.components() && est.gammas[j] ? csv::format_double(*est.gammas[j]) : "");
      for (std::size_t j = 0; j < k; ++j)
        row.push_back(std::to_string(j < est.components() ? est.pair_counts[j] : 0));
      for (std::size_t j = 0; j < k; ++j)
        row.push_back(j < est.components() && est.gammas[j] ? "0" : "1");
      w.row(row);
    }
  }

  {
    std::vector<std::pair<std::string, const Curve*>> cols;
    for (const auto& [label, curve] : report.dgfs) cols.emplace_back(label, &curve);
    GridPtr grid = report.dgfs.empty() ? nullptr : report.dgfs.front().second.grid();
    write_curves_csv(dir / "dgf.csv", grid, cols);
  }

  {
    Json summary = report.summary;
    if (report.eig) {
      summary["eigenvalues"] = report.eig->eigenvalues;
      summary["fve"] = report.eig->fve;
      summary["total_variance"] = report.eig->total_variance;
    }
    std::ofstream out(dir / "summary.json");
    if (!out) fail(ErrorKind::IoError, "cannot write summary.json in '" + dir.string() + "'");
    out << std::setprecision(17) << summary.dump(2) << '\n';
    if (!out) fail(ErrorKind::IoError, "write failed on summary.json");
  }
}

}  // namespace fderiv
