#pragma once

// CSV ingestion and writers for summaries, draws, simulation tables, prior
// curves and modal partitions. Numbers are written with 17 significant digits
// and parsed without locale dependence.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tfuse/error.hpp"
#include "tfuse/metrics.hpp"
#include "tfuse/model.hpp"
#include "tfuse/sim.hpp"

namespace tfuse {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Shortest round-trip form, used for labels such as quantile column names.
inline std::string format_short(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace detail

/// Parses a whole cell as a double; a leading '+' is accepted.
inline std::optional<double> parse_double(std::string_view cell) {
  cell = detail::trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

/// One numeric column y, optionally followed by a truth column. A first row
/// whose first cell is not numeric is treated as a header.
inline Dataset read_dataset(std::istream& in, const std::string& source = "input") {
  std::vector<double> y;
  std::vector<double> truth;
  std::optional<std::size_t> columns;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto cells = detail::split_csv(view);
    if (first) {
      first = false;
      if (!parse_double(cells[0])) {
        if (cells.size() > 2) throw InputError(source + ": header has more than two columns");
        if (cells.size() == 2 && cells[1] != "truth")
          throw InputError(source + ": second column must be named 'truth'");
        columns = cells.size();
        continue;
      }
    }
    if (!columns) {
      if (cells.size() > 2) throw InputError(source + ": row " + std::to_string(row) + " has more than two columns");
      columns = cells.size();
    }
    if (cells.size() != *columns)
      throw InputError(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                       " columns, expected " + std::to_string(*columns));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v || !std::isfinite(*v))
        throw InputError(source + ": row " + std::to_string(row) + ": non-numeric value '" +
                         std::string(cells[c]) + "'");
      (c == 0 ? y : truth).push_back(*v);
    }
  }
  if (y.size() < 2)
    throw InputError(source + ": need at least 2 observations, found " + std::to_string(y.size()));
  if (columns == 2u) return Dataset(std::move(y), std::move(truth));
  return Dataset(std::move(y));
}

inline Dataset ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  return read_dataset(in, path);
}

inline std::vector<std::string> summary_header(std::span<const double> probs) {
  std::vector<std::string> cols{"index", "mean"};
  for (double p : probs) cols.push_back("q" + format_short(100.0 * p));
  return cols;
}

/// One row per coordinate (1-based index) and, when given, a final row
/// labelled "sigma2".
inline void write_summary_csv(std::ostream& out, const PosteriorSummary& summary,
                              const std::optional<SummaryRow>& sigma2 = std::nullopt) {
  const auto header = summary_header(summary.probs);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  auto emit = [&](const std::string& label, const SummaryRow& row) {
    out << label << ',' << format_double(row.mean);
    for (double q : row.quantiles) out << ',' << format_double(q);
    out << '\n';
  };
  for (std::size_t i = 0; i < summary.rows.size(); ++i) emit(std::to_string(i + 1), summary.rows[i]);
  if (sigma2) emit("sigma2", *sigma2);
}

struct SummaryFile {
  PosteriorSummary theta;
  std::optional<SummaryRow> sigma2;
};

inline SummaryFile read_summary_csv(std::istream& in) {
  SummaryFile file;
  std::string line;
  if (!std::getline(in, line)) throw InputError("summary: empty file");
  const auto header = detail::split_csv(detail::trim(line));
  if (header.size() < 2 || header[0] != "index" || header[1] != "mean")
    throw InputError("summary: unexpected header");
  for (std::size_t c = 2; c < header.size(); ++c) {
    const auto p = header[c].size() > 1 && header[c][0] == 'q' ? parse_double(header[c].substr(1)) : std::nullopt;
    if (!p) throw InputError("summary: bad quantile column '" + std::string(header[c]) + "'");
    file.theta.probs.push_back(*p / 100.0);
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(detail::trim(line));
    if (cells.size() != header.size()) throw InputError("summary: row " + std::to_string(row) + " has wrong width");
    SummaryRow r;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v) throw InputError("summary: row " + std::to_string(row) + ": non-numeric value");
      if (c == 1)
        r.mean = *v;
      else
        r.quantiles.push_back(*v);
    }
    if (cells[0] == "sigma2")
      file.sigma2 = std::move(r);
    else
      file.theta.rows.push_back(std::move(r));
  }
  return file;
}

/// One row per retained draw: theta_1..theta_n, then sigma2.
inline void write_draws_csv(std::ostream& out, const DrawMatrix<double>& theta, std::span<const double> sigma2) {
  if (sigma2.size() != theta.rows()) throw DimensionError("write_draws_csv: sigma2 length differs from draws");
  for (std::size_t c = 0; c < theta.cols(); ++c) out << "theta" << c + 1 << ',';
  out << "sigma2\n";
  for (std::size_t r = 0; r < theta.rows(); ++r) {
    for (double v : theta.row(r)) out << format_double(v) << ',';
    out << format_double(sigma2[r]) << '\n';
  }
}

inline const std::vector<std::string>& simulate_columns(bool b_tilde) {
  static const std::vector<std::string> plain{"method", "l2", "l2_se", "l1", "l1_se", "pmsl2", "pmsl2_se",
                                              "W", "W_se", "B", "B_se", "R", "R_se"};
  static const std::vector<std::string> tilde{"method", "l2", "l2_se", "l1", "l1_se", "pmsl2", "pmsl2_se",
                                              "W", "W_se", "B_tilde", "B_se", "R", "R_se"};
  return b_tilde ? tilde : plain;
}

inline void write_simulate_csv(std::ostream& out, const AggregateTable& table) {
  const auto& cols = simulate_columns(table.b_tilde);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  for (const auto& row : table.rows) {
    out << row.method;
    for (const Stat* s : {&row.l2, &row.l1, &row.pmsl2, &row.w, &row.b, &row.r})
      out << ',' << cell(s->mean) << ',' << cell(s->se);
    out << '\n';
  }
}

inline void write_curve_csv(std::ostream& out, std::span<const double> grid, std::span<const double> values) {
  if (grid.size() != values.size()) throw DimensionError("write_curve_csv: length mismatch");
  out << "theta_i,neg_log_density\n";
  for (std::size_t g = 0; g < grid.size(); ++g) out << format_double(grid[g]) << ',' << format_double(values[g]) << '\n';
}

/// Relabels so that labels appear as 1, 2, ... in index order.
inline std::vector<int> condense_labels(std::span<const int> labels) {
  std::map<int, int> remap;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()) + 1);
    out[i] = it->second;
  }
  return out;
}

struct ModalPartition {
  std::vector<int> labels;            // 1-based, condensed
  std::size_t draw = 0;               // retained draw the partition was taken from
  std::vector<double> co_cluster;     // n x n posterior co-clustering frequencies, row-major
};

/// The sampled partition closest in squared distance to the posterior
/// co-clustering matrix (least-squares clustering).
inline ModalPartition modal_partition(const DrawMatrix<int>& assignments) {
  const std::size_t s = assignments.rows();
  const std::size_t n = assignments.cols();
  if (s == 0) throw UndefinedStatistic("modal_partition: no draws");
  ModalPartition out;
  out.co_cluster.assign(n * n, 0.0);
  for (std::size_t r = 0; r < s; ++r) {
    const auto z = assignments.row(r);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        if (z[i] == z[j]) out.co_cluster[i * n + j] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      out.co_cluster[i * n + j] /= static_cast<double>(s);
      out.co_cluster[j * n + i] = out.co_cluster[i * n + j];
    }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < s; ++r) {
    const auto z = assignments.row(r);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = (z[i] == z[j] ? 1.0 : 0.0) - out.co_cluster[i * n + j];
        loss += d * d;
      }
    if (loss < best) {
      best = loss;
      out.draw = r;
    }
  }
  out.labels = condense_labels(assignments.row(out.draw));
  return out;
}

inline void write_partition_csv(std::ostream& out, const ModalPartition& p) {
  out << "index,label\n";
  for (std::size_t i = 0; i < p.labels.size(); ++i) out << i + 1 << ',' << p.labels[i] << '\n';
}

}  // namespace tfuse
