#include "ppd/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ppd {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::span<const std::string> header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& h : header) cell(std::string_view(h));
  end_row();
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (auto h : header) cell(h);
  end_row();
}

void CsvWriter::separator() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::cell(double v) {
  separator();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(std::size_t v) {
  separator();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw std::runtime_error("failed writing " + path_.string());
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    cells.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

namespace {
std::string quantile_column(double level) {
  const double pct = level * 100.0;
  const double rounded = std::round(pct);
  if (std::abs(pct - rounded) < 1e-9) {
    const int p = static_cast<int>(rounded);
    return (p < 10 ? "q0" : "q") + std::to_string(p);
  }
  return "q" + format_double(level);
}
}  // namespace

void write_ppd_csv(const std::filesystem::path& path, const PPDResult& result) {
  std::vector<std::string> header{"x", "mean", "variance"};
  for (double q : result.quantile_levels) header.push_back(quantile_column(q));
  CsvWriter w(path, header);
  const std::size_t nl = result.quantile_levels.size();
  for (std::size_t i = 0; i < result.size(); ++i) {
    w.cell(result.query_xs[i]).cell(result.mean[i]).cell(result.variance[i]);
    for (std::size_t l = 0; l < nl; ++l) w.cell(result.quantile_at(i, l));
    w.end_row();
  }
  w.close();
}

void write_density_csv(const std::filesystem::path& path, const PPDResult& result) {
  if (result.density.empty()) throw std::invalid_argument("PPD result carries no densities");
  std::vector<std::string> header{"x"};
  for (double y : result.y_grid) header.push_back(format_double(y));
  CsvWriter w(path, header);
  for (std::size_t i = 0; i < result.size(); ++i) {
    w.cell(result.query_xs[i]);
    for (std::size_t j = 0; j < result.y_grid.size(); ++j) w.cell(result.density_at(i, j));
    w.end_row();
  }
  w.close();
}

void write_posterior_csv(const std::filesystem::path& path, const FinitePrior& prior,
                         const PosteriorWeights& weights, std::size_t top_k) {
  if (weights.size() != prior.size()) throw std::invalid_argument("posterior/prior size mismatch");
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t k = std::min(top_k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double wa = weights.log_weights[a];
                      const double wb = weights.log_weights[b];
                      return wa > wb || (wa == wb && a < b);
                    });

  CsvWriter w(path, {"latent_index", "family", "param1", "param2", "param3", "weight"});
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r];
    const FunctionLatent& l = prior.latent(i);
    const double p = std::exp(weights.log_weights[i]);
    w.cell(i).cell(family_name(l.family));
    for (std::size_t c = 0; c < 3; ++c) {
      if (c < l.param_count()) {
        w.cell(l.params[c]);
      } else {
        w.cell(std::string_view());
      }
    }
    w.cell(p).end_row();
  }
  double rest = 0.0;
  for (std::size_t r = k; r < order.size(); ++r) rest += std::exp(weights.log_weights[order[r]]);
  w.cell(std::string_view("remaining")).cell(std::string_view()).cell(std::string_view())
      .cell(std::string_view()).cell(std::string_view()).cell(rest).end_row();
  w.close();
}

}  // namespace ppd
