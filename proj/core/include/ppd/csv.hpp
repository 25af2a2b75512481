#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ppd/posterior.hpp"

namespace ppd {

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);

/// Comma-separated writer. Numbers are written with format_double, so files
/// written from identical values are byte-identical.
class CsvWriter {
 public:
  /// Throws std::runtime_error if the file cannot be opened.
  CsvWriter(const std::filesystem::path& path, std::span<const std::string> header);
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::string_view v);
  CsvWriter& cell(std::size_t v);
  void end_row();
  void close();

  const std::filesystem::path& path() const { return path_; }

 private:
  void separator();

  std::filesystem::path path_;
  std::ofstream out_;
  bool row_started_ = false;
};

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(std::string_view line);

// Schemas shared by the experiments and the CLI.

/// x,mean,variance,q05,q95 (quantile columns follow the result's levels).
void write_ppd_csv(const std::filesystem::path& path, const PPDResult& result);
/// Header `x,<y-grid values>`, then one row of densities per query x.
void write_density_csv(const std::filesystem::path& path, const PPDResult& result);
/// latent_index,family,param1,param2,param3,weight for the top-k latents by
/// weight (descending, ties by index), then a final row
/// `remaining,,,,,<mass of the others>`.
void write_posterior_csv(const std::filesystem::path& path, const FinitePrior& prior,
                         const PosteriorWeights& weights, std::size_t top_k = 10000);

}  // namespace ppd
