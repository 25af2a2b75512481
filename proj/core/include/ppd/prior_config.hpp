#pragma once

#include <filesystem>
#include <istream>

#include "json.hpp"
#include "ppd/prior.hpp"

namespace ppd {

/// Reads a prior description:
///
///   {
///     "family": "step-extended",
///     "noise_sigma": 0.1,
///     "grids": {"dx": {"lo": -1, "hi": 1, "count": 101}, ...},
///     "mixture_weights": {"sine": 0.5, "line": 0.5},
///     "dedupe_sine": false,
///     "latents_csv": "custom.csv"
///   }
///
/// Grid keys depend on the family: step uses dx/dy/h, sine uses dx, line
/// uses dy/m; the mixture accepts sine_dx, line_dy and line_m. Relative
/// `latents_csv` paths resolve against `base_dir`.
PriorSpec parse_prior_spec(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json prior_spec_to_json(const PriorSpec& spec);

/// CSV with header `family,param1,param2,param3[,log_prior]`. Unused
/// parameters may be left empty. Rows load in file order.
struct LatentTable {
  std::vector<FunctionLatent> latents;
  std::vector<double> log_prior;  // empty unless the column is present
};
LatentTable read_latents_csv(std::istream& in);
LatentTable read_latents_csv(const std::filesystem::path& path);

}  // namespace ppd
