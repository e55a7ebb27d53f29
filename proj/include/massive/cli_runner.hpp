#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "massive/system_builder.hpp"

namespace massive {

inline constexpr const char* kVersion = "1.0.0";

struct RunConfig {
  Preset preset = Preset::fast;
  int m = 3;
  std::optional<int> d;
  double lambda = 0.9;
  double epsilon = 0.25;
  std::optional<int> k;
  std::optional<double> tau;
  std::optional<double> r_hat;
  std::optional<double> r_check;
  std::optional<double> shrink;
  double cover_margin = 1e-3;
  double tls_margin = 0.05;
  double root_tol = 1e-9;
  double box_margin = 1e-3;
  std::uint64_t seed = 1;
  int threads = 0;
  long starts = 100;
  long steps = 100000;
  long burn_in = 1000;
  int grid_phi = 256;
  int grid_x = 128;
  int depth = 16;
  int graph_length = 50;
  int graph_trials = 1000;
  int srb_starts = 10;
  long srb_steps = 1000000;
  long lyapunov_steps = 100000;
  double eps1 = 0.01;
  double eps2 = 0.01;
  double perturb_factor = 0.95;
  int mdsc_phi = 256;
  int mdsc_x = 0;  // 0: 10^4 points in d = 1, 100 per axis in d = 2
  int fiber_grid = 50;
  double disk_radius = 2.0;
  double alpha = 0.25;
  std::string out = "out";

  int fiber_d() const;
};

/// "key = value" lines, '#' comments. Throws std::invalid_argument naming the
/// line for malformed lines, unknown keys and out-of-range values.
RunConfig parse_config(const std::string& text);

FiberParams fiber_params(const RunConfig& cfg);

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"construct", "certify", "simulate", "density",
                                          "lyapunov",  "srb",     "perturb",  "all"};
  return c;
}

/// Runs one command, writes report.json (and occupancy.ogrid, density.csv,
/// lyapunov.csv where applicable) into cfg.out. Returns 0 iff every
/// non-waived check passed. `timestamp` overrides the wall-clock stamp.
int run(const std::string& command, const RunConfig& cfg, std::ostream& log,
        std::optional<std::string> timestamp = std::nullopt);

}  // namespace massive
