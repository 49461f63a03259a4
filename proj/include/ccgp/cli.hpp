#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ccgp {

/// Flag overrides shared by the subcommands. Exit-code contract:
/// 0 success, 1 runtime failure, 2 config/schema/hash violation.
struct CliOptions {
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> tau;
  std::optional<int> bins;
  std::optional<std::string> out;
  double shift = 0.0;   // surface: constant added to every logit
  int grid = 61;        // surface: points per axis
  double fmin = -6.0;
  double fmax = 6.0;
  std::optional<double> tolerance;  // gibbs-vs-mf
};

int cmd_train(const std::string& config_path, const CliOptions& opts = {});
int cmd_eval(const std::string& config_path, const std::string& checkpoint_path,
             const CliOptions& opts = {});
int cmd_calibrate(const std::string& config_path, const std::string& checkpoint_path,
                  const CliOptions& opts = {});
int cmd_surface(double tau, const CliOptions& opts = {});
int cmd_selftest();
int cmd_gibbs_vs_mf(const std::string& config_path, const CliOptions& opts = {});

}  // namespace ccgp
