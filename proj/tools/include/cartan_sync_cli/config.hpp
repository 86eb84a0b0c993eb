#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cartan_sync/group.hpp"

namespace cartan_sync::cli {

struct ExperimentConfig {
  GroupSpec group;
  int n = 10;
  std::vector<std::string> methods;
  std::vector<double> sigma_rot{0.0};
  std::vector<double> sigma_trans{0.0};
  std::vector<double> outlier_rate{0.0};
  std::vector<double> p{1.0};
  // When present, the noise scale of every cell is calibrated to these SNR
  // targets instead of using the sigma lists.
  std::vector<double> snr_db;
  double sigma_ratio = 1.0;
  std::vector<std::optional<double>> lambda{std::nullopt};  // nullopt = auto
  int lambda_budget = 8;
  int align_budget = -1;
  int trials_per_cell = 1;
  std::uint64_t seed = 0;
  std::string output_path = "out";
};

struct Cell {
  int index = 0;
  double sigma_rot = 0.0;
  double sigma_trans = 0.0;
  double outlier_rate = 0.0;
  double p = 1.0;
  std::optional<double> snr_db;
};

/// Parses and validates a JSON config; throws ConfigInvalid.
ExperimentConfig ParseConfig(const std::string& text);

/// Cartesian product of the sweep lists in a fixed order.
std::vector<Cell> ExpandCells(const ExperimentConfig& config);

/// Throws ConfigInvalid when `method` cannot run on `group`.
void CheckMethod(const std::string& method, const GroupSpec& group);

std::uint64_t TruthSeed(std::uint64_t seed, int trial);
std::uint64_t NoiseSeed(std::uint64_t seed, int cell, int trial);

}  // namespace cartan_sync::cli
