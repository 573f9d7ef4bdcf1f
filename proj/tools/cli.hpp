#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nvphonon/config.hpp"
#include "nvphonon/hamiltonian.hpp"
#include "nvphonon/material.hpp"

namespace nvp::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs the command line; returns the process exit code (0 ok, 2 config
/// error, 3 numerical failure). Artifacts go to --out paths or `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Directory searched for `--preset NAME` (NAME.conf): $NVPHONON_PRESET_DIR,
/// else the in-tree presets directory.
std::string preset_dir();

/// Worker count from $NVPHONON_WORKERS, else the hardware concurrency.
int worker_count();

struct DriveSetup {
  DriveConfig drive;
  double diameter = 0;
  double diameter_nm = 0;
  double eta = 0;
  double nu = 0;
};

/// Resolves the drive.* keys to SI units (see docs/formats.md).
DriveSetup resolve_drive(const Config& config, const MaterialModel& material);

MaterialModel resolve_material(const Config& config);

}  // namespace nvp::cli
