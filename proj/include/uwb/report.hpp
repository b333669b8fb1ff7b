#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace uwb {

struct RmseRow {
  std::string estimator;
  double p_los = 0.0;
  double rmse_m = 0.0;
  long n_trials = 0;
};

struct CdfRow {
  std::string estimator;
  double p_los = 0.0;
  double error_m = 0.0;
  double cum_prob = 0.0;
};

std::vector<RmseRow> read_rmse_csv(const std::filesystem::path& path);
std::vector<CdfRow> read_cdf_csv(const std::filesystem::path& path);

/// gnuplot-ready matrix: first column p_los, one column per estimator in
/// order of first appearance; absent cells print nan.
void write_rmse_plot(const std::vector<RmseRow>& rows,
                     const std::filesystem::path& path);

/// One file per p_los value (cdf_p<value>.dat), holding per-estimator blocks
/// of (error_m, cum_prob) separated by blank lines. Returns written paths.
std::vector<std::filesystem::path> write_cdf_plots(
    const std::vector<CdfRow>& rows, const std::filesystem::path& out_dir);

}  // namespace uwb
