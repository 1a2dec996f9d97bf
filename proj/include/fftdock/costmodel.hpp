#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace fftdock::cost {

struct InstanceSpec {
  std::string name;
  std::string cpu_model;
  int cores = 0;
  double dp_peak_gflops = 0.0;
  int gpus = 0;
  double ram_gb = 0.0;
  bool rdma = false;
  double price_usd_per_hour = 0.0;

  void validate() const;
};

struct RunRecord {
  std::string instance_name;
  int n_instances = 0;
  double wall_time_s = 0.0;
  int n_pairs = 0;

  void validate() const;
};

struct ScalingReport {
  RunRecord base;
  RunRecord scaled;
  double strong_scaling = 0.0;
  double speedup = 0.0;
  double throughput_pairs_per_min = 0.0;  // of the scaled run
  double total_fee_usd = 0.0;             // of the scaled run
  bool superlinear = false;
};

struct Recommendation {
  std::string a;
  std::string b;
  double speed_ratio = 0.0;  // time_b / time_a
  double price_ratio = 0.0;  // price_a / price_b
  double fee_a_usd = 0.0;
  double fee_b_usd = 0.0;
  bool tie = false;
  std::string recommended;
};

inline constexpr double kRatioTieTolerance = 1e-9;

// (base.time / scaled.time) / (scaled.n / base.n). Both records must describe
// the same instance type and workload, with scaled using more instances.
double strong_scaling(const RunRecord& base, const RunRecord& scaled);
double speedup(const RunRecord& base, const RunRecord& scaled);

// Price x hours x instance count; deployment time is not modeled.
double total_fee(const InstanceSpec& spec, double wall_time_s, int n_instances);
double throughput_pairs_per_min(int n_pairs, double wall_time_s);

ScalingReport scaling_report(const InstanceSpec& spec, const RunRecord& base, const RunRecord& scaled);

// Recommends `a` iff its speed advantage over `b` exceeds its price premium.
// Equal ratios (within kRatioTieTolerance) go to the cheaper instance.
Recommendation compare_instances(const InstanceSpec& spec_a, const RunRecord& run_a, const InstanceSpec& spec_b,
                                 const RunRecord& run_b);

using Catalog = std::map<std::string, InstanceSpec>;

// Tab-separated with a header row; '#' lines are comments.
Catalog read_catalog(const std::filesystem::path& path);
std::vector<RunRecord> read_runs(const std::filesystem::path& path);
std::string runs_tsv_header();
std::string to_tsv_line(const RunRecord& r);

struct FeeLine {
  InstanceSpec spec;
  RunRecord run;
  double fee_usd = 0.0;
};

struct AnalysisReport {
  std::vector<ScalingReport> scaling;
  std::vector<RunRecord> runs;
  std::map<std::string, double> relative_speed;  // keyed by run label, vs the reference instance
  std::vector<Recommendation> comparisons;
  std::vector<FeeLine> fees;  // largest run per instance
  std::optional<std::string> cheapest;
  std::optional<std::string> fastest;
};

struct AnalysisOptions {
  std::optional<std::string> reference_instance;
  // Explicit comparison pairs; when empty, every pair of instances is compared
  // at their largest common (n_instances, n_pairs).
  std::vector<std::pair<std::string, std::string>> compare;
};

AnalysisReport analyze(const Catalog& catalog, const std::vector<RunRecord>& runs, const AnalysisOptions& options = {});

std::string format_report(const AnalysisReport& report);
nlohmann::json report_json(const AnalysisReport& report);

// Display rounding.
double round_to(double value, double quantum);

}  // namespace fftdock::cost
