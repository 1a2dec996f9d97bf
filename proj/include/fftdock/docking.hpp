#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "fftdock/grid.hpp"
#include "fftdock/pdb_io.hpp"
#include "fftdock/rotations.hpp"
#include "fftdock/topk.hpp"

namespace fftdock {

// Scores are rounded to this quantum before ranking so that equal scores
// computed through floating-point transforms compare exactly equal.
inline constexpr double kScoreQuantum = 1e-6;

struct DockConfig {
  double pitch = 1.2;
  int margin_voxels = 4;
  double angular_step = 15.0;
  int top_k = 2000;
  int poses_per_rotation = 1;
  ScoringParams params;
  int threads = 0;  // 0 = all logical cores

  void validate() const;
  int resolved_threads() const;
  friend bool operator==(const DockConfig&, const DockConfig&) = default;
};

struct DockingResult {
  std::string task_id;
  std::string receptor_id;
  std::string ligand_id;
  GridSpec grid_spec;
  ScoringParams params;
  double angular_step = 0.0;
  int rotation_count = 0;
  std::vector<Pose> top_poses;
  double best_score = 0.0;
  double wall_time = 0.0;  // seconds

  // Equality on everything except wall_time.
  bool same_outcome(const DockingResult& other) const;
};

struct TimeBreakdown {
  double transform = 0.0;
  double voxelize = 0.0;
  double rotate = 0.0;
  double reduce = 0.0;
  double other = 0.0;
  double total = 0.0;

  double bucket_sum() const { return transform + voxelize + rotate + reduce + other; }
  double transform_fraction() const { return total > 0.0 ? transform / total : 0.0; }
};

// Rigid-body docking over rotations x cyclic translations. The ligand is
// rotated about its bounding-box center and that center is placed on the grid
// center; a pose with translation t moves it further by -t voxels. Rotations
// are processed in parallel with config.threads OpenMP threads; the result
// does not depend on the thread count.
DockingResult dock_pair(const Structure& receptor, const Structure& ligand, const DockConfig& config);

// dock_pair on a single thread with wall time split into buckets; `other` is
// whatever the instrumented sections do not cover.
TimeBreakdown profile_dock(const Structure& receptor, const Structure& ligand, const DockConfig& config,
                           DockingResult* result = nullptr);

// Ligand coordinates for a pose, expressed in the receptor frame.
Structure posed_ligand(const Structure& ligand, const DockingResult& result, const Pose& pose,
                       const RotationSet& rotations);

double quantize_score(double raw);

// Single TSV record: task_id, receptor_id, ligand_id, n, best_score, wall_time.
std::string to_tsv_line(const DockingResult& r);
std::string tsv_header();

void to_json(nlohmann::json& j, const GridSpec& s);
void from_json(const nlohmann::json& j, GridSpec& s);
void to_json(nlohmann::json& j, const ScoringParams& p);
void from_json(const nlohmann::json& j, ScoringParams& p);
void to_json(nlohmann::json& j, const DockConfig& c);
void from_json(const nlohmann::json& j, DockConfig& c);
void to_json(nlohmann::json& j, const Pose& p);
void from_json(const nlohmann::json& j, Pose& p);
void to_json(nlohmann::json& j, const DockingResult& r);
void from_json(const nlohmann::json& j, DockingResult& r);

DockConfig load_config(const std::string& path);
void save_config(const std::string& path, const DockConfig& config);

}  // namespace fftdock
