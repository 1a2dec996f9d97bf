#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fftdock/dispatch/master.hpp"
#include "fftdock/dispatch/worker.hpp"
#include "fftdock/docking.hpp"
#include "fftdock/grid.hpp"
#include "fftdock/pdb_io.hpp"

namespace fixtures {

using namespace fftdock;

std::filesystem::path data_dir();

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

Structure make_structure(const std::string& id, const std::vector<Vec3>& positions);
std::string pdb_text(const Structure& s);
void write_structure(const std::filesystem::path& path, const Structure& s);

// Atoms uniformly inside a sphere of the given radius around `center`.
Structure random_blob(std::uint64_t seed, int atoms, double radius, const std::string& id, Vec3 center = {});

DockGrid random_grid(std::uint64_t seed, int n, bool complex_values, GridRole role = GridRole::receptor);

// A block receptor with an L-shaped pocket and a key that fills it. Atoms lie
// on a lattice with the grid pitch, so every core is voxel-aligned under the
// 90 degree rotation group.
struct LockAndKey {
  Structure receptor;
  Structure docked_key;    // key seated in the pocket, receptor frame
  Structure key;           // docked_key moved by `applied` and a translation
  Rotation applied;        // rotation that took docked_key to key
  std::array<int, 3> seat_offset{};  // docked key center minus receptor center, in voxels

  // Translation index dock_pair reports for the seated pose on an n grid.
  std::array<int, 3> expected_translation(int n) const;
};

LockAndKey make_lock_and_key(double pitch = 1.2);

// Exhaustive pose scan with the docking placement rules, scoring every
// translation by summing over nonzero ligand voxels directly.
std::vector<Pose> sparse_exhaustive_top_poses(const Structure& receptor, const Structure& ligand,
                                              const DockConfig& config, int top_k);

// Synthetic tasks whose results are a pure function of the task id.
std::vector<DockingTask> fake_tasks(int count);
DockingResult fake_result(const DockingTask& task);

// One randomized dispatch run with workers that crash mid-task and are
// replaced. `problem` is empty when every check held.
struct FaultTrial {
  int tasks = 0;
  int workers = 0;
  int max_attempts = 0;
  int kills = 0;
  int completed = 0;
  int failed = 0;
  int transitions = 0;
  std::string problem;
};

FaultTrial run_fault_trial(std::uint64_t seed);

}  // namespace fixtures
