#pragma once

#include <vector>

#include "fftdock/docking.hpp"
#include "fftdock/grid.hpp"

// Serial reference implementations. They share no code with the transform
// path and exist to check it.
namespace fftdock::reference {

// Literal sextuple loop, O(n^6). Intended for n <= 16.
std::vector<double> direct_correlate(const DockGrid& receptor, const DockGrid& ligand);

// Exhaustive top-k over every (rotation, translation) pair using
// direct_correlate, with the same placement and ranking rules as dock_pair.
std::vector<Pose> exhaustive_top_poses(const Structure& receptor, const Structure& ligand, const DockConfig& config,
                                       int top_k);

}  // namespace fftdock::reference
