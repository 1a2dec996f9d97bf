#pragma once

#include <span>
#include <vector>

#include "fftdock/geometry.hpp"
#include "fftdock/pdb_io.hpp"

namespace fftdock {

using RotationSet = std::vector<Rotation>;

inline constexpr double kRotationDedupTolerance = 1e-6;

// Euler (z-y-z) grid with the given step: alpha, gamma in [0, 360), beta in
// [0, 180]. Duplicates within kRotationDedupTolerance are merged; the result
// is sorted lexicographically descending on (w, x, y, z), so the identity is
// always element 0.
RotationSet generate_rotations(double angular_step_deg);

Structure rotate_structure(const Structure& s, const Rotation& r, const Vec3& center);
void rotate_positions(std::span<const Vec3> in, const Rotation& r, const Vec3& center, const Vec3& destination,
                      std::span<Vec3> out);

}  // namespace fftdock
