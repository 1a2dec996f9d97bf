#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fftdock/geometry.hpp"
#include "fftdock/pdb_io.hpp"

namespace fftdock {

// Shape-complementarity weights and voxelization constants. Recorded with
// every docking result so a run can be reproduced.
struct ScoringParams {
  double surface_weight = 1.0;
  double receptor_core_weight = -15.0;
  double ligand_weight = 1.0;
  double atom_radius = 1.5;  // angstrom, same for every element
  int surface_thickness = 1;  // voxels, Chebyshev distance

  void validate() const;
  friend bool operator==(const ScoringParams&, const ScoringParams&) = default;
};

struct GridSpec {
  int n = 0;
  double pitch = 1.2;
  Vec3 origin;  // center of voxel (0, 0, 0)

  void validate() const;
  std::size_t voxel_count() const { return std::size_t(n) * n * n; }
  // Center point of voxel (n/2, n/2, n/2).
  Vec3 center() const;
  Vec3 voxel_center(int ix, int iy, int iz) const;
  std::size_t index(int ix, int iy, int iz) const { return std::size_t(ix) + std::size_t(n) * (iy + std::size_t(n) * iz); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class GridRole { receptor, ligand };

struct DockGrid {
  GridSpec spec;
  GridRole role = GridRole::ligand;
  std::vector<std::complex<double>> voxels;  // x fastest
};

bool is_radix_friendly(long n);  // only prime factors 2, 3, 5
long next_radix_friendly(long n);

// Smallest 5-smooth n >= max(4, ceil(span / pitch) + 2 * margin), where span
// is the sum of the largest bounding-box edges of both structures. The
// receptor's bounding-box center lands on GridSpec::center().
GridSpec choose_grid_size(const Structure& receptor, const Structure& ligand, double pitch, int margin_voxels);

DockGrid assign_grid(const Structure& s, const GridSpec& spec, GridRole role, const ScoringParams& params);

// Same as above over bare coordinates; serials name the atom in overflow
// errors and may be empty.
DockGrid assign_grid(std::span<const Vec3> positions, std::span<const int> serials, const GridSpec& spec,
                     GridRole role, const ScoringParams& params);

// In-place variant used by the docking loop to reuse voxel storage.
void assign_grid_into(std::span<const Vec3> positions, std::span<const int> serials, const GridSpec& spec,
                      GridRole role, const ScoringParams& params, std::span<std::complex<double>> voxels);

// Debug dump: one text header line, then n^3 little-endian (re, im) float64
// pairs in x-fastest order.
void write_grid_dump(std::ostream& out, const DockGrid& grid);
DockGrid read_grid_dump(std::istream& in);

}  // namespace fftdock
