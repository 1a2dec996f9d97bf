#include "fftdock/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "fftdock/errors.hpp"

namespace fftdock {

void ScoringParams::validate() const {
  if (!(atom_radius > 0) || !std::isfinite(atom_radius)) throw ParameterError("atom radius must be positive");
  if (surface_thickness < 0) throw ParameterError("surface thickness must be >= 0");
  if (!std::isfinite(surface_weight) || !std::isfinite(receptor_core_weight) || !std::isfinite(ligand_weight))
    throw ParameterError("scoring weights must be finite");
}

void GridSpec::validate() const {
  if (n < 4) throw ParameterError("grid edge must be >= 4, got " + std::to_string(n));
  if (!is_radix_friendly(n)) throw ParameterError("grid edge " + std::to_string(n) + " has a prime factor above 5");
  if (!(pitch > 0) || !std::isfinite(pitch)) throw ParameterError("grid pitch must be positive");
}

Vec3 GridSpec::center() const {
  const double half = pitch * (n / 2);
  return origin + Vec3{half, half, half};
}

Vec3 GridSpec::voxel_center(int ix, int iy, int iz) const {
  return origin + Vec3{pitch * ix, pitch * iy, pitch * iz};
}

bool is_radix_friendly(long n) {
  if (n < 1) return false;
  for (long p : {2L, 3L, 5L})
    while (n % p == 0) n /= p;
  return n == 1;
}

long next_radix_friendly(long n) {
  if (n < 1) n = 1;
  while (!is_radix_friendly(n)) ++n;
  return n;
}

GridSpec choose_grid_size(const Structure& receptor, const Structure& ligand, double pitch, int margin_voxels) {
  if (!(pitch > 0) || !std::isfinite(pitch)) throw ParameterError("grid pitch must be positive");
  if (margin_voxels < 0) throw ParameterError("margin must be >= 0");
  const BoundingBox rb = bounding_box(receptor);
  const BoundingBox lb = bounding_box(ligand);
  const double span = rb.largest_edge() + lb.largest_edge();
  // tolerance keeps exact multiples of the pitch (36 / 1.2) from rounding up
  const long required = static_cast<long>(std::ceil(span / pitch - 1e-9)) + 2L * margin_voxels;

  GridSpec spec;
  spec.n = static_cast<int>(next_radix_friendly(std::max(4L, required)));
  spec.pitch = pitch;
  const double half = pitch * (spec.n / 2);
  spec.origin = rb.center() - Vec3{half, half, half};
  return spec;
}

namespace {

// Box dilation by `radius` along one axis of an n^3 mask, clipped at the
// borders. Chebyshev dilation is the composition of the three axis passes.
void dilate_axis(std::vector<std::uint8_t>& mask, int n, int radius, int axis) {
  std::vector<std::uint8_t> out(mask.size(), 0);
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? std::size_t(n) : std::size_t(n) * n;
#pragma omp parallel for schedule(static)
  for (int outer = 0; outer < n * n; ++outer) {
    const int a = outer % n, b = outer / n;
    std::size_t base = 0;
    if (axis == 0) base = std::size_t(n) * (a + std::size_t(n) * b);
    if (axis == 1) base = a + std::size_t(n) * n * b;
    if (axis == 2) base = a + std::size_t(n) * b;
    // running count of set voxels in the window [i - radius, i + radius]
    int count = 0;
    for (int i = 0; i < std::min(radius, n); ++i) count += mask[base + i * stride];
    for (int i = 0; i < n; ++i) {
      if (i + radius < n) count += mask[base + (i + radius) * stride];
      if (i - radius - 1 >= 0) count -= mask[base + (i - radius - 1) * stride];
      out[base + i * stride] = count > 0;
    }
  }
  mask.swap(out);
}

}  // namespace

void assign_grid_into(std::span<const Vec3> positions, std::span<const int> serials, const GridSpec& spec,
                      GridRole role, const ScoringParams& params, std::span<std::complex<double>> voxels) {
  spec.validate();
  params.validate();
  if (voxels.size() != spec.voxel_count()) throw ShapeError("voxel buffer has the wrong size");
  const int n = spec.n;
  const double r = params.atom_radius;
  const double r2 = r * r;
  const double lo = -0.5 * spec.pitch;
  const double hi = (n - 0.5) * spec.pitch;

  std::vector<std::uint8_t> core(spec.voxel_count(), 0);
  for (std::size_t a = 0; a < positions.size(); ++a) {
    const Vec3 p = positions[a] - spec.origin;
    for (double c : {p.x, p.y, p.z}) {
      if (c - r < lo || c + r > hi) {
        const int serial = a < serials.size() ? serials[a] : static_cast<int>(a);
        throw GridOverflowError("grid overflow: atom " + std::to_string(serial) + " does not fit the grid", serial);
      }
    }
    auto range = [&](double c, int& first, int& last) {
      first = std::max(0, static_cast<int>(std::ceil((c - r) / spec.pitch)));
      last = std::min(n - 1, static_cast<int>(std::floor((c + r) / spec.pitch)));
    };
    int x0, x1, y0, y1, z0, z1;
    range(p.x, x0, x1);
    range(p.y, y0, y1);
    range(p.z, z0, z1);
    for (int iz = z0; iz <= z1; ++iz) {
      const double dz = iz * spec.pitch - p.z;
      for (int iy = y0; iy <= y1; ++iy) {
        const double dy = iy * spec.pitch - p.y;
        for (int ix = x0; ix <= x1; ++ix) {
          const double dx = ix * spec.pitch - p.x;
          if (dx * dx + dy * dy + dz * dz <= r2) core[spec.index(ix, iy, iz)] = 1;
        }
      }
    }
  }

  if (role == GridRole::ligand) {
    for (std::size_t i = 0; i < core.size(); ++i) voxels[i] = core[i] ? params.ligand_weight : 0.0;
    return;
  }

  std::vector<std::uint8_t> shell = core;
  if (params.surface_thickness > 0)
    for (int axis = 0; axis < 3; ++axis) dilate_axis(shell, n, params.surface_thickness, axis);
  for (std::size_t i = 0; i < core.size(); ++i) {
    if (core[i])
      voxels[i] = params.receptor_core_weight;
    else if (shell[i])
      voxels[i] = params.surface_weight;
    else
      voxels[i] = 0.0;
  }
}

DockGrid assign_grid(std::span<const Vec3> positions, std::span<const int> serials, const GridSpec& spec,
                     GridRole role, const ScoringParams& params) {
  spec.validate();
  DockGrid g{spec, role, std::vector<std::complex<double>>(spec.voxel_count())};
  assign_grid_into(positions, serials, spec, role, params, g.voxels);
  return g;
}

DockGrid assign_grid(const Structure& s, const GridSpec& spec, GridRole role, const ScoringParams& params) {
  if (s.atoms.empty()) throw NoAtomsError(s.id.empty() ? std::string("structure") : s.id);
  std::vector<Vec3> pos = s.positions();
  std::vector<int> serials;
  serials.reserve(s.atoms.size());
  for (const AtomRecord& a : s.atoms) serials.push_back(a.serial);
  return assign_grid(pos, serials, spec, role, params);
}

namespace {

void put_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

double get_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw IoError("truncated grid dump");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_grid_dump(std::ostream& out, const DockGrid& grid) {
  char header[256];
  std::snprintf(header, sizeof header, "fftdock-grid n=%d pitch=%.17g origin=%.17g,%.17g,%.17g role=%s\n", grid.spec.n,
                grid.spec.pitch, grid.spec.origin.x, grid.spec.origin.y, grid.spec.origin.z,
                grid.role == GridRole::receptor ? "receptor" : "ligand");
  out << header;
  for (const auto& v : grid.voxels) {
    put_le(out, v.real());
    put_le(out, v.imag());
  }
}

DockGrid read_grid_dump(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty grid dump");
  DockGrid g;
  char role[16] = {0};
  if (std::sscanf(header.c_str(), "fftdock-grid n=%d pitch=%lf origin=%lf,%lf,%lf role=%15s", &g.spec.n,
                  &g.spec.pitch, &g.spec.origin.x, &g.spec.origin.y, &g.spec.origin.z, role) != 6)
    throw IoError("bad grid dump header");
  g.spec.validate();
  g.role = std::string(role) == "receptor" ? GridRole::receptor : GridRole::ligand;
  g.voxels.resize(g.spec.voxel_count());
  for (auto& v : g.voxels) {
    const double re = get_le(in);
    const double im = get_le(in);
    v = {re, im};
  }
  return g;
}

}  // namespace fftdock
