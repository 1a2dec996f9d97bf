#include "fftdock/reference.hpp"

#include "fftdock/errors.hpp"

namespace fftdock::reference {

std::vector<double> direct_correlate(const DockGrid& receptor, const DockGrid& ligand) {
  const int n = receptor.spec.n;
  const auto idx = [n](int x, int y, int z) { return std::size_t(x) + std::size_t(n) * (y + std::size_t(n) * z); };
  std::vector<double> c(std::size_t(n) * n * n, 0.0);
  for (int tz = 0; tz < n; ++tz)
    for (int ty = 0; ty < n; ++ty)
      for (int tx = 0; tx < n; ++tx) {
        double sum = 0.0;
        for (int vz = 0; vz < n; ++vz)
          for (int vy = 0; vy < n; ++vy)
            for (int vx = 0; vx < n; ++vx) {
              const auto& r = receptor.voxels[idx(vx, vy, vz)];
              const auto& l = ligand.voxels[idx((vx + tx) % n, (vy + ty) % n, (vz + tz) % n)];
              sum += r.real() * l.real() - r.imag() * l.imag();
            }
        c[idx(tx, ty, tz)] = sum;
      }
  return c;
}

std::vector<Pose> exhaustive_top_poses(const Structure& receptor, const Structure& ligand, const DockConfig& config,
                                       int top_k) {
  const GridSpec spec = choose_grid_size(receptor, ligand, config.pitch, config.margin_voxels);
  const DockGrid rgrid = assign_grid(receptor, spec, GridRole::receptor, config.params);
  const RotationSet rotations = generate_rotations(config.angular_step);
  const Vec3 ligand_center = bounding_box(ligand).center();
  const Vec3 destination = spec.center();

  PoseHeap heap(static_cast<std::size_t>(top_k));
  for (std::size_t r = 0; r < rotations.size(); ++r) {
    Structure placed = ligand;
    const Mat3 m = rotations[r].matrix();
    for (AtomRecord& a : placed.atoms) a.position = fftdock::apply(m, a.position - ligand_center) + destination;
    const DockGrid lgrid = assign_grid(placed, spec, GridRole::ligand, config.params);
    const std::vector<double> c = direct_correlate(rgrid, lgrid);
    for (int tz = 0; tz < spec.n; ++tz)
      for (int ty = 0; ty < spec.n; ++ty)
        for (int tx = 0; tx < spec.n; ++tx)
          heap.push(Pose{static_cast<int>(r), {tx, ty, tz}, quantize_score(c[spec.index(tx, ty, tz)])});
  }
  return heap.sorted();
}

}  // namespace fftdock::reference
