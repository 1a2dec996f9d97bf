#include "fftdock/rotations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "fftdock/errors.hpp"

namespace fftdock {

namespace {

bool lex_descending(const Rotation& a, const Rotation& b) {
  return std::tie(a.w, a.x, a.y, a.z) > std::tie(b.w, b.x, b.y, b.z);
}

}  // namespace

RotationSet generate_rotations(double step) {
  if (!(step > 0) || step > 120 || !std::isfinite(step)) throw ParameterError("angular step must be in (0, 120]");
  const double count = 360.0 / step;
  const long per_turn = std::lround(count);
  if (std::abs(count - per_turn) > 1e-9) throw ParameterError("angular step must divide 360");

  const double to_rad = std::numbers::pi / 180.0;
  RotationSet all;
  for (long ia = 0; ia < per_turn; ++ia) {
    for (long ib = 0; ib * step <= 180.0 + 1e-9; ++ib) {
      for (long ig = 0; ig < per_turn; ++ig) {
        all.push_back(Rotation::from_euler_zyz(ia * step * to_rad, ib * step * to_rad, ig * step * to_rad));
      }
    }
  }
  std::sort(all.begin(), all.end(), lex_descending);

  // After sorting, any duplicate of q has w within the tolerance, so only the
  // tail of `kept` with w close to q.w needs checking.
  RotationSet kept;
  for (const Rotation& q : all) {
    bool dup = false;
    for (auto it = kept.rbegin(); it != kept.rend() && it->w - q.w <= kRotationDedupTolerance; ++it) {
      if (quaternion_distance(*it, q) <= kRotationDedupTolerance) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(q);
  }
  return kept;
}

void rotate_positions(std::span<const Vec3> in, const Rotation& r, const Vec3& center, const Vec3& destination,
                      std::span<Vec3> out) {
  const Mat3 m = r.matrix();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fftdock::apply(m, in[i] - center) + destination;
}

Structure rotate_structure(const Structure& s, const Rotation& r, const Vec3& center) {
  Structure out = s;
  if (r.is_exact_identity()) return out;
  const Mat3 m = r.matrix();
  for (AtomRecord& a : out.atoms) a.position = fftdock::apply(m, a.position - center) + center;
  return out;
}

}  // namespace fftdock
