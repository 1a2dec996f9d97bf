#include "fftdock/geometry.hpp"

#include <algorithm>

namespace fftdock {

Rotation Rotation::from_euler_zyz(double alpha, double beta, double gamma) {
  // q = Rz(alpha) * Ry(beta) * Rz(gamma)
  const double cb = std::cos(beta / 2), sb = std::sin(beta / 2);
  const double sum = (alpha + gamma) / 2, diff = (alpha - gamma) / 2;
  return Rotation{cb * std::cos(sum), -sb * std::sin(diff), sb * std::cos(diff), cb * std::sin(sum)}.canonical();
}

Rotation Rotation::canonical() const {
  // Components within round-off of zero are snapped so that sign
  // canonicalization is stable.
  constexpr double kSnap = 1e-12;
  auto snap = [](double v) { return std::abs(v) < kSnap ? 0.0 : v; };
  Rotation q{snap(w), snap(x), snap(y), snap(z)};
  const double len = q.norm();
  q = {q.w / len, q.x / len, q.y / len, q.z / len};
  bool flip = false;
  if (q.w < 0) {
    flip = true;
  } else if (q.w == 0) {
    for (double c : {q.x, q.y, q.z}) {
      if (c != 0) {
        flip = c < 0;
        break;
      }
    }
  }
  if (flip) q = {-q.w, -q.x, -q.y, -q.z};
  // -0.0 would otherwise sort differently from 0.0 in some comparisons
  return {q.w + 0.0, q.x + 0.0, q.y + 0.0, q.z + 0.0};
}

Rotation Rotation::compose(const Rotation& r) const {
  return Rotation{w * r.w - x * r.x - y * r.y - z * r.z, w * r.x + x * r.w + y * r.z - z * r.y,
                  w * r.y - x * r.z + y * r.w + z * r.x, w * r.z + x * r.y - y * r.x + z * r.w}
      .canonical();
}

Mat3 Rotation::matrix() const {
  return Mat3{{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
               {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
               {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

double quaternion_distance(const Rotation& a, const Rotation& b) {
  const Rotation p = a.canonical(), q = b.canonical();
  return std::max({std::abs(p.w - q.w), std::abs(p.x - q.x), std::abs(p.y - q.y), std::abs(p.z - q.z)});
}

}  // namespace fftdock
