#pragma once

#include <array>
#include <cmath>

namespace fftdock {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Vec3 apply(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
          m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

// Unit quaternion (w, x, y, z) representing a proper rotation. Values built
// through from_euler_zyz() or canonical() satisfy w >= 0, and when w == 0 the
// first nonzero vector component is positive, so each rotation has exactly
// one representation.
struct Rotation {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Rotation identity() { return {}; }

  // Intrinsic z-y-z Euler angles in radians.
  static Rotation from_euler_zyz(double alpha, double beta, double gamma);

  Rotation canonical() const;
  Rotation inverse() const { return Rotation{w, -x, -y, -z}.canonical(); }
  Rotation compose(const Rotation& rhs) const;  // this * rhs: apply rhs first
  Mat3 matrix() const;
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  bool is_exact_identity() const { return w == 1.0 && x == 0.0 && y == 0.0 && z == 0.0; }

  friend bool operator==(const Rotation&, const Rotation&) = default;
};

// Largest absolute componentwise difference after canonicalizing both.
double quaternion_distance(const Rotation& a, const Rotation& b);

}  // namespace fftdock
