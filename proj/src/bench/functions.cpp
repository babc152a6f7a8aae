#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "mcma/bench.hpp"

namespace mcma::bench {
namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

constexpr double kGeomEps = 1e-12;

// Moller-Trumbore restricted to the closed segment p -> q.
bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Triangle& tri) {
  const Vec3 dir = sub(q, p);
  const Vec3 e1 = sub(tri[1], tri[0]);
  const Vec3 e2 = sub(tri[2], tri[0]);
  const Vec3 h = cross(dir, e2);
  const double a = dot(e1, h);
  if (std::abs(a) < kGeomEps) return false;
  const double f = 1.0 / a;
  const Vec3 s = sub(p, tri[0]);
  const double u = f * dot(s, h);
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = cross(s, e1);
  const double v = f * dot(dir, qv);
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = f * dot(e2, qv);
  return t >= 0.0 && t <= 1.0;
}

using Vec2 = std::array<double, 2>;

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a[0], b[0]) - kGeomEps <= p[0] && p[0] <= std::max(a[0], b[0]) + kGeomEps &&
         std::min(a[1], b[1]) - kGeomEps <= p[1] && p[1] <= std::max(a[1], b[1]) + kGeomEps;
}

bool segments_cross_2d(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0)))
    return true;
  if (std::abs(o1) <= kGeomEps && on_segment(a, b, c)) return true;
  if (std::abs(o2) <= kGeomEps && on_segment(a, b, d)) return true;
  if (std::abs(o3) <= kGeomEps && on_segment(c, d, a)) return true;
  if (std::abs(o4) <= kGeomEps && on_segment(c, d, b)) return true;
  return false;
}

bool point_in_triangle_2d(const Vec2& p, const std::array<Vec2, 3>& t) {
  const double d1 = orient(t[0], t[1], p), d2 = orient(t[1], t[2], p), d3 = orient(t[2], t[0], p);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

bool coplanar_intersect(const Triangle& a, const Triangle& b, const Vec3& normal) {
  // Drop the axis where the normal is largest.
  std::size_t drop = 0;
  for (std::size_t k = 1; k < 3; ++k)
    if (std::abs(normal[k]) > std::abs(normal[drop])) drop = k;
  const std::size_t u = drop == 0 ? 1 : 0;
  const std::size_t v = drop == 2 ? 1 : 2;
  std::array<Vec2, 3> pa, pb;
  for (std::size_t i = 0; i < 3; ++i) {
    pa[i] = {a[i][u], a[i][v]};
    pb[i] = {b[i][u], b[i][v]};
  }
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (segments_cross_2d(pa[i], pa[(i + 1) % 3], pb[j], pb[(j + 1) % 3])) return true;
  return point_in_triangle_2d(pa[0], pb) || point_in_triangle_2d(pb[0], pa);
}

}  // namespace

double black_scholes(double spot, double strike, double rate, double volatility, double expiry,
                     OptionType type) {
  const double sqrt_t = std::sqrt(expiry);
  const double d1 =
      (std::log(spot / strike) + (rate + 0.5 * volatility * volatility) * expiry) / (volatility * sqrt_t);
  const double d2 = d1 - volatility * sqrt_t;
  const double discounted_strike = strike * std::exp(-rate * expiry);
  if (type == OptionType::call) return spot * normal_cdf(d1) - discounted_strike * normal_cdf(d2);
  return discounted_strike * normal_cdf(-d2) - spot * normal_cdf(-d1);
}

// Miller's backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1} started well
// above max(n, x) and normalised with J_0 + 2 * sum_k J_{2k} = 1.
double bessel_j(int order, double x) {
  if (order < 0) throw ValidationError("bessel_j: order must be >= 0");
  if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("bessel_j: x must be finite and >= 0");
  if (x == 0.0) return order == 0 ? 1.0 : 0.0;

  const int reach = std::max(order, static_cast<int>(x));
  const int start = 2 * ((reach + 25 + static_cast<int>(std::sqrt(60.0 * reach))) / 2);

  double above = 0.0;  // J_{k+1}
  double cur = 1.0;    // J_k, unnormalised
  double result = start == order ? cur : 0.0;
  double norm = 2.0 * cur;  // start is even and > 0
  for (int k = start; k > 0; --k) {
    const double below = (2.0 * k / x) * cur - above;
    above = cur;
    cur = below;
    const int idx = k - 1;
    if (idx == order) result = cur;
    if (idx % 2 == 0) norm += (idx == 0 ? 1.0 : 2.0) * cur;
    if (std::abs(cur) > 1e200) {
      cur *= 1e-200;
      above *= 1e-200;
      result *= 1e-200;
      norm *= 1e-200;
    }
  }
  return result / norm;
}

double sobel_magnitude(std::span<const double, 9> w) {
  const double gx = (w[2] + 2.0 * w[5] + w[8]) - (w[0] + 2.0 * w[3] + w[6]);
  const double gy = (w[6] + 2.0 * w[7] + w[8]) - (w[0] + 2.0 * w[1] + w[2]);
  return std::sqrt(gx * gx + gy * gy);
}

const std::vector<std::array<double, 6>>& kmeans_centroids() {
  static const std::vector<std::array<double, 6>> centroids = {
      {0.2, 0.2, 0.2, 0.2, 0.2, 0.2},
      {0.8, 0.8, 0.8, 0.8, 0.8, 0.8},
      {0.2, 0.8, 0.2, 0.8, 0.2, 0.8},
      {0.8, 0.2, 0.8, 0.2, 0.8, 0.2},
  };
  return centroids;
}

double kmeans_nearest_distance(std::span<const double, 6> point) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : kmeans_centroids()) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < 6; ++k) d2 += (point[k] - c[k]) * (point[k] - c[k]);
    best = std::min(best, d2);
  }
  return std::sqrt(best);
}

std::array<double, 2> inverse_kinematics(double x, double y) {
  const double r2 = x * x + y * y;
  const double c2 = (r2 - kArmLink1 * kArmLink1 - kArmLink2 * kArmLink2) / (2.0 * kArmLink1 * kArmLink2);
  if (c2 < -1.0 - 1e-12 || c2 > 1.0 + 1e-12)
    throw ValidationError(fmt::format("inverse_kinematics: ({}, {}) is out of reach", x, y));
  const double theta2 = std::acos(std::clamp(c2, -1.0, 1.0));
  const double theta1 =
      std::atan2(y, x) - std::atan2(kArmLink2 * std::sin(theta2), kArmLink1 + kArmLink2 * std::cos(theta2));
  return {theta1, theta2};
}

std::array<double, 2> forward_kinematics(double theta1, double theta2) {
  return {kArmLink1 * std::cos(theta1) + kArmLink2 * std::cos(theta1 + theta2),
          kArmLink1 * std::sin(theta1) + kArmLink2 * std::sin(theta1 + theta2)};
}

bool triangles_intersect(const Triangle& a, const Triangle& b) {
  const Vec3 nb = cross(sub(b[1], b[0]), sub(b[2], b[0]));
  const double scale = std::sqrt(dot(nb, nb));
  bool coplanar = scale > 0.0;
  for (const Vec3& p : a)
    if (std::abs(dot(nb, sub(p, b[0]))) > 1e-12 * scale) coplanar = false;
  if (coplanar) return coplanar_intersect(a, b, nb);

  // Non-coplanar triangles meet along a segment whose endpoints lie on edges
  // of one triangle, so testing all six edges is complete.
  for (std::size_t i = 0; i < 3; ++i) {
    if (segment_hits_triangle(a[i], a[(i + 1) % 3], b)) return true;
    if (segment_hits_triangle(b[i], b[(i + 1) % 3], a)) return true;
  }
  return false;
}

double piecewise3(double x) {
  if (x < 1.0) return 1.0 + x;
  if (x < 2.0) return 3.0 - x;
  return x - 1.0;
}

}  // namespace mcma::bench
