#include "hypalign/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hypalign::geometry {

namespace {

void require_same_ball(const BallPoint& a, const BallPoint& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
  if (a.curvature != b.curvature) {
    throw std::invalid_argument(std::string(op) + ": curvature mismatch (" +
                                std::to_string(a.curvature.c()) + " vs " +
                                std::to_string(b.curvature.c()) + ")");
  }
}

}  // namespace

Curvature::Curvature(double value) : c_(value), sqrt_c_(std::sqrt(value)) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("Curvature: c must be a positive finite real, got " +
                                std::to_string(value));
  }
}

BallPoint::BallPoint(Vector coords_in, Curvature curvature_in)
    : coords(std::move(coords_in)), curvature(curvature_in) {
  if (!coords.allFinite()) {
    throw std::invalid_argument("BallPoint: non-finite coordinates");
  }
  coords = project_to_ball(std::move(coords), curvature);
}

TangentVector::TangentVector(Vector coords_in, Curvature curvature_in)
    : coords(std::move(coords_in)), curvature(curvature_in) {
  if (!coords.allFinite()) {
    throw std::invalid_argument("TangentVector: non-finite coordinates");
  }
}

double tanh_ratio(double x) {
  if (x < 1e-4) {
    double x2 = x * x;
    return 1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0;
  }
  return std::tanh(x) / x;
}

double tanh_ratio_deriv_over_x(double x) {
  if (x < 1e-3) {
    return -2.0 / 3.0 + 8.0 * x * x / 15.0;
  }
  double t = std::tanh(x);
  return ((1.0 - t * t) * x - t) / (x * x * x);
}

double atanh_ratio(double u) {
  if (u < 1e-4) {
    double u2 = u * u;
    return 1.0 + u2 / 3.0 + u2 * u2 / 5.0;
  }
  return std::atanh(u) / u;
}

double atanh_ratio_deriv_over_u(double u) {
  if (u < 1e-3) {
    return 2.0 / 3.0 + 4.0 * u * u / 5.0;
  }
  return (u / (1.0 - u * u) - std::atanh(u)) / (u * u * u);
}

Vector project_to_ball(Vector x, const Curvature& c) {
  double n = x.norm();
  double shell = c.shell_radius();
  if (n >= shell) {
    x *= shell / n;
  }
  return x;
}

Vector exp_map_vec_ex(const Vector& v, const Curvature& c, uint8_t* flag) {
  double r = v.norm();
  if (r < kZeroNorm) {
    if (flag) *flag = kRowZero;
    return Vector::Zero(v.size());
  }
  Vector y = tanh_ratio(c.sqrt_c() * r) * v;
  double n = y.norm();
  double shell = c.shell_radius();
  if (n >= shell) {
    y *= shell / n;
    if (flag) *flag = kRowProjected;
  } else if (flag) {
    *flag = kRowNormal;
  }
  return y;
}

Vector exp_map_vec(const Vector& v, const Curvature& c) {
  return exp_map_vec_ex(v, c, nullptr);
}

Vector log_map_vec_ex(const Vector& y, const Curvature& c, uint8_t* flag) {
  double rho = y.norm();
  if (rho < kZeroNorm) {
    if (flag) *flag = kRowZero;
    return Vector::Zero(y.size());
  }
  double shell = c.shell_radius();
  double scale = 1.0;
  if (rho >= shell) {
    scale = shell / rho;
    rho = shell;
    if (flag) *flag = kRowProjected;
  } else if (flag) {
    *flag = kRowNormal;
  }
  double u = std::min(c.sqrt_c() * rho, 1.0 - kAtanhClamp);
  return (atanh_ratio(u) * scale) * y;
}

Vector log_map_vec(const Vector& y, const Curvature& c) {
  return log_map_vec_ex(y, c, nullptr);
}

Vector mobius_add_vec_ex(const Vector& a, const Vector& b, const Curvature& c, bool* projected) {
  const double cc = c.c();
  const double aa = a.squaredNorm();
  const double bb = b.squaredNorm();
  const double ab = a.dot(b);
  double alpha = 1.0 + 2.0 * cc * ab + cc * bb;
  double beta = 1.0 - cc * aa;
  double denom = 1.0 + 2.0 * cc * ab + cc * cc * aa * bb;
  // denom >= (1 - c|a||b|)^2 > 0 inside the ball; floor it against rounding
  if (denom < kZeroNorm) {
    denom = kZeroNorm;
  }
  Vector w = (alpha * a + beta * b) / denom;
  double n = w.norm();
  double shell = c.shell_radius();
  if (n >= shell) {
    w *= shell / n;
    if (projected) *projected = true;
  } else if (projected) {
    *projected = false;
  }
  return w;
}

Vector mobius_add_vec(const Vector& a, const Vector& b, const Curvature& c) {
  return mobius_add_vec_ex(a, b, c, nullptr);
}

double hyp_distance_vec(const Vector& a, const Vector& b, const Curvature& c) {
  return mobius_add_vec(-a, b, c).lpNorm<1>();
}

Matrix exp_map_rows(const Matrix& tangents, const Curvature& c) {
  Matrix out(tangents.rows(), tangents.cols());
  for (Eigen::Index i = 0; i < tangents.rows(); ++i) {
    out.row(i) = exp_map_vec(tangents.row(i).transpose(), c).transpose();
  }
  return out;
}

Matrix log_map_rows(const Matrix& points, const Curvature& c) {
  Matrix out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.row(i) = log_map_vec(points.row(i).transpose(), c).transpose();
  }
  return out;
}

Matrix project_rows_to_ball(Matrix points, const Curvature& c) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    points.row(i) = project_to_ball(points.row(i).transpose(), c).transpose();
  }
  return points;
}

BallPoint exp_map(const TangentVector& v) {
  return BallPoint(exp_map_vec(v.coords, v.curvature), v.curvature);
}

TangentVector log_map(const BallPoint& y) {
  return TangentVector(log_map_vec(y.coords, y.curvature), y.curvature);
}

BallPoint mobius_add(const BallPoint& a, const BallPoint& b) {
  require_same_ball(a, b, "mobius_add");
  return BallPoint(mobius_add_vec(a.coords, b.coords, a.curvature), a.curvature);
}

BallPoint mobius_scale(double r, const BallPoint& a) {
  if (!std::isfinite(r)) {
    throw std::invalid_argument("mobius_scale: non-finite scale factor");
  }
  double rho = a.coords.norm();
  if (rho < kZeroNorm) {
    return BallPoint(Vector::Zero(a.dim()), a.curvature);
  }
  double u = std::min(a.curvature.sqrt_c() * rho, 1.0 - kAtanhClamp);
  double t = std::tanh(r * std::atanh(u));
  Vector y = (t / (a.curvature.sqrt_c() * rho)) * a.coords;
  return BallPoint(std::move(y), a.curvature);
}

double hyp_distance(const BallPoint& a, const BallPoint& b) {
  require_same_ball(a, b, "hyp_distance");
  return hyp_distance_vec(a.coords, b.coords, a.curvature);
}

}  // namespace hypalign::geometry
