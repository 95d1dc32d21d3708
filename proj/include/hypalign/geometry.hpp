#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace hypalign::geometry {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Numeric guards. artanh diverges at the ball boundary, so every operation
// that produces a ball point rescales results lying outside the
// (1 - kBallMargin)/sqrt(c) shell back onto it.
inline constexpr double kBallMargin = 1e-5;
inline constexpr double kAtanhClamp = 1e-7;    // artanh argument <= 1 - kAtanhClamp
inline constexpr double kZeroNorm = 1e-15;     // below this a vector is treated as 0

// Curvature of the ball P^(d,c): the space has curvature -c, radius 1/sqrt(c).
struct Curvature {
  explicit Curvature(double value);

  double c() const { return c_; }
  double sqrt_c() const { return sqrt_c_; }
  double ball_radius() const { return 1.0 / sqrt_c_; }
  double shell_radius() const { return (1.0 - kBallMargin) / sqrt_c_; }

  friend bool operator==(const Curvature& a, const Curvature& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Curvature& a, const Curvature& b) { return a.c_ != b.c_; }

 private:
  double c_;
  double sqrt_c_;
};

// Point strictly inside the ball; construction projects onto the margin shell
// if needed and rejects non-finite coordinates.
struct BallPoint {
  BallPoint(Vector coords_in, Curvature curvature_in);

  Vector coords;
  Curvature curvature;

  int dim() const { return static_cast<int>(coords.size()); }
};

// Vector in the tangent space at the origin. Finite entries, no norm bound.
struct TangentVector {
  TangentVector(Vector coords_in, Curvature curvature_in);

  Vector coords;
  Curvature curvature;

  int dim() const { return static_cast<int>(coords.size()); }
};

BallPoint exp_map(const TangentVector& v);
TangentVector log_map(const BallPoint& y);
BallPoint mobius_add(const BallPoint& a, const BallPoint& b);
BallPoint mobius_scale(double r, const BallPoint& a);

// L1 norm of (-a) (+) b. Not assumed symmetric in its arguments.
double hyp_distance(const BallPoint& a, const BallPoint& b);

// ---- raw kernels ----------------------------------------------------------
// Matrix/vector forms shared by the model forward pass and the autodiff tape.
// Rows are individual points or tangent vectors.

Vector project_to_ball(Vector x, const Curvature& c);
Vector exp_map_vec(const Vector& v, const Curvature& c);
Vector log_map_vec(const Vector& y, const Curvature& c);
Vector mobius_add_vec(const Vector& a, const Vector& b, const Curvature& c);
double hyp_distance_vec(const Vector& a, const Vector& b, const Curvature& c);

// Branch taken by a row map; the autodiff backward pass must follow the same
// branch the forward pass took, so the _ex variants report it.
inline constexpr uint8_t kRowNormal = 0;
inline constexpr uint8_t kRowZero = 1;       // norm below kZeroNorm
inline constexpr uint8_t kRowProjected = 2;  // clamped onto the margin shell

Vector exp_map_vec_ex(const Vector& v, const Curvature& c, uint8_t* flag);
Vector log_map_vec_ex(const Vector& y, const Curvature& c, uint8_t* flag);
Vector mobius_add_vec_ex(const Vector& a, const Vector& b, const Curvature& c, bool* projected);

Matrix exp_map_rows(const Matrix& tangents, const Curvature& c);
Matrix log_map_rows(const Matrix& points, const Curvature& c);
Matrix project_rows_to_ball(Matrix points, const Curvature& c);

// ---- scalar helpers -------------------------------------------------------
// Series-guarded ratios used by the maps and their derivatives.

double tanh_ratio(double x);                 // tanh(x)/x, 1 at x=0
double tanh_ratio_deriv_over_x(double x);    // d/dx[tanh(x)/x] / x
double atanh_ratio(double u);                // artanh(u)/u, 1 at u=0
double atanh_ratio_deriv_over_u(double u);   // d/du[artanh(u)/u] / u

}  // namespace hypalign::geometry
