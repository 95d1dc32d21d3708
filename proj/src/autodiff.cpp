#include "hypalign/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace hypalign::ad {

namespace {

int sign3(double x) { return x > 0.0 ? 2 : (x < 0.0 ? 1 : 0); }

}  // namespace

Var Tape::push(Matrix value, std::string name, bool requires_grad,
               std::function<void(Tape&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.name = std::move(name);
  n.requires_grad = requires_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) {
  if (!v.valid() || v.id >= size()) throw std::invalid_argument("Tape: invalid var");
  return nodes_[static_cast<size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= size()) throw std::invalid_argument("Tape: invalid var");
  return nodes_[static_cast<size_t>(v.id)];
}

void Tape::fold_signature(uint64_t bits) { signature_ = (signature_ ^ bits) * 1099511628211ull; }

const Matrix& Tape::value(Var v) const { return node(v).value; }
const Matrix& Tape::grad(Var v) const { return node(v).grad; }
const std::string& Tape::name(Var v) const { return node(v).name; }
bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Var Tape::constant(Matrix value, std::string name) {
  return push(std::move(value), std::move(name), false, nullptr);
}

Var Tape::parameter(Matrix value, std::string name) {
  Var v = push(std::move(value), std::move(name), true, nullptr);
  parameters_.push_back(v);
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.cols() != bv.rows()) throw std::invalid_argument("Tape::matmul: shape mismatch");
  Var out = push(av * bv, "matmul", requires_grad(a) || requires_grad(b), nullptr);
  node(out).backprop = [out, a, b](Tape& t) {
    const Matrix& g = t.node(out).grad;
    if (t.requires_grad(a)) t.node(a).grad.noalias() += g * t.value(b).transpose();
    if (t.requires_grad(b)) t.node(b).grad.noalias() += t.value(a).transpose() * g;
  };
  return out;
}

Var Tape::spmm(const graph::SparseMatrix& lhs, Var x) {
  const Matrix& xv = value(x);
  if (lhs.cols() != xv.rows()) throw std::invalid_argument("Tape::spmm: shape mismatch");
  Var out = push(lhs * xv, "spmm", requires_grad(x), nullptr);
  graph::SparseMatrix lhs_t = graph::SparseMatrix(lhs.transpose());
  node(out).backprop = [out, x, lhs_t = std::move(lhs_t)](Tape& t) {
    if (t.requires_grad(x)) t.node(x).grad.noalias() += lhs_t * t.node(out).grad;
  };
  return out;
}

Var Tape::relu(Var x) {
  const Matrix& xv = value(x);
  fold_signature(0x72656C75ull);  // op tag
  uint64_t word = 0;
  int used = 0;
  for (Eigen::Index j = 0; j < xv.cols(); ++j) {
    for (Eigen::Index i = 0; i < xv.rows(); ++i) {
      word = (word << 1) | (xv(i, j) > 0.0 ? 1u : 0u);
      if (++used == 56) {
        fold_signature(word);
        word = 0;
        used = 0;
      }
    }
  }
  if (used > 0) fold_signature(word | (1ull << 62));

  Var out = push(xv.cwiseMax(0.0), "relu", requires_grad(x), nullptr);
  node(out).backprop = [out, x](Tape& t) {
    if (!t.requires_grad(x)) return;
    const Matrix& g = t.node(out).grad;
    const Matrix& xin = t.value(x);
    t.node(x).grad.array() += (xin.array() > 0.0).cast<double>() * g.array();
  };
  return out;
}

Var Tape::exp_map_rows(Var x, Curvature c) {
  const Matrix& xv = value(x);
  Matrix out(xv.rows(), xv.cols());
  std::vector<uint8_t> flags(static_cast<size_t>(xv.rows()));
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    out.row(i) =
        geometry::exp_map_vec_ex(xv.row(i).transpose(), c, &flags[static_cast<size_t>(i)])
            .transpose();
  }
  fold_signature(0x657870ull);
  for (uint8_t f : flags) fold_signature(f + 3);

  Var o = push(std::move(out), "exp_map_rows", requires_grad(x), nullptr);
  node(o).backprop = [o, x, c, flags = std::move(flags)](Tape& t) {
    if (!t.requires_grad(x)) return;
    const Matrix& g = t.node(o).grad;
    const Matrix& xin = t.value(x);
    Matrix& gx = t.node(x).grad;
    double shell = c.shell_radius();
    for (Eigen::Index i = 0; i < xin.rows(); ++i) {
      Vector v = xin.row(i).transpose();
      Vector s = g.row(i).transpose();
      uint8_t flag = flags[static_cast<size_t>(i)];
      if (flag == geometry::kRowZero) {
        // limit Jacobian at the origin is the identity
        gx.row(i) += s.transpose();
        continue;
      }
      double r = v.norm();
      if (flag == geometry::kRowProjected) {
        // composed map is shell * v / ||v||: purely tangential
        double sv = s.dot(v);
        gx.row(i) += (shell / r) * (s - (sv / (r * r)) * v).transpose();
        continue;
      }
      double xarg = c.sqrt_c() * r;
      double gscale = geometry::tanh_ratio(xarg);
      double radial = c.c() * geometry::tanh_ratio_deriv_over_x(xarg);  // g'(r)/r
      gx.row(i) += (gscale * s + (radial * s.dot(v)) * v).transpose();
    }
  };
  return o;
}

Var Tape::log_map_rows(Var x, Curvature c) {
  const Matrix& xv = value(x);
  Matrix out(xv.rows(), xv.cols());
  std::vector<uint8_t> flags(static_cast<size_t>(xv.rows()));
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    out.row(i) =
        geometry::log_map_vec_ex(xv.row(i).transpose(), c, &flags[static_cast<size_t>(i)])
            .transpose();
  }
  fold_signature(0x6C6F67ull);
  for (uint8_t f : flags) fold_signature(f + 3);

  Var o = push(std::move(out), "log_map_rows", requires_grad(x), nullptr);
  node(o).backprop = [o, x, c, flags = std::move(flags)](Tape& t) {
    if (!t.requires_grad(x)) return;
    const Matrix& g = t.node(o).grad;
    const Matrix& xin = t.value(x);
    Matrix& gx = t.node(x).grad;
    double shell = c.shell_radius();
    for (Eigen::Index i = 0; i < xin.rows(); ++i) {
      Vector y = xin.row(i).transpose();
      Vector s = g.row(i).transpose();
      uint8_t flag = flags[static_cast<size_t>(i)];
      if (flag == geometry::kRowZero) {
        gx.row(i) += s.transpose();
        continue;
      }
      double rho = y.norm();
      if (flag == geometry::kRowProjected) {
        // composed map is atanh(sqrt(c)*shell)/sqrt(c) * y/||y||
        double kappa = std::atanh(std::min(c.sqrt_c() * shell, 1.0 - geometry::kAtanhClamp)) /
                       c.sqrt_c();
        double sy = s.dot(y);
        gx.row(i) += (kappa / rho) * (s - (sy / (rho * rho)) * y).transpose();
        continue;
      }
      double u = c.sqrt_c() * rho;
      double fscale = geometry::atanh_ratio(u);
      double radial = c.c() * geometry::atanh_ratio_deriv_over_u(u);  // f'(rho)/rho
      gx.row(i) += (fscale * s + (radial * s.dot(y)) * y).transpose();
    }
  };
  return o;
}

Var Tape::gather_rows(Var x, std::vector<int> rows) {
  const Matrix& xv = value(x);
  Matrix out(static_cast<Eigen::Index>(rows.size()), xv.cols());
  for (size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= xv.rows()) {
      throw std::invalid_argument("Tape::gather_rows: row index out of range");
    }
    out.row(static_cast<Eigen::Index>(k)) = xv.row(rows[k]);
  }
  Var o = push(std::move(out), "gather_rows", requires_grad(x), nullptr);
  node(o).backprop = [o, x, rows = std::move(rows)](Tape& t) {
    if (!t.requires_grad(x)) return;
    const Matrix& g = t.node(o).grad;
    Matrix& gx = t.node(x).grad;
    for (size_t k = 0; k < rows.size(); ++k) {
      gx.row(rows[k]) += g.row(static_cast<Eigen::Index>(k));
    }
  };
  return o;
}

Var Tape::mobius_distance_rows(Var a, Var b, Curvature c) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw std::invalid_argument("Tape::mobius_distance_rows: shape mismatch");
  }
  Eigen::Index n = av.rows();
  Matrix out(n, 1);
  std::vector<uint8_t> projected(static_cast<size_t>(n));
  fold_signature(0x6D6F62ull);
  for (Eigen::Index i = 0; i < n; ++i) {
    bool proj = false;
    Vector w = geometry::mobius_add_vec_ex(-av.row(i).transpose(), bv.row(i).transpose(), c,
                                           &proj);
    projected[static_cast<size_t>(i)] = proj ? 1 : 0;
    out(i, 0) = w.lpNorm<1>();
    uint64_t word = proj ? 1 : 0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      word = word * 3 + static_cast<uint64_t>(sign3(w(j)));
      if ((j & 31) == 31) {
        fold_signature(word);
        word = 0;
      }
    }
    fold_signature(word | (1ull << 62));
  }

  Var o = push(std::move(out), "mobius_distance_rows", requires_grad(a) || requires_grad(b),
               nullptr);
  node(o).backprop = [o, a, b, c, projected = std::move(projected)](Tape& t) {
    bool need_a = t.requires_grad(a);
    bool need_b = t.requires_grad(b);
    if (!need_a && !need_b) return;
    const Matrix& g = t.node(o).grad;
    const Matrix& av = t.value(a);
    const Matrix& bv = t.value(b);
    const double cc = c.c();
    const double shell = c.shell_radius();
    for (Eigen::Index i = 0; i < av.rows(); ++i) {
      double upstream = g(i, 0);
      if (upstream == 0.0) continue;
      Vector u = -av.row(i).transpose();
      Vector v = bv.row(i).transpose();

      // recompute the unprojected Moebius sum with the forward expressions
      double uu = u.squaredNorm();
      double vv = v.squaredNorm();
      double uv = u.dot(v);
      double alpha = 1.0 + 2.0 * cc * uv + cc * vv;
      double beta = 1.0 - cc * uu;
      double denom = 1.0 + 2.0 * cc * uv + cc * cc * uu * vv;
      if (denom < geometry::kZeroNorm) denom = geometry::kZeroNorm;
      Vector w = (alpha * u + beta * v) / denom;

      // d|w|_1/dw, scaled by the upstream gradient
      Vector s(w.size());
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        s(j) = upstream * (w(j) > 0.0 ? 1.0 : (w(j) < 0.0 ? -1.0 : 0.0));
      }
      if (projected[static_cast<size_t>(i)]) {
        double r = w.norm();
        double sw = s.dot(w);
        s = (shell / r) * (s - (sw / (r * r)) * w);
      }

      double su = s.dot(u);
      double sv = s.dot(v);
      double sw = s.dot(w);

      if (need_a) {
        Vector grad_u = (2.0 * cc * su * v + alpha * s - 2.0 * cc * sv * u) / denom -
                        (sw / denom) * (2.0 * cc * v + 2.0 * cc * cc * vv * u);
        t.node(a).grad.row(i) -= grad_u.transpose();  // u = -a
      }
      if (need_b) {
        Vector grad_v = ((2.0 * cc * u + 2.0 * cc * v) * su + beta * s) / denom -
                        (sw / denom) * (2.0 * cc * u + 2.0 * cc * cc * uu * v);
        t.node(b).grad.row(i) += grad_v.transpose();
      }
    }
  };
  return o;
}

Var Tape::hinge_rank_loss(Var d_pos, Var d_neg, std::vector<int> pos_of_neg, double margin) {
  const Matrix& dp = value(d_pos);
  const Matrix& dn = value(d_neg);
  if (dp.cols() != 1 || dn.cols() != 1) {
    throw std::invalid_argument("Tape::hinge_rank_loss: expects column vectors");
  }
  if (static_cast<Eigen::Index>(pos_of_neg.size()) != dn.rows()) {
    throw std::invalid_argument("Tape::hinge_rank_loss: mapping size mismatch");
  }
  double total = 0.0;
  std::vector<uint8_t> active(pos_of_neg.size());
  fold_signature(0x68696E6765ull);
  uint64_t word = 0;
  int used = 0;
  for (size_t j = 0; j < pos_of_neg.size(); ++j) {
    int p = pos_of_neg[j];
    if (p < 0 || p >= dp.rows()) {
      throw std::invalid_argument("Tape::hinge_rank_loss: positive index out of range");
    }
    double arg = dp(p, 0) + margin - dn(static_cast<Eigen::Index>(j), 0);
    bool on = arg > 0.0;
    active[j] = on ? 1 : 0;
    if (on) total += arg;
    word = (word << 1) | (on ? 1u : 0u);
    if (++used == 56) {
      fold_signature(word);
      word = 0;
      used = 0;
    }
  }
  if (used > 0) fold_signature(word | (1ull << 62));

  Matrix out(1, 1);
  out(0, 0) = total;
  Var o = push(std::move(out), "hinge_rank_loss", requires_grad(d_pos) || requires_grad(d_neg),
               nullptr);
  node(o).backprop = [o, d_pos, d_neg, pos_of_neg = std::move(pos_of_neg),
                      active = std::move(active)](Tape& t) {
    double upstream = t.node(o).grad(0, 0);
    if (upstream == 0.0) return;
    bool need_p = t.requires_grad(d_pos);
    bool need_n = t.requires_grad(d_neg);
    for (size_t j = 0; j < pos_of_neg.size(); ++j) {
      if (!active[j]) continue;
      if (need_p) t.node(d_pos).grad(pos_of_neg[j], 0) += upstream;
      if (need_n) t.node(d_neg).grad(static_cast<Eigen::Index>(j), 0) -= upstream;
    }
  };
  return o;
}

Var Tape::sum(Var x) {
  Matrix out(1, 1);
  out(0, 0) = value(x).sum();
  Var o = push(std::move(out), "sum", requires_grad(x), nullptr);
  node(o).backprop = [o, x](Tape& t) {
    if (!t.requires_grad(x)) return;
    t.node(x).grad.array() += t.node(o).grad(0, 0);
  };
  return o;
}

void Tape::backward(Var root) {
  const Matrix& rv = value(root);
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw std::invalid_argument("Tape::backward: root must be a scalar (1x1)");
  }
  for (Node& n : nodes_) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  }
  node(root).grad(0, 0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.requires_grad && n.backprop) {
      n.backprop(*this);
    }
  }
}

}  // namespace hypalign::ad
