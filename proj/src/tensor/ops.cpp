#include "tensor/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "common/error.hpp"

namespace sw {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

MatMap view(Tensor& t) {
  return MatMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
ConstMatMap view(const Tensor& t) {
  return ConstMatMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}

Tensor make_matrix(std::size_t rows, std::size_t cols) { return Tensor(Shape{rows, cols}); }

// Accumulates a matrix-shaped gradient into an input of possibly lower rank.
void accumulate(Tape& tape, Var input, const Tensor& g) {
  if (Tensor* sink = tape.grad_sink(input.id())) {
    auto dst = sink->values();
    auto src = g.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

std::string dims(const Tensor& t) { return t.shape_string(); }

}  // namespace

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul: inner axis mismatch " + dims(av) + " x " + dims(bv));
  }
  Tensor out = make_matrix(av.rows(), bv.cols());
  view(out).noalias() = view(av) * view(bv);
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& tape, std::uint32_t self) {
    const auto g = view(tape.out_grad(self));
    if (Tensor* ga = tape.grad_sink(a.id())) view(*ga).noalias() += g * view(b.value()).transpose();
    if (Tensor* gb = tape.grad_sink(b.id())) view(*gb).noalias() += view(a.value()).transpose() * g;
  });
}

Var linear(Var x, Var w, std::optional<Var> b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (xv.rank() != 2) throw DimensionError("linear: input must be [n x d_in], got " + dims(xv));
  if (wv.rank() != 2 || wv.rows() != xv.cols()) {
    throw DimensionError("linear: axis 1 of input (" + std::to_string(xv.cols()) +
                         ") does not match axis 0 of weight " + dims(wv));
  }
  if (b && b->value().size() != wv.cols()) {
    throw DimensionError("linear: bias length " + std::to_string(b->value().size()) +
                         " does not match output axis " + std::to_string(wv.cols()));
  }
  Tensor out = make_matrix(xv.rows(), wv.cols());
  auto y = view(out);
  y.noalias() = view(xv) * view(wv);
  if (b) {
    const Eigen::Map<const Eigen::RowVectorXd> bias(b->value().data(), static_cast<Eigen::Index>(wv.cols()));
    y.rowwise() += bias;
  }
  std::vector<Var> inputs{x, w};
  if (b) inputs.push_back(*b);
  return x.tape().record(std::move(out), inputs, [x, w, b](Tape& tape, std::uint32_t self) {
    const auto g = view(tape.out_grad(self));
    if (Tensor* gx = tape.grad_sink(x.id())) view(*gx).noalias() += g * view(w.value()).transpose();
    if (Tensor* gw = tape.grad_sink(w.id())) view(*gw).noalias() += view(x.value()).transpose() * g;
    if (b) {
      if (Tensor* gb = tape.grad_sink(b->id())) {
        Eigen::Map<Eigen::RowVectorXd> gbias(gb->data(), static_cast<Eigen::Index>(gb->size()));
        gbias += g.colwise().sum();
      }
    }
  });
}

namespace {

template <typename Fwd, typename BwdA, typename BwdB>
Var elementwise_binary(const char* name, Var a, Var b, Fwd fwd, BwdA da, BwdB db) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) {
    throw DimensionError(std::string(name) + ": shape mismatch " + dims(av) + " vs " + dims(bv));
  }
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
  return a.tape().record(std::move(out), {a, b}, [a, b, da, db](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (Tensor* ga = tape.grad_sink(a.id())) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * da(av[i], bv[i]);
    }
    if (Tensor* gb = tape.grad_sink(b.id())) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * db(av[i], bv[i]);
    }
  });
}

}  // namespace

Var add(Var a, Var b) {
  return elementwise_binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return elementwise_binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return elementwise_binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var add_row(Var x, Var row) {
  const Tensor& xv = x.value();
  const Tensor& rv = row.value();
  if (rv.size() != xv.cols()) {
    throw DimensionError("add_row: row length " + std::to_string(rv.size()) + " does not match axis 1 (" +
                         std::to_string(xv.cols()) + ")");
  }
  Tensor out = xv;
  out.set_requires_grad(false);
  const std::size_t n = xv.rows(), d = xv.cols();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) out[r * d + c] += rv[c];
  return x.tape().record(std::move(out), {x, row}, [x, row, n, d](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    accumulate(tape, x, g);
    if (Tensor* gr = tape.grad_sink(row.id())) {
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) (*gr)[c] += g[r * d + c];
    }
  });
}

Var scale(Var x, double s) {
  Tensor out = x.value();
  out.set_requires_grad(false);
  for (double& v : out.values()) v *= s;
  return x.tape().record(std::move(out), {x}, [x, s](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += s * g[i];
    }
  });
}

Var concat_cols(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows()) {
    throw DimensionError("concat_cols: axis 0 mismatch " + dims(av) + " vs " + dims(bv));
  }
  const std::size_t n = av.rows(), p = av.cols(), q = bv.cols();
  Tensor out = make_matrix(n, p + q);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(av.data() + r * p, p, out.data() + r * (p + q));
    std::copy_n(bv.data() + r * q, q, out.data() + r * (p + q) + p);
  }
  return a.tape().record(std::move(out), {a, b}, [a, b, n, p, q](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    if (Tensor* ga = tape.grad_sink(a.id())) {
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < p; ++c) (*ga)[r * p + c] += g[r * (p + q) + c];
    }
    if (Tensor* gb = tape.grad_sink(b.id())) {
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < q; ++c) (*gb)[r * q + c] += g[r * (p + q) + p + c];
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t d = parts[0].value().cols();
  std::size_t n = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].value().cols() != d) {
      throw DimensionError("concat_rows: axis 1 of part " + std::to_string(i) + " is " +
                           std::to_string(parts[i].value().cols()) + ", expected " + std::to_string(d));
    }
    n += parts[i].value().rows();
  }
  Tensor out = make_matrix(n, d);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    offsets.push_back(off);
    std::copy_n(p.value().data(), p.value().size(), out.data() + off);
    off += p.value().size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), inputs, [inputs, offsets](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (Tensor* gp = tape.grad_sink(inputs[i].id())) {
        for (std::size_t k = 0; k < gp->size(); ++k) (*gp)[k] += g[offsets[i] + k];
      }
    }
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  if (count == 0 || begin + count > xv.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                         ") out of range for axis 0 of " + dims(xv));
  }
  const std::size_t d = xv.cols();
  Tensor out = make_matrix(count, d);
  std::copy_n(xv.data() + begin * d, count * d, out.data());
  return x.tape().record(std::move(out), {x}, [x, begin, d](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (std::size_t k = 0; k < g.size(); ++k) (*gx)[begin * d + k] += g[k];
    }
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  if (count == 0 || begin + count > xv.cols()) {
    throw DimensionError("slice_cols: columns out of range for axis 1 of " + dims(xv));
  }
  const std::size_t n = xv.rows(), d = xv.cols();
  Tensor out = make_matrix(n, count);
  for (std::size_t r = 0; r < n; ++r) std::copy_n(xv.data() + r * d + begin, count, out.data() + r * count);
  return x.tape().record(std::move(out), {x}, [x, begin, count, n, d](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < count; ++c) (*gx)[r * d + begin + c] += g[r * count + c];
    }
  });
}

Var gather_rows(Var x, std::vector<std::size_t> index) {
  const Tensor& xv = x.value();
  const std::size_t d = xv.cols();
  if (index.empty()) throw DimensionError("gather_rows: empty index");
  for (std::size_t i : index) {
    if (i >= xv.rows()) throw DimensionError("gather_rows: index " + std::to_string(i) + " out of range");
  }
  Tensor out = make_matrix(index.size(), d);
  for (std::size_t r = 0; r < index.size(); ++r) std::copy_n(xv.data() + index[r] * d, d, out.data() + r * d);
  return x.tape().record(std::move(out), {x}, [x, index = std::move(index), d](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (std::size_t r = 0; r < index.size(); ++r)
        for (std::size_t c = 0; c < d; ++c) (*gx)[index[r] * d + c] += g[r * d + c];
    }
  });
}

Var repeat_row(Var row, std::size_t n) {
  const Tensor& rv = row.value();
  const std::size_t d = rv.size();
  if (n == 0) throw DimensionError("repeat_row: zero repeats");
  Tensor out = make_matrix(n, d);
  for (std::size_t r = 0; r < n; ++r) std::copy_n(rv.data(), d, out.data() + r * d);
  return row.tape().record(std::move(out), {row}, [row, n, d](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    if (Tensor* gr = tape.grad_sink(row.id())) {
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) (*gr)[c] += g[r * d + c];
    }
  });
}

Var mean_rows(Var x) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  Tensor out = make_matrix(1, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) out[c] += xv[r * d + c];
  for (double& v : out.values()) v /= static_cast<double>(n);
  return x.tape().record(std::move(out), {x}, [x, n, d](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    if (Tensor* gx = tape.grad_sink(x.id())) {
      const double inv = 1.0 / static_cast<double>(n);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) (*gx)[r * d + c] += g[c] * inv;
    }
  });
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.tape().record(std::move(out), {x}, [x](Tape& tape, std::uint32_t self) {
    accumulate(tape, x, tape.out_grad(self));
  });
}

Var cumsum_rows(Var x) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  Tensor out = make_matrix(n, d);
  for (std::size_t c = 0; c < d; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += xv[r * d + c];
      out[r * d + c] = acc;
    }
  }
  return x.tape().record(std::move(out), {x}, [x, n, d](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (std::size_t c = 0; c < d; ++c) {
        double acc = 0.0;
        for (std::size_t r = n; r-- > 0;) {
          acc += g[r * d + c];
          (*gx)[r * d + c] += acc;
        }
      }
    }
  });
}

Var gelu(Var x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  Tensor out(x.value().shape());
  const Tensor& xv = x.value();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    out[i] = 0.5 * v * (1.0 + std::tanh(kC * (v + kA * v * v * v)));
  }
  return x.tape().record(std::move(out), {x}, [x](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    const Tensor& xv = x.value();
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = xv[i];
        const double t = std::tanh(kC * (v + kA * v * v * v));
        const double dt = (1.0 - t * t) * kC * (1.0 + 3.0 * kA * v * v);
        (*gx)[i] += g[i] * (0.5 * (1.0 + t) + 0.5 * v * dt);
      }
    }
  });
}

Var sigmoid(Var x) {
  Tensor out(x.value().shape());
  const Tensor& xv = x.value();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return x.tape().record(std::move(out), {x}, [x](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    const Tensor& y = tape.value(self);
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * y[i] * (1.0 - y[i]);
    }
  });
}

namespace {

void softmax_row(const double* in, double* out, std::size_t k) {
  double m = in[0];
  for (std::size_t i = 1; i < k; ++i) m = std::max(m, in[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = std::exp(in[i] - m);
    s += out[i];
  }
  for (std::size_t i = 0; i < k; ++i) out[i] /= s;
}

}  // namespace

Var softmax(Var x) {
  const Tensor& xv = x.value();
  const std::size_t k = xv.cols();
  const std::size_t n = xv.size() / k;
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < n; ++r) softmax_row(xv.data() + r * k, out.data() + r * k, k);
  return x.tape().record(std::move(out), {x}, [x, n, k](Tape& tape, std::uint32_t self) {
    const Tensor& g = tape.out_grad(self);
    const Tensor& y = tape.value(self);
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (std::size_t r = 0; r < n; ++r) {
        double dotp = 0.0;
        for (std::size_t i = 0; i < k; ++i) dotp += g[r * k + i] * y[r * k + i];
        for (std::size_t i = 0; i < k; ++i) (*gx)[r * k + i] += y[r * k + i] * (g[r * k + i] - dotp);
      }
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  if (gamma.value().size() != d || beta.value().size() != d) {
    throw DimensionError("layer_norm: gamma/beta length must equal axis 1 (" + std::to_string(d) + ")");
  }
  if (!(eps > 0.0)) throw ConfigError("layer_norm: eps must be positive");
  auto xhat = std::make_shared<std::vector<double>>(n * d);
  auto inv_std = std::make_shared<std::vector<double>>(n);
  Tensor out = make_matrix(n, d);
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = xv.data() + r * d;
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += row[c];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t c = 0; c < d; ++c) {
      const double h = (row[c] - mean) * is;
      (*xhat)[r * d + c] = h;
      out[r * d + c] = gv[c] * h + bv[c];
    }
  }
  return x.tape().record(std::move(out), {x, gamma, beta},
                         [x, gamma, beta, xhat, inv_std, n, d](Tape& tape, std::uint32_t self) {
                           const Tensor& g = tape.out_grad(self);
                           const Tensor& gv = gamma.value();
                           if (Tensor* gg = tape.grad_sink(gamma.id())) {
                             for (std::size_t r = 0; r < n; ++r)
                               for (std::size_t c = 0; c < d; ++c) (*gg)[c] += g[r * d + c] * (*xhat)[r * d + c];
                           }
                           if (Tensor* gb = tape.grad_sink(beta.id())) {
                             for (std::size_t r = 0; r < n; ++r)
                               for (std::size_t c = 0; c < d; ++c) (*gb)[c] += g[r * d + c];
                           }
                           if (Tensor* gx = tape.grad_sink(x.id())) {
                             const double inv_d = 1.0 / static_cast<double>(d);
                             for (std::size_t r = 0; r < n; ++r) {
                               double m1 = 0.0, m2 = 0.0;
                               for (std::size_t c = 0; c < d; ++c) {
                                 const double dh = g[r * d + c] * gv[c];
                                 m1 += dh;
                                 m2 += dh * (*xhat)[r * d + c];
                               }
                               m1 *= inv_d;
                               m2 *= inv_d;
                               for (std::size_t c = 0; c < d; ++c) {
                                 const double dh = g[r * d + c] * gv[c];
                                 (*gx)[r * d + c] += (*inv_std)[r] * (dh - m1 - (*xhat)[r * d + c] * m2);
                               }
                             }
                           }
                         });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return x.tape().record(Tensor::scalar(s), {x}, [x](Tape& tape, std::uint32_t self) {
    const double g = tape.out_grad(self).item();
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (double& v : gx->values()) v += g;
    }
  });
}

Var weighted_sum(Var x, const Tensor& weights) {
  if (weights.size() != x.value().size()) throw DimensionError("weighted_sum: weight count mismatch");
  double s = 0.0;
  const Tensor& xv = x.value();
  for (std::size_t i = 0; i < xv.size(); ++i) s += weights[i] * xv[i];
  return x.tape().record(Tensor::scalar(s), {x}, [x, weights](Tape& tape, std::uint32_t self) {
    const double g = tape.out_grad(self).item();
    if (Tensor* gx = tape.grad_sink(x.id())) {
      for (std::size_t i = 0; i < gx->size(); ++i) (*gx)[i] += g * weights[i];
    }
  });
}

namespace {

struct RopeTable {
  std::vector<double> cos_;
  std::vector<double> sin_;
};

RopeTable rope_table(std::size_t n, std::size_t d, std::span<const Vec2> positions) {
  if (d % 4 != 0) {
    throw ConfigError("rope2d: feature dimension " + std::to_string(d) + " is not divisible by 4");
  }
  if (positions.size() != n) {
    throw DimensionError("rope2d: " + std::to_string(positions.size()) + " positions for " + std::to_string(n) +
                         " rows");
  }
  const std::size_t pairs = d / 2;
  const std::size_t per_axis = d / 4;
  RopeTable t;
  t.cos_.resize(n * pairs);
  t.sin_.resize(n * pairs);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::size_t idx = p % per_axis;
      const double freq = std::pow(10000.0, -static_cast<double>(idx) / static_cast<double>(per_axis));
      const double coord = p < per_axis ? positions[r].x : positions[r].y;
      const double angle = coord * freq;
      t.cos_[r * pairs + p] = std::cos(angle);
      t.sin_[r * pairs + p] = std::sin(angle);
    }
  }
  return t;
}

void rotate(const double* in, double* out, const RopeTable& t, std::size_t n, std::size_t d, double sign) {
  const std::size_t pairs = d / 2;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = 0; p < pairs; ++p) {
      const double c = t.cos_[r * pairs + p];
      const double s = sign * t.sin_[r * pairs + p];
      const double a = in[r * d + 2 * p];
      const double b = in[r * d + 2 * p + 1];
      out[r * d + 2 * p] = c * a - s * b;
      out[r * d + 2 * p + 1] = s * a + c * b;
    }
  }
}

}  // namespace

Tensor rope2d(const Tensor& x, std::span<const Vec2> positions) {
  const std::size_t n = x.rows(), d = x.cols();
  const RopeTable t = rope_table(n, d, positions);
  Tensor out(x.shape());
  rotate(x.data(), out.data(), t, n, d, 1.0);
  return out;
}

Var rope2d(Var x, std::span<const Vec2> positions) {
  const Tensor& xv = x.value();
  const std::size_t n = xv.rows(), d = xv.cols();
  auto table = std::make_shared<RopeTable>(rope_table(n, d, positions));
  Tensor out(xv.shape());
  rotate(xv.data(), out.data(), *table, n, d, 1.0);
  return x.tape().record(std::move(out), {x}, [x, table, n, d](Tape& tape, std::uint32_t self) {
    if (Tensor* gx = tape.grad_sink(x.id())) {
      Tensor back(gx->shape());
      rotate(tape.out_grad(self).data(), back.data(), *table, n, d, -1.0);
      for (std::size_t i = 0; i < back.size(); ++i) (*gx)[i] += back[i];
    }
  });
}

namespace {

struct ResolvedLayout {
  std::size_t heads, head_dim, groups, qg, kg;
};

ResolvedLayout resolve(const Tensor& q, const Tensor& k, const AttentionLayout& layout) {
  const std::size_t d = q.cols();
  if (layout.heads == 0 || d % layout.heads != 0) {
    throw ConfigError("attention: model dim " + std::to_string(d) + " is not divisible by heads=" +
                      std::to_string(layout.heads));
  }
  if (k.cols() != d) throw DimensionError("attention: key dim " + std::to_string(k.cols()) + " != query dim " + std::to_string(d));
  const std::size_t nq = q.rows(), nk = k.rows();
  const std::size_t qg = layout.q_group ? layout.q_group : nq;
  const std::size_t kg = layout.k_group ? layout.k_group : nk;
  if (nq % qg != 0 || nk % kg != 0 || nq / qg != nk / kg) {
    throw DimensionError("attention: row groups do not tile queries (" + std::to_string(nq) + "/" +
                         std::to_string(qg) + ") and keys (" + std::to_string(nk) + "/" + std::to_string(kg) + ")");
  }
  if (!layout.key_bias.empty() && layout.key_bias.size() != nk) {
    throw DimensionError("attention: key_bias length " + std::to_string(layout.key_bias.size()) + " != key rows " +
                         std::to_string(nk));
  }
  return {layout.heads, d / layout.heads, nq / qg, qg, kg};
}

// probs[(g * heads + h)] is a qg x kg matrix.
std::vector<RowMat> compute_probs(const Tensor& q, const Tensor& k, const AttentionLayout& layout,
                                  const ResolvedLayout& r) {
  const auto Q = view(q);
  const auto K = view(k);
  const double sc = 1.0 / std::sqrt(static_cast<double>(r.head_dim));
  std::vector<RowMat> probs(r.groups * r.heads);
  for (std::size_t g = 0; g < r.groups; ++g) {
    for (std::size_t h = 0; h < r.heads; ++h) {
      const auto qb = Q.block(static_cast<Eigen::Index>(g * r.qg), static_cast<Eigen::Index>(h * r.head_dim),
                              static_cast<Eigen::Index>(r.qg), static_cast<Eigen::Index>(r.head_dim));
      const auto kb = K.block(static_cast<Eigen::Index>(g * r.kg), static_cast<Eigen::Index>(h * r.head_dim),
                              static_cast<Eigen::Index>(r.kg), static_cast<Eigen::Index>(r.head_dim));
      RowMat s = (qb * kb.transpose()) * sc;
      if (!layout.key_bias.empty()) {
        for (std::size_t j = 0; j < r.kg; ++j) s.col(static_cast<Eigen::Index>(j)).array() += layout.key_bias[g * r.kg + j];
      }
      for (Eigen::Index i = 0; i < s.rows(); ++i) softmax_row(s.row(i).data(), s.row(i).data(), r.kg);
      probs[g * r.heads + h] = std::move(s);
    }
  }
  return probs;
}

}  // namespace

Tensor attention_probabilities(const Tensor& q, const Tensor& k, const AttentionLayout& layout) {
  const ResolvedLayout r = resolve(q, k, layout);
  const auto probs = compute_probs(q, k, layout, r);
  Tensor out = make_matrix(r.heads * q.rows(), r.kg);
  for (std::size_t h = 0; h < r.heads; ++h) {
    for (std::size_t g = 0; g < r.groups; ++g) {
      const RowMat& p = probs[g * r.heads + h];
      for (std::size_t i = 0; i < r.qg; ++i)
        for (std::size_t j = 0; j < r.kg; ++j) out.at(h * q.rows() + g * r.qg + i, j) = p(i, j);
    }
  }
  return out;
}

Var attention(Var q, Var k, Var v, const AttentionLayout& layout) {
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  const ResolvedLayout r = resolve(qv, kv, layout);
  if (vv.rows() != kv.rows() || vv.cols() != kv.cols()) {
    throw DimensionError("attention: value shape " + dims(vv) + " does not match key shape " + dims(kv));
  }
  auto probs = std::make_shared<std::vector<RowMat>>(compute_probs(qv, kv, layout, r));
  Tensor out = make_matrix(qv.rows(), qv.cols());
  auto O = view(out);
  const auto V = view(vv);
  const auto blk = [r](auto&& m, std::size_t g, std::size_t h, std::size_t gs) {
    return m.block(static_cast<Eigen::Index>(g * gs), static_cast<Eigen::Index>(h * r.head_dim),
                   static_cast<Eigen::Index>(gs), static_cast<Eigen::Index>(r.head_dim));
  };
  for (std::size_t g = 0; g < r.groups; ++g)
    for (std::size_t h = 0; h < r.heads; ++h) blk(O, g, h, r.qg).noalias() = (*probs)[g * r.heads + h] * blk(V, g, h, r.kg);

  return q.tape().record(std::move(out), {q, k, v}, [q, k, v, probs, r, blk](Tape& tape, std::uint32_t self) {
    const auto G = view(tape.out_grad(self));
    const auto Q = view(q.value());
    const auto K = view(k.value());
    const auto V = view(v.value());
    Tensor* gq = tape.grad_sink(q.id());
    Tensor* gk = tape.grad_sink(k.id());
    Tensor* gv = tape.grad_sink(v.id());
    const double sc = 1.0 / std::sqrt(static_cast<double>(r.head_dim));
    for (std::size_t g = 0; g < r.groups; ++g) {
      for (std::size_t h = 0; h < r.heads; ++h) {
        const RowMat& P = (*probs)[g * r.heads + h];
        const auto go = blk(G, g, h, r.qg);
        if (gv) blk(view(*gv), g, h, r.kg).noalias() += P.transpose() * go;
        if (!gq && !gk) continue;
        RowMat dp = go * blk(V, g, h, r.kg).transpose();
        const Eigen::VectorXd rowdot = (dp.array() * P.array()).rowwise().sum();
        RowMat ds = P.array() * (dp.colwise() - rowdot).array();
        ds *= sc;
        if (gq) blk(view(*gq), g, h, r.qg).noalias() += ds * blk(K, g, h, r.kg);
        if (gk) blk(view(*gk), g, h, r.kg).noalias() += ds.transpose() * blk(Q, g, h, r.qg);
      }
    }
  });
}

}  // namespace sw
