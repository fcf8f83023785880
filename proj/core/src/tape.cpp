#include "mforge/tape.hpp"

#include <cmath>
#include <memory>

#include "mforge/errors.hpp"
#include "mforge/linalg.hpp"
#include "mforge/ops.hpp"

namespace mforge {

Var Tape::emit(Tensor value, bool needs_grad, std::function<void(Tape&, int)> backprop) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::check(Var x) const {
  if (!x.valid() || x.id >= static_cast<int>(nodes_.size())) {
    throw UsageError("tape: variable handle does not belong to this record");
  }
}

Var Tape::constant(Tensor value) { return emit(std::move(value), false, {}); }

Var Tape::param(Tensor value) { return emit(std::move(value), true, {}); }

Var Tape::relu(Var x) {
  check(x);
  Tensor out = relu_forward(v(x.id));
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    const Tensor& in = t.v(xi);
    Tensor& gi = t.g(xi);
    for (int i = 0; i < in.size(); ++i) {
      if (in[i] > 0.0) gi[i] += gx[i];
    }
  });
}

Var Tape::leaky_relu(Var x, double slope) {
  check(x);
  Tensor out = leaky_relu_forward(v(x.id), slope);
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi, slope](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    const Tensor& in = t.v(xi);
    Tensor& gi = t.g(xi);
    for (int i = 0; i < in.size(); ++i) gi[i] += gx[i] * (in[i] > 0.0 ? 1.0 : slope);
  });
}

Var Tape::tanh_act(Var x) {
  check(x);
  Tensor out = tanh_forward(v(x.id));
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    const Tensor& y = t.v(self);
    Tensor& gi = t.g(xi);
    for (int i = 0; i < y.size(); ++i) gi[i] += gx[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::sigmoid(Var x) {
  check(x);
  Tensor out = sigmoid_forward(v(x.id));
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    const Tensor& y = t.v(self);
    Tensor& gi = t.g(xi);
    for (int i = 0; i < y.size(); ++i) gi[i] += gx[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::exp_act(Var x) {
  check(x);
  Tensor out = v(x.id);
  for (double& e : out.vec()) e = std::exp(e);
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    const Tensor& y = t.v(self);
    Tensor& gi = t.g(xi);
    for (int i = 0; i < y.size(); ++i) gi[i] += gx[i] * y[i];
  });
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  if (!v(a.id).same_shape(v(b.id))) {
    throw UsageError("add shape mismatch: " + v(a.id).shape_str() + " vs " + v(b.id).shape_str());
  }
  Tensor out = v(a.id);
  out.add_scaled(v(b.id), 1.0);
  const int ai = a.id, bi = b.id;
  return emit(std::move(out), wants(ai) || wants(bi), [ai, bi](Tape& t, int self) {
    const Tensor& gx = t.g(self);
    if (t.wants(ai)) t.g(ai).add_scaled(gx, 1.0);
    if (t.wants(bi)) t.g(bi).add_scaled(gx, 1.0);
  });
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  if (!v(a.id).same_shape(v(b.id))) {
    throw UsageError("sub shape mismatch: " + v(a.id).shape_str() + " vs " + v(b.id).shape_str());
  }
  Tensor out = v(a.id);
  out.add_scaled(v(b.id), -1.0);
  const int ai = a.id, bi = b.id;
  return emit(std::move(out), wants(ai) || wants(bi), [ai, bi](Tape& t, int self) {
    const Tensor& gx = t.g(self);
    if (t.wants(ai)) t.g(ai).add_scaled(gx, 1.0);
    if (t.wants(bi)) t.g(bi).add_scaled(gx, -1.0);
  });
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  if (!v(a.id).same_shape(v(b.id))) {
    throw UsageError("mul shape mismatch: " + v(a.id).shape_str() + " vs " + v(b.id).shape_str());
  }
  Tensor out = v(a.id);
  const Tensor& bv = v(b.id);
  for (int i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const int ai = a.id, bi = b.id;
  return emit(std::move(out), wants(ai) || wants(bi), [ai, bi](Tape& t, int self) {
    const Tensor& gx = t.g(self);
    const Tensor& av = t.v(ai);
    const Tensor& bv2 = t.v(bi);
    if (t.wants(ai)) {
      Tensor& ga = t.g(ai);
      for (int i = 0; i < gx.size(); ++i) ga[i] += gx[i] * bv2[i];
    }
    if (t.wants(bi)) {
      Tensor& gb = t.g(bi);
      for (int i = 0; i < gx.size(); ++i) gb[i] += gx[i] * av[i];
    }
  });
}

Var Tape::scale(Var x, double c) {
  check(x);
  Tensor out = v(x.id);
  for (double& e : out.vec()) e *= c;
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi, c](Tape& t, int self) {
    if (t.wants(xi)) t.g(xi).add_scaled(t.g(self), c);
  });
}

Var Tape::add_const(Var x, double c) {
  check(x);
  Tensor out = v(x.id);
  for (double& e : out.vec()) e += c;
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi](Tape& t, int self) {
    if (t.wants(xi)) t.g(xi).add_scaled(t.g(self), 1.0);
  });
}

Var Tape::sum(Var x) {
  check(x);
  if (v(x.id).empty()) throw UsageError("sum of empty tensor");
  double s = 0.0;
  for (double e : v(x.id).vec()) s += e;
  const int xi = x.id;
  return emit(Tensor::scalar(s), wants(xi), [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const double gs = t.g(self)[0];
    Tensor& gi = t.g(xi);
    for (int i = 0; i < gi.size(); ++i) gi[i] += gs;
  });
}

Var Tape::mean(Var x) {
  check(x);
  const int n = v(x.id).size();
  if (n == 0) throw UsageError("mean of empty tensor");
  return scale(sum(x), 1.0 / n);
}

Var Tape::reshape(Var x, std::vector<int> shape) {
  check(x);
  if (shape_product(shape) != v(x.id).size()) {
    throw UsageError("reshape from " + v(x.id).shape_str() + " to " + shape_to_string(shape) +
                     " changes element count");
  }
  Tensor out(std::move(shape), v(x.id).vec());
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    Tensor& gi = t.g(xi);
    for (int i = 0; i < gx.size(); ++i) gi[i] += gx[i];
  });
}

Var Tape::concat_flat(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& av = v(a.id);
  const Tensor& bv = v(b.id);
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(av.size() + bv.size()));
  data.insert(data.end(), av.vec().begin(), av.vec().end());
  data.insert(data.end(), bv.vec().begin(), bv.vec().end());
  Tensor out({av.size() + bv.size()}, std::move(data));
  const int ai = a.id, bi = b.id, na = av.size();
  return emit(std::move(out), wants(ai) || wants(bi), [ai, bi, na](Tape& t, int self) {
    const Tensor& gx = t.g(self);
    if (t.wants(ai)) {
      Tensor& ga = t.g(ai);
      for (int i = 0; i < na; ++i) ga[i] += gx[i];
    }
    if (t.wants(bi)) {
      Tensor& gb = t.g(bi);
      for (int i = 0; i < gx.size() - na; ++i) gb[i] += gx[na + i];
    }
  });
}

Var Tape::conv2d(Var input, Var kernels, int stride, int padding) {
  check(input);
  check(kernels);
  Tensor out = conv2d_forward(v(input.id), v(kernels.id), stride, padding);
  const int xi = input.id, ki = kernels.id;
  return emit(std::move(out), wants(xi) || wants(ki),
              [xi, ki, stride, padding](Tape& t, int self) {
                Tensor* gi = t.wants(xi) ? &t.g(xi) : nullptr;
                Tensor* gk = t.wants(ki) ? &t.g(ki) : nullptr;
                conv2d_backward(t.v(xi), t.v(ki), stride, padding, t.g(self), gi, gk);
              });
}

Var Tape::bias_channels(Var x, Var bias) {
  check(x);
  check(bias);
  Tensor out = bias_channels_forward(v(x.id), v(bias.id));
  const int xi = x.id, bi = bias.id;
  return emit(std::move(out), wants(xi) || wants(bi), [xi, bi](Tape& t, int self) {
    const Tensor& gx = t.g(self);
    const int C = gx.dim(0), HW = gx.dim(1) * gx.dim(2);
    if (t.wants(xi)) t.g(xi).add_scaled(gx, 1.0);
    if (t.wants(bi)) {
      Tensor& gb = t.g(bi);
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        const double* row = gx.data() + static_cast<std::size_t>(c) * HW;
        for (int i = 0; i < HW; ++i) acc += row[i];
        gb[c] += acc;
      }
    }
  });
}

Var Tape::maxpool2d(Var x, int window, int stride) {
  check(x);
  auto argmax = std::make_shared<std::vector<int>>();
  Tensor out = maxpool2d_forward(v(x.id), window, stride, argmax.get());
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi, argmax](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    Tensor& gi = t.g(xi);
    for (int i = 0; i < gx.size(); ++i) gi[(*argmax)[static_cast<std::size_t>(i)]] += gx[i];
  });
}

Var Tape::dense(Var x, Var weights, Var bias) {
  check(x);
  check(weights);
  check(bias);
  Tensor out = dense_forward(v(x.id), v(weights.id), v(bias.id));
  const int xi = x.id, wi = weights.id, bi = bias.id;
  return emit(std::move(out), wants(xi) || wants(wi) || wants(bi), [xi, wi, bi](Tape& t, int self) {
    const Tensor& gy = t.g(self);
    const Tensor& w = t.v(wi);
    const Tensor& xv = t.v(xi);
    const int m = w.dim(0), n = w.dim(1);
    if (t.wants(xi)) {
      Tensor& gi = t.g(xi);
      for (int i = 0; i < m; ++i) {
        const double gyi = gy[i];
        if (gyi == 0.0) continue;
        const double* row = w.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) gi[j] += gyi * row[j];
      }
    }
    if (t.wants(wi)) {
      Tensor& gw = t.g(wi);
      for (int i = 0; i < m; ++i) {
        const double gyi = gy[i];
        if (gyi == 0.0) continue;
        double* row = gw.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) row[j] += gyi * xv[j];
      }
    }
    if (t.wants(bi)) t.g(bi).add_scaled(gy, 1.0);
  });
}

Var Tape::upsample2(Var x) {
  check(x);
  Tensor out = upsample2_forward(v(x.id));
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    Tensor& gi = t.g(xi);
    const int C = gi.dim(0), H = gi.dim(1), W = gi.dim(2);
    for (int c = 0; c < C; ++c) {
      for (int y = 0; y < H; ++y) {
        for (int xx = 0; xx < W; ++xx) {
          gi.at(c, y, xx) += gx.at(c, 2 * y, 2 * xx) + gx.at(c, 2 * y, 2 * xx + 1) +
                             gx.at(c, 2 * y + 1, 2 * xx) + gx.at(c, 2 * y + 1, 2 * xx + 1);
        }
      }
    }
  });
}

Var Tape::squeeze2(Var x) {
  check(x);
  Tensor out = squeeze2_forward(v(x.id));
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    // inverse rearrangement of the gradient
    const Tensor gback = unsqueeze2_forward(t.g(self));
    t.g(xi).add_scaled(gback, 1.0);
  });
}

Var Tape::unsqueeze2(Var x) {
  check(x);
  Tensor out = unsqueeze2_forward(v(x.id));
  const int xi = x.id;
  return emit(std::move(out), wants(xi), [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor gback = squeeze2_forward(t.g(self));
    t.g(xi).add_scaled(gback, 1.0);
  });
}

std::pair<Var, Var> Tape::split_channels(Var x, int c_front) {
  check(x);
  Tensor front, back;
  split_channels_forward(v(x.id), c_front, &front, &back);
  const int xi = x.id;
  const bool ng = wants(xi);
  Var f = emit(std::move(front), ng, [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    Tensor& gi = t.g(xi);
    for (int i = 0; i < gx.size(); ++i) gi[i] += gx[i];
  });
  Var b = emit(std::move(back), ng, [xi](Tape& t, int self) {
    if (!t.wants(xi)) return;
    const Tensor& gx = t.g(self);
    Tensor& gi = t.g(xi);
    const int offset = gi.size() - gx.size();
    for (int i = 0; i < gx.size(); ++i) gi[offset + i] += gx[i];
  });
  return {f, b};
}

Var Tape::concat_channels(Var a, Var b) {
  check(a);
  check(b);
  Tensor out = concat_channels_forward(v(a.id), v(b.id));
  const int ai = a.id, bi = b.id, na = v(a.id).size();
  return emit(std::move(out), wants(ai) || wants(bi), [ai, bi, na](Tape& t, int self) {
    const Tensor& gx = t.g(self);
    if (t.wants(ai)) {
      Tensor& ga = t.g(ai);
      for (int i = 0; i < na; ++i) ga[i] += gx[i];
    }
    if (t.wants(bi)) {
      Tensor& gb = t.g(bi);
      for (int i = 0; i < gx.size() - na; ++i) gb[i] += gx[na + i];
    }
  });
}

Var Tape::actnorm(Var x, Var log_scale, Var bias) {
  check(x);
  check(log_scale);
  check(bias);
  const Tensor& xv = v(x.id);
  if (xv.rank() != 3) throw UsageError("actnorm expects (C,H,W), got " + xv.shape_str());
  const int C = xv.dim(0), HW = xv.dim(1) * xv.dim(2);
  if (v(log_scale.id).size() != C || v(bias.id).size() != C) {
    throw UsageError("actnorm per-channel parameter length mismatch for " + xv.shape_str());
  }
  Tensor out = xv;
  const Tensor& ls = v(log_scale.id);
  const Tensor& b = v(bias.id);
  for (int c = 0; c < C; ++c) {
    const double s = std::exp(ls[c]);
    const double bc = b[c];
    double* row = out.data() + static_cast<std::size_t>(c) * HW;
    for (int i = 0; i < HW; ++i) row[i] = s * (row[i] + bc);
  }
  const int xi = x.id, li = log_scale.id, bi = bias.id;
  return emit(std::move(out), wants(xi) || wants(li) || wants(bi), [xi, li, bi](Tape& t, int self) {
    const Tensor& gy = t.g(self);
    const Tensor& y = t.v(self);
    const Tensor& ls2 = t.v(li);
    const int C2 = y.dim(0), HW2 = y.dim(1) * y.dim(2);
    for (int c = 0; c < C2; ++c) {
      const double s = std::exp(ls2[c]);
      const double* gyr = gy.data() + static_cast<std::size_t>(c) * HW2;
      const double* yr = y.data() + static_cast<std::size_t>(c) * HW2;
      if (t.wants(xi)) {
        double* gxr = t.g(xi).data() + static_cast<std::size_t>(c) * HW2;
        for (int i = 0; i < HW2; ++i) gxr[i] += gyr[i] * s;
      }
      if (t.wants(li)) {
        double acc = 0.0;
        for (int i = 0; i < HW2; ++i) acc += gyr[i] * yr[i];  // dy/dls = y
        t.g(li)[c] += acc;
      }
      if (t.wants(bi)) {
        double acc = 0.0;
        for (int i = 0; i < HW2; ++i) acc += gyr[i];
        t.g(bi)[c] += acc * s;
      }
    }
  });
}

Var Tape::channel_mix(Var x, Var w) {
  check(x);
  check(w);
  const Tensor& xv = v(x.id);
  const Tensor& wv = v(w.id);
  if (xv.rank() != 3) throw UsageError("channel_mix expects (C,H,W), got " + xv.shape_str());
  const int C = xv.dim(0), H = xv.dim(1), W = xv.dim(2);
  if (wv.rank() != 2 || wv.dim(0) != C || wv.dim(1) != C) {
    throw UsageError("channel_mix needs a (C,C) matrix for input " + xv.shape_str() + ", got " +
                     wv.shape_str());
  }
  Tensor out({C, H, W});
  const int HW = H * W;
  for (int i = 0; i < C; ++i) {
    double* orow = out.data() + static_cast<std::size_t>(i) * HW;
    for (int j = 0; j < C; ++j) {
      const double wij = wv[i * C + j];
      if (wij == 0.0) continue;
      const double* xrow = xv.data() + static_cast<std::size_t>(j) * HW;
      for (int p = 0; p < HW; ++p) orow[p] += wij * xrow[p];
    }
  }
  const int xi = x.id, wi = w.id;
  return emit(std::move(out), wants(xi) || wants(wi), [xi, wi](Tape& t, int self) {
    const Tensor& gy = t.g(self);
    const Tensor& xv2 = t.v(xi);
    const Tensor& wv2 = t.v(wi);
    const int C2 = xv2.dim(0), HW2 = xv2.dim(1) * xv2.dim(2);
    if (t.wants(xi)) {
      Tensor& gx = t.g(xi);
      for (int j = 0; j < C2; ++j) {
        double* gxr = gx.data() + static_cast<std::size_t>(j) * HW2;
        for (int i = 0; i < C2; ++i) {
          const double wij = wv2[i * C2 + j];
          if (wij == 0.0) continue;
          const double* gyr = gy.data() + static_cast<std::size_t>(i) * HW2;
          for (int p = 0; p < HW2; ++p) gxr[p] += wij * gyr[p];
        }
      }
    }
    if (t.wants(wi)) {
      Tensor& gw = t.g(wi);
      for (int i = 0; i < C2; ++i) {
        const double* gyr = gy.data() + static_cast<std::size_t>(i) * HW2;
        for (int j = 0; j < C2; ++j) {
          const double* xr = xv2.data() + static_cast<std::size_t>(j) * HW2;
          double acc = 0.0;
          for (int p = 0; p < HW2; ++p) acc += gyr[p] * xr[p];
          gw[i * C2 + j] += acc;
        }
      }
    }
  });
}

Var Tape::log_abs_det(Var w) {
  check(w);
  const Tensor& wv = v(w.id);
  if (wv.rank() != 2 || wv.dim(0) != wv.dim(1)) {
    throw UsageError("log_abs_det expects a square matrix, got " + wv.shape_str());
  }
  const int n = wv.dim(0);
  LU lu(wv.vec(), n);
  if (lu.min_pivot_abs() < 1e-12 || std::fabs(lu.det()) < 1e-12) {
    throw NumericError("channel mixing matrix is numerically singular (|det| < 1e-12)");
  }
  const double ld = lu.log_abs_det();
  // d log|det W| / dW = (W^{-1})^T, captured at forward time
  auto inv = std::make_shared<std::vector<double>>(lu.inverse());
  const int wi = w.id;
  return emit(Tensor::scalar(ld), wants(wi), [wi, inv, n](Tape& t, int self) {
    if (!t.wants(wi)) return;
    const double gs = t.g(self)[0];
    Tensor& gw = t.g(wi);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        gw[i * n + j] += gs * (*inv)[static_cast<std::size_t>(j) * n + i];
      }
    }
  });
}

Var Tape::softmax_cross_entropy(Var logits, const Tensor& onehot) {
  check(logits);
  const Tensor& lv = v(logits.id);
  if (lv.empty()) throw UsageError("softmax_cross_entropy on empty logits");
  if (lv.size() != onehot.size()) {
    throw UsageError("softmax_cross_entropy: logits length " + std::to_string(lv.size()) +
                     " vs labels length " + std::to_string(onehot.size()));
  }
  auto p = std::make_shared<Tensor>(softmax(lv));
  double loss = 0.0;
  for (int i = 0; i < lv.size(); ++i) {
    if (onehot[i] != 0.0) loss -= onehot[i] * std::log(std::max((*p)[i], 1e-300));
  }
  const int li = logits.id;
  auto target = std::make_shared<Tensor>(onehot);
  return emit(Tensor::scalar(loss), wants(li), [li, p, target](Tape& t, int self) {
    if (!t.wants(li)) return;
    const double gs = t.g(self)[0];
    Tensor& gl = t.g(li);
    for (int i = 0; i < gl.size(); ++i) gl[i] += gs * ((*p)[i] - (*target)[i]);
  });
}

Var Tape::mse_loss(Var pred, const Tensor& target) {
  check(pred);
  const Tensor& pv = v(pred.id);
  if (pv.empty()) throw UsageError("mse_loss on empty input");
  if (pv.size() != target.size()) {
    throw UsageError("mse_loss size mismatch: " + std::to_string(pv.size()) + " vs " +
                     std::to_string(target.size()));
  }
  double loss = 0.0;
  for (int i = 0; i < pv.size(); ++i) {
    const double d = pv[i] - target[i];
    loss += d * d;
  }
  loss /= pv.size();
  const int pi = pred.id;
  auto tgt = std::make_shared<Tensor>(target);
  return emit(Tensor::scalar(loss), wants(pi), [pi, tgt](Tape& t, int self) {
    if (!t.wants(pi)) return;
    const double gs = t.g(self)[0];
    const Tensor& pv2 = t.v(pi);
    Tensor& gp = t.g(pi);
    const double c = 2.0 / pv2.size();
    for (int i = 0; i < pv2.size(); ++i) gp[i] += gs * c * (pv2[i] - (*tgt)[i]);
  });
}

Var Tape::l1_loss(Var pred, const Tensor& target) {
  check(pred);
  const Tensor& pv = v(pred.id);
  if (pv.empty()) throw UsageError("l1_loss on empty input");
  if (pv.size() != target.size()) {
    throw UsageError("l1_loss size mismatch: " + std::to_string(pv.size()) + " vs " +
                     std::to_string(target.size()));
  }
  double loss = 0.0;
  for (int i = 0; i < pv.size(); ++i) loss += std::fabs(pv[i] - target[i]);
  loss /= pv.size();
  const int pi = pred.id;
  auto tgt = std::make_shared<Tensor>(target);
  return emit(Tensor::scalar(loss), wants(pi), [pi, tgt](Tape& t, int self) {
    if (!t.wants(pi)) return;
    const double gs = t.g(self)[0];
    const Tensor& pv2 = t.v(pi);
    Tensor& gp = t.g(pi);
    const double c = 1.0 / pv2.size();
    for (int i = 0; i < pv2.size(); ++i) {
      const double d = pv2[i] - (*tgt)[i];
      gp[i] += gs * c * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
    }
  });
}

Var Tape::bce_with_logits(Var logits, const Tensor& target) {
  check(logits);
  const Tensor& lv = v(logits.id);
  if (lv.empty()) throw UsageError("bce_with_logits on empty input");
  if (lv.size() != target.size()) {
    throw UsageError("bce_with_logits size mismatch: " + std::to_string(lv.size()) + " vs " +
                     std::to_string(target.size()));
  }
  double loss = 0.0;
  for (int i = 0; i < lv.size(); ++i) {
    const double x = lv[i], t = target[i];
    loss += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::fabs(x)));
  }
  loss /= lv.size();
  const int li = logits.id;
  auto tgt = std::make_shared<Tensor>(target);
  return emit(Tensor::scalar(loss), wants(li), [li, tgt](Tape& t, int self) {
    if (!t.wants(li)) return;
    const double gs = t.g(self)[0];
    const Tensor& lv2 = t.v(li);
    Tensor& gl = t.g(li);
    const double c = 1.0 / lv2.size();
    for (int i = 0; i < lv2.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-lv2[i]));
      gl[i] += gs * c * (s - (*tgt)[i]);
    }
  });
}

const Tensor& Tape::value(Var var) const {
  check(var);
  return nodes_[static_cast<std::size_t>(var.id)].value;
}

const Tensor& Tape::grad(Var var) const {
  check(var);
  const Node& n = nodes_[static_cast<std::size_t>(var.id)];
  if (n.grad.empty()) throw UsageError("gradient not computed; call backward() first");
  return n.grad;
}

void Tape::backward(Var loss) {
  check(loss);
  if (v(loss.id).size() != 1) {
    throw UsageError("backward requires a scalar loss, got shape " + v(loss.id).shape_str());
  }
  for (auto& n : nodes_) {
    n.grad = Tensor(n.value.shape());  // zeros; unreachable params stay zero
  }
  nodes_[static_cast<std::size_t>(loss.id)].grad[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backprop && n.needs_grad) n.backprop(*this, i);
  }
}

}  // namespace mforge
