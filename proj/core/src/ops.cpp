#include "mforge/ops.hpp"

#include <algorithm>
#include <cmath>

#include "mforge/errors.hpp"

namespace mforge {

namespace {

void require_rank3(const Tensor& t, const char* what) {
  if (t.rank() != 3) {
    throw UsageError(std::string(what) + " expects a (C,H,W) tensor, got shape " + t.shape_str());
  }
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, int stride, int padding) {
  require_rank3(input, "conv2d");
  if (kernels.rank() != 4) {
    throw UsageError("conv2d kernels must be (K,C,kh,kw), got shape " + kernels.shape_str());
  }
  if (stride <= 0) throw UsageError("conv2d stride must be positive");
  if (padding < 0) throw UsageError("conv2d padding must be non-negative");
  const int C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const int K = kernels.dim(0), KC = kernels.dim(1), kh = kernels.dim(2), kw = kernels.dim(3);
  if (KC != C) {
    throw UsageError("conv2d channel mismatch: input " + input.shape_str() + " vs kernels " +
                     kernels.shape_str());
  }
  if (kh > H + 2 * padding || kw > W + 2 * padding) {
    throw UsageError("conv2d kernel " + kernels.shape_str() + " larger than padded input " +
                     input.shape_str() + " with padding " + std::to_string(padding));
  }
  if ((H + 2 * padding - kh) % stride != 0 || (W + 2 * padding - kw) % stride != 0) {
    throw UsageError("conv2d non-exact output size for input " + input.shape_str() + ", kernel " +
                     kernels.shape_str() + ", stride " + std::to_string(stride) + ", padding " +
                     std::to_string(padding));
  }
  const int OH = (H + 2 * padding - kh) / stride + 1;
  const int OW = (W + 2 * padding - kw) / stride + 1;

  Tensor out({K, OH, OW});
  const double* in = input.data();
  const double* ker = kernels.data();
  double* o = out.data();
  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < C; ++c) {
      const double* inc = in + static_cast<std::size_t>(c) * H * W;
      const double* kerkc = ker + (static_cast<std::size_t>(k) * C + c) * kh * kw;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const double kv = kerkc[ky * kw + kx];
          if (kv == 0.0) continue;
          for (int oy = 0; oy < OH; ++oy) {
            const int iy = oy * stride - padding + ky;
            if (iy < 0 || iy >= H) continue;
            const double* inrow = inc + static_cast<std::size_t>(iy) * W;
            double* orow = o + (static_cast<std::size_t>(k) * OH + oy) * OW;
            for (int ox = 0; ox < OW; ++ox) {
              const int ix = ox * stride - padding + kx;
              if (ix < 0 || ix >= W) continue;
              orow[ox] += kv * inrow[ix];
            }
          }
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& kernels, int stride, int padding,
                     const Tensor& grad_out, Tensor* grad_input, Tensor* grad_kernels) {
  const int C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const int K = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
  const int OH = grad_out.dim(1), OW = grad_out.dim(2);
  const double* in = input.data();
  const double* ker = kernels.data();
  const double* go = grad_out.data();

  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < C; ++c) {
      const double* inc = in + static_cast<std::size_t>(c) * H * W;
      const std::size_t kbase = (static_cast<std::size_t>(k) * C + c) * kh * kw;
      for (int ky = 0; ky < kh; ++ky) {
        for (int kx = 0; kx < kw; ++kx) {
          const double kv = ker[kbase + ky * kw + kx];
          double kacc = 0.0;
          for (int oy = 0; oy < OH; ++oy) {
            const int iy = oy * stride - padding + ky;
            if (iy < 0 || iy >= H) continue;
            const double* inrow = inc + static_cast<std::size_t>(iy) * W;
            const double* gorow = go + (static_cast<std::size_t>(k) * OH + oy) * OW;
            double* girow = grad_input
                                ? grad_input->data() + (static_cast<std::size_t>(c) * H + iy) * W
                                : nullptr;
            for (int ox = 0; ox < OW; ++ox) {
              const int ix = ox * stride - padding + kx;
              if (ix < 0 || ix >= W) continue;
              const double g = gorow[ox];
              kacc += g * inrow[ix];
              if (girow) girow[ix] += g * kv;
            }
          }
          if (grad_kernels) (*grad_kernels)[static_cast<int>(kbase) + ky * kw + kx] += kacc;
        }
      }
    }
  }
}

Tensor maxpool2d_forward(const Tensor& input, int window, int stride, std::vector<int>* argmax) {
  require_rank3(input, "maxpool2d");
  if (window <= 0 || stride <= 0) throw UsageError("maxpool2d window/stride must be positive");
  const int C = input.dim(0), H = input.dim(1), W = input.dim(2);
  if (window > H || window > W) {
    throw UsageError("maxpool2d window " + std::to_string(window) + " exceeds spatial dims of " +
                     input.shape_str());
  }
  if ((H - window) % stride != 0 || (W - window) % stride != 0) {
    throw UsageError("maxpool2d non-exact output size for input " + input.shape_str() +
                     ", window " + std::to_string(window) + ", stride " + std::to_string(stride));
  }
  const int OH = (H - window) / stride + 1;
  const int OW = (W - window) / stride + 1;
  Tensor out({C, OH, OW});
  if (argmax) argmax->assign(static_cast<std::size_t>(C) * OH * OW, 0);
  for (int c = 0; c < C; ++c) {
    for (int oy = 0; oy < OH; ++oy) {
      for (int ox = 0; ox < OW; ++ox) {
        int best_idx = -1;
        double best = 0.0;
        for (int wy = 0; wy < window; ++wy) {
          for (int wx = 0; wx < window; ++wx) {
            const int iy = oy * stride + wy;
            const int ix = ox * stride + wx;
            const int idx = (c * H + iy) * W + ix;
            const double v = input[idx];
            // strict > keeps the lowest linear index on ties
            if (best_idx < 0 || v > best) {
              best = v;
              best_idx = idx;
            }
          }
        }
        out.at(c, oy, ox) = best;
        if (argmax) (*argmax)[static_cast<std::size_t>((c * OH + oy) * OW + ox)] = best_idx;
      }
    }
  }
  return out;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2) {
    throw UsageError("dense weights must be rank-2, got " + weights.shape_str());
  }
  const int m = weights.dim(0), n = weights.dim(1);
  if (input.size() != n || bias.size() != m) {
    throw UsageError("dense dimension mismatch: weights " + weights.shape_str() + ", input length " +
                     std::to_string(input.size()) + ", bias length " + std::to_string(bias.size()));
  }
  Tensor out({m});
  const double* w = weights.data();
  const double* x = input.data();
  for (int i = 0; i < m; ++i) {
    double acc = bias[i];
    const double* row = w + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
  return out;
}

Tensor relu_forward(const Tensor& x) {
  if (x.empty()) throw UsageError("relu on empty input");
  Tensor out = x;
  for (double& v : out.vec()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor leaky_relu_forward(const Tensor& x, double slope) {
  if (x.empty()) throw UsageError("leaky_relu on empty input");
  Tensor out = x;
  for (double& v : out.vec()) v = v > 0.0 ? v : slope * v;
  return out;
}

Tensor sigmoid_forward(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.vec()) v = 1.0 / (1.0 + std::exp(-v));
  return out;
}

Tensor tanh_forward(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.vec()) v = std::tanh(v);
  return out;
}

Tensor softmax(const Tensor& logits) {
  if (logits.empty()) throw UsageError("softmax on empty input");
  Tensor out = logits;
  double mx = out[0];
  for (double v : out.vec()) mx = std::max(mx, v);
  double sum = 0.0;
  for (double& v : out.vec()) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : out.vec()) v /= sum;
  return out;
}

Tensor bias_channels_forward(const Tensor& x, const Tensor& bias) {
  require_rank3(x, "bias_channels");
  if (bias.size() != x.dim(0)) {
    throw UsageError("bias_channels needs one bias per channel: " + x.shape_str() + " vs bias length " +
                     std::to_string(bias.size()));
  }
  Tensor out = x;
  const int C = x.dim(0), HW = x.dim(1) * x.dim(2);
  for (int c = 0; c < C; ++c) {
    const double b = bias[c];
    double* row = out.data() + static_cast<std::size_t>(c) * HW;
    for (int i = 0; i < HW; ++i) row[i] += b;
  }
  return out;
}

Tensor squeeze2_forward(const Tensor& x) {
  require_rank3(x, "squeeze2");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  if (H % 2 != 0 || W % 2 != 0) {
    throw UsageError("squeeze2 requires even spatial dims, got " + x.shape_str());
  }
  Tensor out({4 * C, H / 2, W / 2});
  for (int c = 0; c < C; ++c) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        const int oc = 4 * c + 2 * dy + dx;
        for (int y = 0; y < H / 2; ++y) {
          for (int xx = 0; xx < W / 2; ++xx) {
            out.at(oc, y, xx) = x.at(c, 2 * y + dy, 2 * xx + dx);
          }
        }
      }
    }
  }
  return out;
}

Tensor unsqueeze2_forward(const Tensor& x) {
  require_rank3(x, "unsqueeze2");
  const int C4 = x.dim(0), H = x.dim(1), W = x.dim(2);
  if (C4 % 4 != 0) {
    throw UsageError("unsqueeze2 requires channel count divisible by 4, got " + x.shape_str());
  }
  Tensor out({C4 / 4, 2 * H, 2 * W});
  for (int c = 0; c < C4 / 4; ++c) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        const int ic = 4 * c + 2 * dy + dx;
        for (int y = 0; y < H; ++y) {
          for (int xx = 0; xx < W; ++xx) {
            out.at(c, 2 * y + dy, 2 * xx + dx) = x.at(ic, y, xx);
          }
        }
      }
    }
  }
  return out;
}

Tensor upsample2_forward(const Tensor& x) {
  require_rank3(x, "upsample2");
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  Tensor out({C, 2 * H, 2 * W});
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      for (int xx = 0; xx < W; ++xx) {
        const double v = x.at(c, y, xx);
        out.at(c, 2 * y, 2 * xx) = v;
        out.at(c, 2 * y, 2 * xx + 1) = v;
        out.at(c, 2 * y + 1, 2 * xx) = v;
        out.at(c, 2 * y + 1, 2 * xx + 1) = v;
      }
    }
  }
  return out;
}

Tensor concat_channels_forward(const Tensor& a, const Tensor& b) {
  require_rank3(a, "concat_channels");
  require_rank3(b, "concat_channels");
  if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw UsageError("concat_channels spatial mismatch: " + a.shape_str() + " vs " + b.shape_str());
  }
  Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::copy(a.vec().begin(), a.vec().end(), out.vec().begin());
  std::copy(b.vec().begin(), b.vec().end(), out.vec().begin() + a.size());
  return out;
}

void split_channels_forward(const Tensor& x, int c_front, Tensor* front, Tensor* back) {
  require_rank3(x, "split_channels");
  const int C = x.dim(0);
  if (c_front <= 0 || c_front >= C) {
    throw UsageError("split_channels front count " + std::to_string(c_front) +
                     " out of range for " + x.shape_str());
  }
  *front = Tensor({c_front, x.dim(1), x.dim(2)});
  *back = Tensor({C - c_front, x.dim(1), x.dim(2)});
  std::copy(x.vec().begin(), x.vec().begin() + front->size(), front->vec().begin());
  std::copy(x.vec().begin() + front->size(), x.vec().end(), back->vec().begin());
}

}  // namespace mforge
