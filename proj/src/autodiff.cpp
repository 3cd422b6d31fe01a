// Copyright 2026 The bridgesr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bridgesr/autodiff.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "bridgesr/stft.hpp"

namespace bridgesr {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Source index of every (tap, output) pair for a same-padded strided conv, or
// -1 for zero padding.
std::vector<long> conv_index_map(int t_in, int t_out, int kernel, int stride, int dilation, PadMode pad) {
  const int pad_left = ((kernel - 1) * dilation) / 2;
  std::vector<long> idx(static_cast<std::size_t>(kernel) * t_out);
  for (int k = 0; k < kernel; ++k) {
    for (int o = 0; o < t_out; ++o) {
      const long s = static_cast<long>(o) * stride + static_cast<long>(k) * dilation - pad_left;
      long src = s;
      if (s < 0 || s >= t_in) {
        src = pad == PadMode::Reflect ? static_cast<long>(reflect_index(s, static_cast<std::size_t>(t_in))) : -1;
      }
      idx[static_cast<std::size_t>(k) * t_out + o] = src;
    }
  }
  return idx;
}

}  // namespace

Tape::Var Tape::push(Tensor value, std::function<void()> backward) {
  nodes_.push_back(Node{std::move(value), Tensor{}, std::move(backward), nullptr});
  return static_cast<Var>(nodes_.size() - 1);
}

Tape::Var Tape::constant(Tensor value) { return push(std::move(value)); }

Tape::Var Tape::param(Parameter& p) {
  const Var v = push(p.value);
  nodes_[v].param = &p;
  return v;
}

void Tape::backward(Var loss) {
  const Tensor& lv = nodes_[loss].value;
  if (lv.size() != 1) throw std::invalid_argument("Tape::backward: loss must be a scalar, got " + lv.shape_string());
  for (auto& n : nodes_) n.grad = Tensor(n.value.b, n.value.c, n.value.t);
  nodes_[loss].grad.data[0] = 1.0;
  for (Var i = loss; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.backward) n.backward();
    if (n.param != nullptr && !n.param->frozen) {
      auto& pg = n.param->grad.data;
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad.data[k];
    }
  }
}

Tape::Var Tape::conv1d(Var x, Var w, Var bias, int stride, int dilation, PadMode pad) {
  const Tensor& X = value(x);
  const Tensor& W = value(w);
  if (X.c != W.c) {
    throw std::invalid_argument("conv1d: input has " + std::to_string(X.c) + " channels, weight expects " +
                                std::to_string(W.c));
  }
  if (stride < 1 || dilation < 1) throw std::invalid_argument("conv1d: stride and dilation must be >= 1");
  const int cin = X.c, cout = W.b, kernel = W.t;
  const int t_out = (X.t + stride - 1) / stride;
  if (bias >= 0 && (value(bias).c != cout || value(bias).size() != static_cast<std::size_t>(cout))) {
    throw std::invalid_argument("conv1d: bias shape " + value(bias).shape_string());
  }
  auto idx = std::make_shared<std::vector<long>>(conv_index_map(X.t, t_out, kernel, stride, dilation, pad));

  auto im2col = [idx, cin, kernel, t_out](const Tensor& in, int bi, RowMat& col) {
    col.resize(static_cast<long>(cin) * kernel, t_out);
    for (int ci = 0; ci < cin; ++ci) {
      const double* src = in.row(bi, ci);
      for (int k = 0; k < kernel; ++k) {
        double* dst = col.data() + (static_cast<std::size_t>(ci) * kernel + k) * t_out;
        const long* map = idx->data() + static_cast<std::size_t>(k) * t_out;
        for (int o = 0; o < t_out; ++o) dst[o] = map[o] >= 0 ? src[map[o]] : 0.0;
      }
    }
  };

  Tensor out(X.b, cout, t_out);
  RowMat col;
  const ConstMapMat wm(W.data.data(), cout, static_cast<long>(cin) * kernel);
  for (int bi = 0; bi < X.b; ++bi) {
    im2col(X, bi, col);
    MapMat om(out.row(bi, 0), cout, t_out);
    om.noalias() = wm * col;
    if (bias >= 0) {
      const auto& bv = value(bias).data;
      for (int co = 0; co < cout; ++co) om.row(co).array() += bv[co];
    }
  }
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, x, w, bias, y, idx, im2col, cin, cout, kernel, t_out]() {
    const Tensor& X = value(x);
    const Tensor& W = value(w);
    const Tensor& G = grad(y);
    Tensor& gx = g(x);
    Tensor& gw = g(w);
    const ConstMapMat wm(W.data.data(), cout, static_cast<long>(cin) * kernel);
    MapMat gwm(gw.data.data(), cout, static_cast<long>(cin) * kernel);
    RowMat col, dcol;
    for (int bi = 0; bi < X.b; ++bi) {
      const ConstMapMat gm(G.row(bi, 0), cout, t_out);
      im2col(X, bi, col);
      gwm.noalias() += gm * col.transpose();
      dcol.noalias() = wm.transpose() * gm;
      for (int ci = 0; ci < cin; ++ci) {
        double* dst = gx.row(bi, ci);
        for (int k = 0; k < kernel; ++k) {
          const double* src = dcol.data() + (static_cast<std::size_t>(ci) * kernel + k) * t_out;
          const long* map = idx->data() + static_cast<std::size_t>(k) * t_out;
          for (int o = 0; o < t_out; ++o) {
            if (map[o] >= 0) dst[map[o]] += src[o];
          }
        }
      }
      if (bias >= 0) {
        Tensor& gb = g(bias);
        for (int co = 0; co < cout; ++co) gb.data[co] += gm.row(co).sum();
      }
    }
  };
  return y;
}

Tape::Var Tape::conv_transpose1d(Var x, Var w, Var bias, int stride) {
  const Tensor& X = value(x);
  const Tensor& W = value(w);  // [Cin, Cout, K]
  if (X.c != W.b) {
    throw std::invalid_argument("conv_transpose1d: input has " + std::to_string(X.c) + " channels, weight expects " +
                                std::to_string(W.b));
  }
  const int cin = W.b, cout = W.c, kernel = W.t;
  if (stride < 1 || kernel < stride || (kernel - stride) % 2 != 0) {
    throw std::invalid_argument("conv_transpose1d: need kernel >= stride with even difference");
  }
  const int pad = (kernel - stride) / 2;
  const int t_in = X.t, t_out = X.t * stride;
  const long rows = static_cast<long>(cout) * kernel;
  Tensor out(X.b, cout, t_out);
  const ConstMapMat wm(W.data.data(), cin, rows);
  RowMat cols;
  for (int bi = 0; bi < X.b; ++bi) {
    const ConstMapMat xm(X.row(bi, 0), cin, t_in);
    cols.noalias() = wm.transpose() * xm;
    for (int co = 0; co < cout; ++co) {
      double* dst = out.row(bi, co);
      for (int k = 0; k < kernel; ++k) {
        const double* src = cols.data() + (static_cast<std::size_t>(co) * kernel + k) * t_in;
        for (int t = 0; t < t_in; ++t) {
          const int o = t * stride + k - pad;
          if (o >= 0 && o < t_out) dst[o] += src[t];
        }
      }
      if (bias >= 0) {
        const double bv = value(bias).data[co];
        for (int o = 0; o < t_out; ++o) dst[o] += bv;
      }
    }
  }
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, x, w, bias, y, cin, cout, kernel, stride, pad, t_in, t_out, rows]() {
    const Tensor& X = value(x);
    const Tensor& W = value(w);
    const Tensor& G = grad(y);
    const ConstMapMat wm(W.data.data(), cin, rows);
    MapMat gwm(g(w).data.data(), cin, rows);
    RowMat dcols(rows, t_in);
    for (int bi = 0; bi < X.b; ++bi) {
      for (int co = 0; co < cout; ++co) {
        const double* src = G.row(bi, co);
        for (int k = 0; k < kernel; ++k) {
          double* dst = dcols.data() + (static_cast<std::size_t>(co) * kernel + k) * t_in;
          for (int t = 0; t < t_in; ++t) {
            const int o = t * stride + k - pad;
            dst[t] = (o >= 0 && o < t_out) ? src[o] : 0.0;
          }
        }
        if (bias >= 0) {
          double s = 0.0;
          for (int o = 0; o < t_out; ++o) s += src[o];
          g(bias).data[co] += s;
        }
      }
      const ConstMapMat xm(X.row(bi, 0), cin, t_in);
      gwm.noalias() += xm * dcols.transpose();
      MapMat gxm(g(x).row(bi, 0), cin, t_in);
      gxm.noalias() += wm * dcols;
    }
  };
  return y;
}

Tape::Var Tape::silu(Var x) {
  const Tensor& X = value(x);
  Tensor out(X.b, X.c, X.t);
  for (std::size_t i = 0; i < X.size(); ++i) out.data[i] = X.data[i] * sigmoid(X.data[i]);
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, x, y]() {
    const auto& xv = value(x).data;
    const auto& gy = grad(y).data;
    auto& gx = g(x).data;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const double s = sigmoid(xv[i]);
      gx[i] += gy[i] * s * (1.0 + xv[i] * (1.0 - s));
    }
  };
  return y;
}

Tape::Var Tape::add(Var a, Var b) {
  check_same_shape(value(a), value(b), "add");
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += value(b).data[i];
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, a, b, y]() {
    const auto& gy = grad(y).data;
    auto& ga = g(a).data;
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
    auto& gb = g(b).data;
    for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i];
  };
  return y;
}

Tape::Var Tape::sub(Var a, Var b) {
  check_same_shape(value(a), value(b), "sub");
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= value(b).data[i];
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, a, b, y]() {
    const auto& gy = grad(y).data;
    auto& ga = g(a).data;
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
    auto& gb = g(b).data;
    for (std::size_t i = 0; i < gy.size(); ++i) gb[i] -= gy[i];
  };
  return y;
}

Tape::Var Tape::mul(Var a, Var b) {
  check_same_shape(value(a), value(b), "mul");
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= value(b).data[i];
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, a, b, y]() {
    const auto& gy = grad(y).data;
    const auto& av = value(a).data;
    const auto& bv = value(b).data;
    auto& ga = g(a).data;
    for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * bv[i];
    auto& gb = g(b).data;
    for (std::size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i] * av[i];
  };
  return y;
}

Tape::Var Tape::scale(Var x, double k) {
  Tensor out = value(x);
  for (auto& v : out.data) v *= k;
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, x, y, k]() {
    const auto& gy = grad(y).data;
    auto& gx = g(x).data;
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += k * gy[i];
  };
  return y;
}

Tape::Var Tape::add_time_broadcast(Var x, Var b) {
  const Tensor& X = value(x);
  const Tensor& B = value(b);
  if (B.b != X.b || B.c != X.c || B.t != 1) {
    throw std::invalid_argument("add_time_broadcast: " + X.shape_string() + " + " + B.shape_string());
  }
  Tensor out = X;
  for (int i = 0; i < X.b; ++i) {
    for (int ch = 0; ch < X.c; ++ch) {
      double* r = out.row(i, ch);
      for (int k = 0; k < X.t; ++k) r[k] += B(i, ch, 0);
    }
  }
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, x, b, y]() {
    const Tensor& G = grad(y);
    auto& gx = g(x).data;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += G.data[i];
    Tensor& gb = g(b);
    for (int i = 0; i < G.b; ++i) {
      for (int ch = 0; ch < G.c; ++ch) {
        const double* r = G.row(i, ch);
        double s = 0.0;
        for (int k = 0; k < G.t; ++k) s += r[k];
        gb(i, ch, 0) += s;
      }
    }
  };
  return y;
}

Tape::Var Tape::concat_channels(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.b != B.b || A.t != B.t) throw std::invalid_argument("concat_channels: " + A.shape_string() + " vs " + B.shape_string());
  Tensor out(A.b, A.c + B.c, A.t);
  for (int i = 0; i < A.b; ++i) {
    for (int ch = 0; ch < A.c; ++ch) std::copy_n(A.row(i, ch), A.t, out.row(i, ch));
    for (int ch = 0; ch < B.c; ++ch) std::copy_n(B.row(i, ch), B.t, out.row(i, A.c + ch));
  }
  const int ca = A.c, cb = B.c;
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, a, b, y, ca, cb]() {
    const Tensor& G = grad(y);
    Tensor& ga = g(a);
    Tensor& gb = g(b);
    for (int i = 0; i < G.b; ++i) {
      for (int ch = 0; ch < ca; ++ch) {
        for (int k = 0; k < G.t; ++k) ga(i, ch, k) += G(i, ch, k);
      }
      for (int ch = 0; ch < cb; ++ch) {
        for (int k = 0; k < G.t; ++k) gb(i, ch, k) += G(i, ca + ch, k);
      }
    }
  };
  return y;
}

Tape::Var Tape::concat_time(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_time: no parts");
  const Tensor& first = value(parts[0]);
  int total = 0;
  for (Var p : parts) {
    const Tensor& v = value(p);
    if (v.b != first.b || v.c != first.c) throw std::invalid_argument("concat_time: inconsistent " + v.shape_string());
    total += v.t;
  }
  Tensor out(first.b, first.c, total);
  int off = 0;
  for (Var p : parts) {
    const Tensor& v = value(p);
    for (int i = 0; i < v.b; ++i) {
      for (int ch = 0; ch < v.c; ++ch) std::copy_n(v.row(i, ch), v.t, out.row(i, ch) + off);
    }
    off += v.t;
  }
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, parts, y]() {
    const Tensor& G = grad(y);
    int off = 0;
    for (Var p : parts) {
      Tensor& gp = g(p);
      for (int i = 0; i < gp.b; ++i) {
        for (int ch = 0; ch < gp.c; ++ch) {
          const double* src = G.row(i, ch) + off;
          double* dst = gp.row(i, ch);
          for (int k = 0; k < gp.t; ++k) dst[k] += src[k];
        }
      }
      off += gp.t;
    }
  };
  return y;
}

Tape::Var Tape::slice_time(Var x, int start, int len) {
  const Var y = push(bridgesr::slice_time(value(x), start, len));
  nodes_[y].backward = [this, x, y, start, len]() {
    const Tensor& G = grad(y);
    Tensor& gx = g(x);
    for (int i = 0; i < G.b; ++i) {
      for (int ch = 0; ch < G.c; ++ch) {
        const double* src = G.row(i, ch);
        double* dst = gx.row(i, ch) + start;
        for (int k = 0; k < len; ++k) dst[k] += src[k];
      }
    }
  };
  return y;
}

Tape::Var Tape::slice_channels(Var x, int start, int len) {
  const Tensor& X = value(x);
  if (start < 0 || len < 0 || start + len > X.c) throw std::out_of_range("slice_channels: range outside tensor");
  Tensor out(X.b, len, X.t);
  for (int i = 0; i < X.b; ++i) {
    for (int ch = 0; ch < len; ++ch) std::copy_n(X.row(i, start + ch), X.t, out.row(i, ch));
  }
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, x, y, start, len]() {
    const Tensor& G = grad(y);
    Tensor& gx = g(x);
    for (int i = 0; i < G.b; ++i) {
      for (int ch = 0; ch < len; ++ch) {
        const double* src = G.row(i, ch);
        double* dst = gx.row(i, start + ch);
        for (int k = 0; k < G.t; ++k) dst[k] += src[k];
      }
    }
  };
  return y;
}

Tape::Var Tape::mean_time(Var x) {
  const Tensor& X = value(x);
  if (X.t == 0) throw std::invalid_argument("mean_time: empty time axis");
  Tensor out(X.b, X.c, 1);
  for (int i = 0; i < X.b; ++i) {
    for (int ch = 0; ch < X.c; ++ch) {
      double s = 0.0;
      for (int k = 0; k < X.t; ++k) s += X(i, ch, k);
      out(i, ch, 0) = s / X.t;
    }
  }
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, x, y]() {
    const Tensor& G = grad(y);
    Tensor& gx = g(x);
    const double inv = 1.0 / gx.t;
    for (int i = 0; i < gx.b; ++i) {
      for (int ch = 0; ch < gx.c; ++ch) {
        double* dst = gx.row(i, ch);
        for (int k = 0; k < gx.t; ++k) dst[k] += G(i, ch, 0) * inv;
      }
    }
  };
  return y;
}

Tape::Var Tape::mse(Var pred, Var target) {
  check_same_shape(value(pred), value(target), "mse");
  const auto& p = value(pred).data;
  const auto& t = value(target).data;
  if (p.empty()) throw std::invalid_argument("mse: empty tensors");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  const Var y = push(Tensor(1, 1, 1, s / static_cast<double>(p.size())));
  nodes_[y].backward = [this, pred, target, y]() {
    const auto& p = value(pred).data;
    const auto& t = value(target).data;
    const double k = 2.0 * grad(y).data[0] / static_cast<double>(p.size());
    auto& gp = g(pred).data;
    auto& gt = g(target).data;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = k * (p[i] - t[i]);
      gp[i] += d;
      gt[i] -= d;
    }
  };
  return y;
}

Tape::Var Tape::reparameterize(Var mu, Var logvar, const Tensor& eps) {
  check_same_shape(value(mu), value(logvar), "reparameterize");
  check_same_shape(value(mu), eps, "reparameterize");
  Tensor out = value(mu);
  const auto& lv = value(logvar).data;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += std::exp(0.5 * lv[i]) * eps.data[i];
  const Var y = push(std::move(out));
  nodes_[y].backward = [this, mu, logvar, eps, y]() {
    const auto& gy = grad(y).data;
    const auto& lv = value(logvar).data;
    auto& gm = g(mu).data;
    auto& gl = g(logvar).data;
    for (std::size_t i = 0; i < gy.size(); ++i) {
      gm[i] += gy[i];
      gl[i] += gy[i] * 0.5 * std::exp(0.5 * lv[i]) * eps.data[i];
    }
  };
  return y;
}

Tape::Var Tape::gaussian_kl(Var mu, Var logvar) {
  check_same_shape(value(mu), value(logvar), "gaussian_kl");
  const auto& m = value(mu).data;
  const auto& lv = value(logvar).data;
  const double batch = value(mu).b;
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += 0.5 * (m[i] * m[i] + std::exp(lv[i]) - 1.0 - lv[i]);
  const Var y = push(Tensor(1, 1, 1, s / batch));
  nodes_[y].backward = [this, mu, logvar, y, batch]() {
    const double k = grad(y).data[0] / batch;
    const auto& m = value(mu).data;
    const auto& lv = value(logvar).data;
    auto& gm = g(mu).data;
    auto& gl = g(logvar).data;
    for (std::size_t i = 0; i < m.size(); ++i) {
      gm[i] += k * m[i];
      gl[i] += k * 0.5 * (std::exp(lv[i]) - 1.0);
    }
  };
  return y;
}

Tape::Var Tape::mrstft(Var est, const Tensor& ref, int sample_rate, const MrStftConfig& cfg) {
  const Tensor& E = value(est);
  check_same_shape(E, ref, "mrstft");
  if (E.c != 1) throw std::invalid_argument("mrstft: expects mono [B,1,T] waveforms");
  auto grads = std::make_shared<std::vector<std::vector<double>>>(E.b);
  double total = 0.0;
  for (int i = 0; i < E.b; ++i) {
    const std::vector<double> r(ref.row(i, 0), ref.row(i, 0) + ref.t);
    const std::vector<double> e(E.row(i, 0), E.row(i, 0) + E.t);
    total += mrstft_loss_and_grad(r, e, sample_rate, cfg, (*grads)[i]);
  }
  const double batch = E.b;
  const Var y = push(Tensor(1, 1, 1, total / batch));
  nodes_[y].backward = [this, est, y, grads, batch]() {
    const double k = grad(y).data[0] / batch;
    Tensor& ge = g(est);
    for (int i = 0; i < ge.b; ++i) {
      double* dst = ge.row(i, 0);
      const auto& src = (*grads)[i];
      for (int n = 0; n < ge.t; ++n) dst[n] += k * src[n];
    }
  };
  return y;
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (auto* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->zero_grad();
}

void Adam::step() {
  for (auto* p : params_) {
    if (!all_finite(p->grad)) throw std::runtime_error("Adam: non-finite gradient in parameter '" + p->name + "'");
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t j = 0; j < params_.size(); ++j) {
    Parameter& p = *params_[j];
    if (p.frozen) continue;
    auto& m = m_[j];
    auto& v = v_[j];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double gi = p.grad.data[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
      const double mh = m[i] / bc1;
      const double vh = v[i] / bc2;
      p.value.data[i] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
    }
  }
}

}  // namespace bridgesr
