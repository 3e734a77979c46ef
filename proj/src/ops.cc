// Copyright 2026 The AugCondD Authors
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
#include "augcondd/ops.h"

#include <cmath>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "augcondd/errors.h"

namespace augcondd::nn {
namespace {

using MatRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using ConstMapRM = Eigen::Map<const MatRM>;

void require_rank(const Var& v, std::size_t rank, const char* what) {
  if (v.value().rank() != rank) {
    throw InvalidInputError(std::string(what) + ": expected rank " +
                            std::to_string(rank) + ", got " +
                            shape_string(v.shape()));
  }
}

bool needs(const Var& v) { return v.valid() && v.requires_grad(); }

}  // namespace

Var conv1d(const Var& x, const Var& weight, const Var& bias, ConvSpec spec) {
  require_rank(x, 3, "conv1d input");
  require_rank(weight, 3, "conv1d weight");
  Tape* tape = x.tape();
  const std::size_t batch = x.shape()[0], cin = x.shape()[1], len = x.shape()[2];
  const std::size_t cout = weight.shape()[0], kernel = weight.shape()[2];
  if (weight.shape()[1] != cin) {
    throw ConfigError("conv1d channel mismatch: input " + shape_string(x.shape()) +
                      ", weight " + shape_string(weight.shape()));
  }
  const long span = static_cast<long>(spec.dilation) * (kernel - 1) + 1;
  const long padded = static_cast<long>(len) + 2L * spec.padding;
  if (padded < span) {
    throw InvalidInputError("conv1d input too short: " + shape_string(x.shape()));
  }
  const std::size_t out_len = (padded - span) / spec.stride + 1;
  const std::size_t rows = cin * kernel, cols = batch * out_len;

  auto col = std::make_shared<MatRM>(MatRM::Zero(rows, cols));
  const Tensor& xv = x.value();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < cin; ++c) {
      const double* xrow = xv.data() + (b * cin + c) * len;
      for (std::size_t k = 0; k < kernel; ++k) {
        double* crow = col->data() + (c * kernel + k) * cols + b * out_len;
        const long shift = static_cast<long>(k) * spec.dilation - spec.padding;
        for (std::size_t t = 0; t < out_len; ++t) {
          const long src = static_cast<long>(t) * spec.stride + shift;
          if (src >= 0 && src < static_cast<long>(len)) crow[t] = xrow[src];
        }
      }
    }
  }
  ConstMapRM w(weight.value().data(), cout, rows);
  MatRM result = w * (*col);
  Tensor out({batch, cout, out_len});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < cout; ++c) {
      const double add = bias.valid() ? bias.value()[c] : 0.0;
      const double* src = result.data() + c * cols + b * out_len;
      double* dst = out.data() + (b * cout + c) * out_len;
      for (std::size_t t = 0; t < out_len; ++t) dst[t] = src[t] + add;
    }
  }
  const bool rg = needs(x) || needs(weight) || needs(bias);
  Var result_var;
  result_var = tape->record(
      std::move(out), rg,
      [tape, x, weight, bias, spec, col, batch, cin, len, cout, kernel, out_len,
       rows, cols, id = static_cast<int>(tape->size())]() {
        const Tensor& gout = tape->grad(id);
        MatRM dr(cout, cols);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t c = 0; c < cout; ++c) {
            const double* src = gout.data() + (b * cout + c) * out_len;
            std::copy(src, src + out_len, dr.data() + c * cols + b * out_len);
          }
        }
        if (Tensor* gw = tape->accumulate(weight.id())) {
          MapRM(gw->data(), cout, rows).noalias() += dr * col->transpose();
        }
        if (bias.valid()) {
          if (Tensor* gb = tape->accumulate(bias.id())) {
            for (std::size_t c = 0; c < cout; ++c) (*gb)[c] += dr.row(c).sum();
          }
        }
        if (Tensor* gx = tape->accumulate(x.id())) {
          ConstMapRM w(weight.value().data(), cout, rows);
          MatRM dcol = w.transpose() * dr;
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t c = 0; c < cin; ++c) {
              double* xrow = gx->data() + (b * cin + c) * len;
              for (std::size_t k = 0; k < kernel; ++k) {
                const double* crow = dcol.data() + (c * kernel + k) * cols + b * out_len;
                const long shift = static_cast<long>(k) * spec.dilation - spec.padding;
                for (std::size_t t = 0; t < out_len; ++t) {
                  const long src = static_cast<long>(t) * spec.stride + shift;
                  if (src >= 0 && src < static_cast<long>(len)) xrow[src] += crow[t];
                }
              }
            }
          }
        }
      });
  return result_var;
}

Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias,
                     int stride, int padding) {
  require_rank(x, 3, "conv_transpose1d input");
  require_rank(weight, 3, "conv_transpose1d weight");
  Tape* tape = x.tape();
  const std::size_t batch = x.shape()[0], cin = x.shape()[1], len = x.shape()[2];
  const std::size_t cout = weight.shape()[1], kernel = weight.shape()[2];
  if (weight.shape()[0] != cin) {
    throw ConfigError("conv_transpose1d channel mismatch: input " +
                      shape_string(x.shape()) + ", weight " +
                      shape_string(weight.shape()));
  }
  const long out_signed = (static_cast<long>(len) - 1) * stride - 2L * padding +
                          static_cast<long>(kernel);
  if (out_signed < 1) throw InvalidInputError("conv_transpose1d output empty");
  const std::size_t out_len = static_cast<std::size_t>(out_signed);
  const std::size_t cols = batch * len, rows = cout * kernel;

  auto xc = std::make_shared<MatRM>(cin, cols);
  const Tensor& xv = x.value();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < cin; ++c) {
      const double* src = xv.data() + (b * cin + c) * len;
      std::copy(src, src + len, xc->data() + c * cols + b * len);
    }
  }
  ConstMapRM w(weight.value().data(), cin, rows);
  MatRM col = w.transpose() * (*xc);
  Tensor out({batch, cout, out_len});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < cout; ++c) {
      double* dst = out.data() + (b * cout + c) * out_len;
      if (bias.valid()) std::fill(dst, dst + out_len, bias.value()[c]);
      for (std::size_t k = 0; k < kernel; ++k) {
        const double* crow = col.data() + (c * kernel + k) * cols + b * len;
        for (std::size_t t = 0; t < len; ++t) {
          const long pos = static_cast<long>(t) * stride + static_cast<long>(k) - padding;
          if (pos >= 0 && pos < out_signed) dst[pos] += crow[t];
        }
      }
    }
  }
  const bool rg = needs(x) || needs(weight) || needs(bias);
  return tape->record(
      std::move(out), rg,
      [tape, x, weight, bias, stride, padding, xc, batch, cin, len, cout, kernel,
       out_len, rows, cols, id = static_cast<int>(tape->size())]() {
        const Tensor& gout = tape->grad(id);
        MatRM dcol = MatRM::Zero(rows, cols);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t c = 0; c < cout; ++c) {
            const double* g = gout.data() + (b * cout + c) * out_len;
            for (std::size_t k = 0; k < kernel; ++k) {
              double* crow = dcol.data() + (c * kernel + k) * cols + b * len;
              for (std::size_t t = 0; t < len; ++t) {
                const long pos = static_cast<long>(t) * stride + static_cast<long>(k) - padding;
                if (pos >= 0 && pos < static_cast<long>(out_len)) crow[t] = g[pos];
              }
            }
          }
        }
        if (Tensor* gw = tape->accumulate(weight.id())) {
          MapRM(gw->data(), cin, rows).noalias() += (*xc) * dcol.transpose();
        }
        if (bias.valid()) {
          if (Tensor* gb = tape->accumulate(bias.id())) {
            for (std::size_t b = 0; b < batch; ++b) {
              for (std::size_t c = 0; c < cout; ++c) {
                const double* g = gout.data() + (b * cout + c) * out_len;
                double s = 0.0;
                for (std::size_t t = 0; t < out_len; ++t) s += g[t];
                (*gb)[c] += s;
              }
            }
          }
        }
        if (Tensor* gx = tape->accumulate(x.id())) {
          ConstMapRM w(weight.value().data(), cin, rows);
          MatRM dxc = w * dcol;
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t c = 0; c < cin; ++c) {
              const double* src = dxc.data() + c * cols + b * len;
              double* dst = gx->data() + (b * cin + c) * len;
              for (std::size_t t = 0; t < len; ++t) dst[t] += src[t];
            }
          }
        }
      });
}

Var leaky_relu(const Var& x, double slope) {
  Tape* tape = x.tape();
  Tensor out = x.value();
  for (double& v : out.storage()) v = v > 0.0 ? v : v * slope;
  return tape->record(std::move(out), needs(x),
                      [tape, x, slope, id = static_cast<int>(tape->size())]() {
                        Tensor* gx = tape->accumulate(x.id());
                        const Tensor& g = tape->grad(id);
                        const Tensor& xv = x.value();
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          (*gx)[i] += xv[i] > 0.0 ? g[i] : g[i] * slope;
                        }
                      });
}

Var tanh(const Var& x) {
  Tape* tape = x.tape();
  Tensor out = x.value();
  for (double& v : out.storage()) v = std::tanh(v);
  return tape->record(std::move(out), needs(x),
                      [tape, x, id = static_cast<int>(tape->size())]() {
                        Tensor* gx = tape->accumulate(x.id());
                        const Tensor& g = tape->grad(id);
                        const Tensor& y = tape->value(id);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          (*gx)[i] += g[i] * (1.0 - y[i] * y[i]);
                        }
                      });
}

Var add(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw InvalidInputError("add shape mismatch: " + shape_string(a.shape()) +
                            " vs " + shape_string(b.shape()));
  }
  Tape* tape = a.tape();
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape->record(std::move(out), needs(a) || needs(b),
                      [tape, a, b, id = static_cast<int>(tape->size())]() {
                        const Tensor& g = tape->grad(id);
                        for (const Var& v : {a, b}) {
                          if (Tensor* gv = tape->accumulate(v.id())) {
                            for (std::size_t i = 0; i < g.size(); ++i) (*gv)[i] += g[i];
                          }
                        }
                      });
}

Var weighted_sum(std::span<const Var> terms, std::span<const double> weights) {
  if (terms.empty() || terms.size() != weights.size()) {
    throw InvalidInputError("weighted_sum needs matching non-empty terms/weights");
  }
  Tape* tape = terms[0].tape();
  double total = 0.0;
  bool rg = false;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].value().size() != 1) {
      throw InvalidInputError("weighted_sum expects scalars");
    }
    total += weights[i] * terms[i].item();
    rg = rg || needs(terms[i]);
  }
  std::vector<Var> ts(terms.begin(), terms.end());
  std::vector<double> ws(weights.begin(), weights.end());
  return tape->record(Tensor({1}, total), rg,
                      [tape, ts, ws, id = static_cast<int>(tape->size())]() {
                        const double g = tape->grad(id)[0];
                        for (std::size_t i = 0; i < ts.size(); ++i) {
                          if (Tensor* gv = tape->accumulate(ts[i].id())) {
                            (*gv)[0] += ws[i] * g;
                          }
                        }
                      });
}

Var scale(const Var& x, double factor) {
  Tape* tape = x.tape();
  Tensor out = x.value();
  for (double& v : out.storage()) v *= factor;
  return tape->record(std::move(out), needs(x),
                      [tape, x, factor, id = static_cast<int>(tape->size())]() {
                        Tensor* gx = tape->accumulate(x.id());
                        const Tensor& g = tape->grad(id);
                        for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += factor * g[i];
                      });
}

Var avg_pool2(const Var& x) {
  require_rank(x, 3, "avg_pool2 input");
  Tape* tape = x.tape();
  const std::size_t batch = x.shape()[0], ch = x.shape()[1], len = x.shape()[2];
  const std::size_t out_len = len / 2;
  if (out_len == 0) throw InvalidInputError("avg_pool2 input too short");
  Tensor out({batch, ch, out_len});
  const Tensor& xv = x.value();
  for (std::size_t r = 0; r < batch * ch; ++r) {
    for (std::size_t t = 0; t < out_len; ++t) {
      out[r * out_len + t] = 0.5 * (xv[r * len + 2 * t] + xv[r * len + 2 * t + 1]);
    }
  }
  return tape->record(std::move(out), needs(x),
                      [tape, x, batch, ch, len, out_len,
                       id = static_cast<int>(tape->size())]() {
                        Tensor* gx = tape->accumulate(x.id());
                        const Tensor& g = tape->grad(id);
                        for (std::size_t r = 0; r < batch * ch; ++r) {
                          for (std::size_t t = 0; t < out_len; ++t) {
                            const double h = 0.5 * g[r * out_len + t];
                            (*gx)[r * len + 2 * t] += h;
                            (*gx)[r * len + 2 * t + 1] += h;
                          }
                        }
                      });
}

Var concat_condition(const Var& x, const Var& mu) {
  require_rank(x, 3, "concat_condition input");
  require_rank(mu, 2, "concat_condition mu");
  Tape* tape = x.tape();
  const std::size_t batch = x.shape()[0], len = x.shape()[2];
  if (x.shape()[1] != 1) throw ConfigError("concat_condition expects mono input");
  if (mu.shape()[0] != batch) {
    throw ConfigError("mu batch " + std::to_string(mu.shape()[0]) +
                      " does not match input batch " + std::to_string(batch));
  }
  const std::size_t d = mu.shape()[1];
  for (double v : mu.value().values()) {
    if (!std::isfinite(v)) throw InvalidInputError("non-finite augmentation state");
  }
  Tensor out({batch, 1 + d, len});
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(x.value().data() + b * len, len, &out.at(b, 0, 0));
    for (std::size_t j = 0; j < d; ++j) {
      std::fill_n(&out.at(b, 1 + j, 0), len, mu.value()[b * d + j]);
    }
  }
  return tape->record(
      std::move(out), needs(x) || needs(mu),
      [tape, x, mu, batch, len, d, id = static_cast<int>(tape->size())]() {
        const Tensor& g = tape->grad(id);
        if (Tensor* gx = tape->accumulate(x.id())) {
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t t = 0; t < len; ++t) (*gx)[b * len + t] += g.at(b, 0, t);
          }
        }
        if (Tensor* gm = tape->accumulate(mu.id())) {
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t j = 0; j < d; ++j) {
              double s = 0.0;
              for (std::size_t t = 0; t < len; ++t) s += g.at(b, 1 + j, t);
              (*gm)[b * d + j] += s;
            }
          }
        }
      });
}

Var log_mel(const Var& x, dsp::MelExtractor& extractor) {
  require_rank(x, 3, "log_mel input");
  if (x.shape()[1] != 1) throw ConfigError("log_mel expects mono input");
  Tape* tape = x.tape();
  const std::size_t batch = x.shape()[0], len = x.shape()[2];
  const std::size_t frames = extractor.config().num_frames(len);
  const std::size_t n_mels = extractor.config().n_mels;
  Tensor out({batch, frames, n_mels});
  const bool rg = needs(x);
  auto caches = std::make_shared<std::vector<dsp::MelExtractor::Cache>>(
      rg ? batch : 0);
  std::vector<double> buf;
  for (std::size_t b = 0; b < batch; ++b) {
    extractor.forward(std::span<const double>(x.value().data() + b * len, len),
                      buf, rg ? &(*caches)[b] : nullptr);
    std::copy(buf.begin(), buf.end(), out.data() + b * frames * n_mels);
  }
  return tape->record(
      std::move(out), rg,
      [tape, x, &extractor, caches, batch, len, frames, n_mels,
       id = static_cast<int>(tape->size())]() {
        Tensor* gx = tape->accumulate(x.id());
        const Tensor& g = tape->grad(id);
        for (std::size_t b = 0; b < batch; ++b) {
          extractor.backward(
              (*caches)[b],
              std::span<const double>(g.data() + b * frames * n_mels, frames * n_mels),
              std::span<double>(gx->data() + b * len, len));
        }
      });
}

Var mix_batch(const Var& x, std::span<const std::size_t> partner,
              std::span<const double> m) {
  require_rank(x, 3, "mix_batch input");
  Tape* tape = x.tape();
  const std::size_t batch = x.shape()[0];
  const std::size_t row = x.shape()[1] * x.shape()[2];
  if (partner.size() != batch || m.size() != batch) {
    throw InvalidInputError("mix_batch parameter count does not match batch");
  }
  Tensor out(x.shape());
  const Tensor& xv = x.value();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* a = xv.data() + b * row;
    const double* p = xv.data() + partner[b] * row;
    for (std::size_t i = 0; i < row; ++i) {
      out[b * row + i] = m[b] * a[i] + (1.0 - m[b]) * p[i];
    }
  }
  std::vector<std::size_t> ps(partner.begin(), partner.end());
  std::vector<double> ms(m.begin(), m.end());
  return tape->record(std::move(out), needs(x),
                      [tape, x, ps, ms, batch, row, id = static_cast<int>(tape->size())]() {
                        Tensor* gx = tape->accumulate(x.id());
                        const Tensor& g = tape->grad(id);
                        for (std::size_t b = 0; b < batch; ++b) {
                          for (std::size_t i = 0; i < row; ++i) {
                            (*gx)[b * row + i] += ms[b] * g[b * row + i];
                            (*gx)[ps[b] * row + i] += (1.0 - ms[b]) * g[b * row + i];
                          }
                        }
                      });
}

Var apply_linear_maps(const Var& x, const std::vector<dsp::LinearMap>& maps,
                      std::span<const std::size_t> offset,
                      std::size_t out_length) {
  require_rank(x, 3, "apply_linear_maps input");
  Tape* tape = x.tape();
  const std::size_t batch = x.shape()[0], len = x.shape()[2];
  if (x.shape()[1] != 1 || maps.size() != batch || offset.size() != batch) {
    throw InvalidInputError("apply_linear_maps expects mono input and one map per element");
  }
  Tensor out({batch, 1, out_length});
  std::vector<double> full;
  for (std::size_t b = 0; b < batch; ++b) {
    if (maps[b].input_length != len) {
      throw InvalidInputError("linear map input length mismatch");
    }
    full.assign(maps[b].output_length(), 0.0);
    maps[b].apply(std::span<const double>(x.value().data() + b * len, len), full);
    for (std::size_t t = 0; t < out_length; ++t) {
      const std::size_t src = offset[b] + t;
      out[b * out_length + t] = src < full.size() ? full[src] : 0.0;
    }
  }
  std::vector<std::size_t> offs(offset.begin(), offset.end());
  return tape->record(
      std::move(out), needs(x),
      [tape, x, maps, offs, batch, len, out_length, id = static_cast<int>(tape->size())]() {
        Tensor* gx = tape->accumulate(x.id());
        const Tensor& g = tape->grad(id);
        std::vector<double> full;
        for (std::size_t b = 0; b < batch; ++b) {
          full.assign(maps[b].output_length(), 0.0);
          for (std::size_t t = 0; t < out_length; ++t) {
            const std::size_t src = offs[b] + t;
            if (src < full.size()) full[src] = g[b * out_length + t];
          }
          maps[b].apply_transpose(full, std::span<double>(gx->data() + b * len, len));
        }
      });
}

Var mean_squared_offset(const Var& x, double target) {
  Tape* tape = x.tape();
  const Tensor& xv = x.value();
  if (xv.empty()) throw InvalidInputError("mean of empty tensor");
  double acc = 0.0;
  for (double v : xv.values()) acc += (v - target) * (v - target);
  const double n = static_cast<double>(xv.size());
  return tape->record(Tensor({1}, acc / n), needs(x),
                      [tape, x, target, n, id = static_cast<int>(tape->size())]() {
                        Tensor* gx = tape->accumulate(x.id());
                        const double g = tape->grad(id)[0] * 2.0 / n;
                        const Tensor& xv = x.value();
                        for (std::size_t i = 0; i < xv.size(); ++i) {
                          (*gx)[i] += g * (xv[i] - target);
                        }
                      });
}

Var mean_abs_diff(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw InvalidInputError("mean_abs_diff shape mismatch: " +
                            shape_string(a.shape()) + " vs " +
                            shape_string(b.shape()));
  }
  Tape* tape = a.tape();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.empty()) throw InvalidInputError("mean of empty tensor");
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += std::abs(av[i] - bv[i]);
  const double n = static_cast<double>(av.size());
  return tape->record(Tensor({1}, acc / n), needs(a) || needs(b),
                      [tape, a, b, n, id = static_cast<int>(tape->size())]() {
                        const double g = tape->grad(id)[0] / n;
                        const Tensor& av = a.value();
                        const Tensor& bv = b.value();
                        Tensor* ga = tape->accumulate(a.id());
                        Tensor* gb = tape->accumulate(b.id());
                        for (std::size_t i = 0; i < av.size(); ++i) {
                          const double d = av[i] - bv[i];
                          const double s = d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
                          if (ga) (*ga)[i] += s;
                          if (gb) (*gb)[i] -= s;
                        }
                      });
}

}  // namespace augcondd::nn
