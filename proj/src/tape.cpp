#include "shapelab/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace shapelab {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + a.shape_str() + " and " +
                         b.shape_str() + " differ");
  }
}

}  // namespace

int Tape::add_node(Tensor value, std::vector<int> parents,
                   std::function<void(Tape&, int)> back) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.back = std::move(back);
  for (int p : n.parents) {
    if (nodes_[static_cast<std::size_t>(p)].needs_grad) {
      n.needs_grad = true;
      break;
    }
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_id(Val v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw ArgumentError("invalid tape node handle");
  }
}

Val Tape::leaf(const Tensor& t) {
  Node n;
  n.value = t;  // aliases storage and grad buffer
  n.is_leaf = true;
  n.needs_grad = t.has_grad();
  nodes_.push_back(std::move(n));
  return Val{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(Val v) const {
  check_id(v);
  return node(v.id).value;
}

double Tape::scalar_value(Val v) const {
  const Tensor& t = value(v);
  if (t.size() != 1) throw DimensionError("node is not scalar");
  return t.data()[0];
}

double* Tape::grad_ptr(int id) {
  Node& n = node(id);
  if (!n.needs_grad || !n.reachable) return nullptr;
  if (n.is_leaf) return n.value.has_grad() ? n.value.grad() : nullptr;
  return n.grad.data();
}

const double* Tape::grad_data(Val v) const {
  check_id(v);
  const Node& n = node(v.id);
  if (!n.needs_grad) return nullptr;
  if (n.is_leaf) return n.value.has_grad() ? n.value.grad() : nullptr;
  return n.grad.empty() ? nullptr : n.grad.data();
}

void Tape::backward(Val out) {
  check_id(out);
  if (node(out.id).value.size() != 1) {
    throw DimensionError("backward requires a scalar output node");
  }
  for (Node& n : nodes_) n.reachable = false;
  // Mark ancestors of `out`.
  std::vector<int> stack{out.id};
  node(out.id).reachable = true;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    for (int p : node(id).parents) {
      Node& pn = node(p);
      if (!pn.reachable) {
        pn.reachable = true;
        stack.push_back(p);
      }
    }
  }
  // Fresh interior gradient buffers.
  for (Node& n : nodes_) {
    if (n.reachable && n.needs_grad && !n.is_leaf) {
      n.grad.assign(static_cast<std::size_t>(n.value.size()), 0.0);
    }
  }
  {
    double* g = grad_ptr(out.id);
    if (g == nullptr) return;  // output depends on no gradient-carrying leaf
    g[0] += 1.0;
  }
  for (int id = out.id; id >= 0; --id) {
    Node& n = node(id);
    if (n.reachable && n.needs_grad && n.back) n.back(*this, id);
  }
}

// ---------------------------------------------------------------------------
// Elementwise and reduction ops
// ---------------------------------------------------------------------------

Val Tape::add(Val a, Val b) {
  check_id(a);
  check_id(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  check_same_shape(ta, tb, "add");
  Tensor out(ta.shape());
  const int n = ta.size();
  for (int i = 0; i < n; ++i) out[i] = ta[i] + tb[i];
  auto back = [a, b, n](Tape& t, int id) {
    const double* g = t.node(id).grad.data();
    if (double* ga = t.grad_ptr(a.id)) {
      for (int i = 0; i < n; ++i) ga[i] += g[i];
    }
    if (double* gb = t.grad_ptr(b.id)) {
      for (int i = 0; i < n; ++i) gb[i] += g[i];
    }
  };
  return Val{add_node(std::move(out), {a.id, b.id}, back)};
}

Val Tape::mul(Val a, Val b) {
  check_id(a);
  check_id(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  check_same_shape(ta, tb, "mul");
  Tensor out(ta.shape());
  const int n = ta.size();
  for (int i = 0; i < n; ++i) out[i] = ta[i] * tb[i];
  auto back = [a, b, n](Tape& t, int id) {
    const double* g = t.node(id).grad.data();
    const double* av = t.node(a.id).value.data();
    const double* bv = t.node(b.id).value.data();
    if (double* ga = t.grad_ptr(a.id)) {
      for (int i = 0; i < n; ++i) ga[i] += g[i] * bv[i];
    }
    if (double* gb = t.grad_ptr(b.id)) {
      for (int i = 0; i < n; ++i) gb[i] += g[i] * av[i];
    }
  };
  return Val{add_node(std::move(out), {a.id, b.id}, back)};
}

Val Tape::scale(Val a, double c) {
  check_id(a);
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  const int n = ta.size();
  for (int i = 0; i < n; ++i) out[i] = c * ta[i];
  auto back = [a, c, n](Tape& t, int id) {
    const double* g = t.node(id).grad.data();
    if (double* ga = t.grad_ptr(a.id)) {
      for (int i = 0; i < n; ++i) ga[i] += c * g[i];
    }
  };
  return Val{add_node(std::move(out), {a.id}, back)};
}

Val Tape::sum(Val a) {
  check_id(a);
  const Tensor& ta = value(a);
  double s = 0.0;
  const int n = ta.size();
  for (int i = 0; i < n; ++i) s += ta[i];
  auto back = [a, n](Tape& t, int id) {
    const double g = t.node(id).grad[0];
    if (double* ga = t.grad_ptr(a.id)) {
      for (int i = 0; i < n; ++i) ga[i] += g;
    }
  };
  return Val{add_node(Tensor::scalar(s), {a.id}, back)};
}

Val Tape::relu(Val a) {
  check_id(a);
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  const int n = ta.size();
  for (int i = 0; i < n; ++i) out[i] = ta[i] > 0.0 ? ta[i] : 0.0;
  // Subgradient 0 at exactly 0.
  auto back = [a, n](Tape& t, int id) {
    const double* g = t.node(id).grad.data();
    const double* av = t.node(a.id).value.data();
    if (double* ga = t.grad_ptr(a.id)) {
      for (int i = 0; i < n; ++i) {
        if (av[i] > 0.0) ga[i] += g[i];
      }
    }
  };
  return Val{add_node(std::move(out), {a.id}, back)};
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

Val Tape::matmul(Val a, Val b) {
  check_id(a);
  check_id(b);
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.rank() != 2 || tb.rank() != 2 || ta.extent(1) != tb.extent(0)) {
    throw DimensionError("matmul: incompatible shapes " + ta.shape_str() + " and " +
                         tb.shape_str());
  }
  const int m = ta.extent(0), k = ta.extent(1), n2 = tb.extent(1);
  Tensor out({m, n2});
  {
    const double* A = ta.data();
    const double* B = tb.data();
    double* C = out.data();
    for (int i = 0; i < m; ++i) {
      double* crow = C + i * n2;
      for (int kk = 0; kk < k; ++kk) {
        const double aik = A[i * k + kk];
        const double* brow = B + kk * n2;
        for (int j = 0; j < n2; ++j) crow[j] += aik * brow[j];
      }
    }
  }
  auto back = [a, b, m, k, n2](Tape& t, int id) {
    const double* G = t.node(id).grad.data();
    const double* A = t.node(a.id).value.data();
    const double* B = t.node(b.id).value.data();
    if (double* GA = t.grad_ptr(a.id)) {
      // dA = G * B^T
      for (int i = 0; i < m; ++i) {
        const double* grow = G + i * n2;
        for (int kk = 0; kk < k; ++kk) {
          const double* brow = B + kk * n2;
          double acc = 0.0;
          for (int j = 0; j < n2; ++j) acc += grow[j] * brow[j];
          GA[i * k + kk] += acc;
        }
      }
    }
    if (double* GB = t.grad_ptr(b.id)) {
      // dB = A^T * G
      for (int i = 0; i < m; ++i) {
        const double* grow = G + i * n2;
        for (int kk = 0; kk < k; ++kk) {
          const double aik = A[i * k + kk];
          double* gbrow = GB + kk * n2;
          for (int j = 0; j < n2; ++j) gbrow[j] += aik * grow[j];
        }
      }
    }
  };
  return Val{add_node(std::move(out), {a.id, b.id}, back)};
}

Val Tape::add_rows(Val x, Val bias) {
  check_id(x);
  check_id(bias);
  const Tensor& tx = value(x);
  const Tensor& tb = value(bias);
  if (tx.rank() != 2 || tb.rank() != 1 || tx.extent(1) != tb.extent(0)) {
    throw DimensionError("add_rows: shapes " + tx.shape_str() + " and " + tb.shape_str() +
                         " incompatible");
  }
  const int m = tx.extent(0), n = tx.extent(1);
  Tensor out({m, n});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) out[i * n + j] = tx[i * n + j] + tb[j];
  }
  auto back = [x, bias, m, n](Tape& t, int id) {
    const double* g = t.node(id).grad.data();
    if (double* gx = t.grad_ptr(x.id)) {
      for (int i = 0; i < m * n; ++i) gx[i] += g[i];
    }
    if (double* gb = t.grad_ptr(bias.id)) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
    }
  };
  return Val{add_node(std::move(out), {x.id, bias.id}, back)};
}

Val Tape::stack_rows(const std::vector<Val>& rows) {
  if (rows.empty()) throw ArgumentError("stack_rows: empty row list");
  std::vector<int> parents;
  parents.reserve(rows.size());
  const Tensor& t0 = value(rows[0]);
  if (t0.rank() != 1) throw DimensionError("stack_rows: rows must be rank-1");
  const int n = t0.extent(0);
  const int m = static_cast<int>(rows.size());
  Tensor out({m, n});
  for (int i = 0; i < m; ++i) {
    const Tensor& ti = value(rows[i]);
    if (ti.rank() != 1 || ti.extent(0) != n) {
      throw DimensionError("stack_rows: row " + std::to_string(i) + " has shape " +
                           ti.shape_str());
    }
    std::copy(ti.data(), ti.data() + n, out.data() + i * n);
    parents.push_back(rows[i].id);
  }
  auto rows_copy = rows;
  auto back = [rows_copy, n](Tape& t, int id) {
    const double* g = t.node(id).grad.data();
    for (std::size_t i = 0; i < rows_copy.size(); ++i) {
      if (double* gr = t.grad_ptr(rows_copy[i].id)) {
        const double* src = g + static_cast<int>(i) * n;
        for (int j = 0; j < n; ++j) gr[j] += src[j];
      }
    }
  };
  return Val{add_node(std::move(out), std::move(parents), back)};
}

Val Tape::reshape(Val a, std::vector<int> shape) {
  check_id(a);
  Tensor out = value(a).reshaped(std::move(shape));
  // The view shares storage; backward just forwards the flat gradient.
  const int n = out.size();
  auto back = [a, n](Tape& t, int id) {
    const double* g = t.node(id).grad.data();
    if (double* ga = t.grad_ptr(a.id)) {
      for (int i = 0; i < n; ++i) ga[i] += g[i];
    }
  };
  // Break aliasing of the gradient path: reshape output is interior, so
  // it owns a fresh grad buffer; only the forward data is shared.
  return Val{add_node(std::move(out), {a.id}, back)};
}

// ---------------------------------------------------------------------------
// Convolution and pooling
// ---------------------------------------------------------------------------

Val Tape::conv2d(Val input, Val kernels, Val bias, Padding padding) {
  check_id(input);
  check_id(kernels);
  check_id(bias);
  const Tensor& ti = value(input);
  const Tensor& tk = value(kernels);
  const Tensor& tb = value(bias);
  if (ti.rank() != 3 || tk.rank() != 4 || tb.rank() != 1) {
    throw DimensionError("conv2d: expected input [C x H x W], kernels [O x C x kH x kW], bias [O]");
  }
  const int cin = ti.extent(0), h = ti.extent(1), w = ti.extent(2);
  const int cout = tk.extent(0), kh = tk.extent(2), kw = tk.extent(3);
  if (tk.extent(1) != cin) {
    throw DimensionError("conv2d: kernel channels " + tk.shape_str() + " do not match input " +
                         ti.shape_str());
  }
  if (tb.extent(0) != cout) throw DimensionError("conv2d: bias length does not match kernel count");
  const int pt = padding == Padding::kSame ? (kh - 1) / 2 : 0;
  const int pl = padding == Padding::kSame ? (kw - 1) / 2 : 0;
  const int pb = padding == Padding::kSame ? (kh - 1) - pt : 0;
  const int pr = padding == Padding::kSame ? (kw - 1) - pl : 0;
  const int hp = h + pt + pb, wp = w + pl + pr;
  const int oh = hp - kh + 1, ow = wp - kw + 1;
  if (oh < 1 || ow < 1) {
    throw DimensionError("conv2d: kernel " + tk.shape_str() + " larger than padded input " +
                         ti.shape_str());
  }

  auto padded = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(cin) * hp * wp, 0.0);
  {
    const double* in = ti.data();
    double* pd = padded->data();
    for (int c = 0; c < cin; ++c) {
      for (int y = 0; y < h; ++y) {
        std::copy(in + (c * h + y) * w, in + (c * h + y) * w + w,
                  pd + (c * hp + y + pt) * wp + pl);
      }
    }
  }

  Tensor out({cout, oh, ow});
  {
    const double* pd = padded->data();
    const double* kv = tk.data();
    double* ov = out.data();
    for (int co = 0; co < cout; ++co) {
      double* omap = ov + co * oh * ow;
      const double b0 = tb[co];
      for (int i = 0; i < oh * ow; ++i) omap[i] = b0;
      for (int ci = 0; ci < cin; ++ci) {
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            const double kval = kv[((co * cin + ci) * kh + ky) * kw + kx];
            const double* imap = pd + (ci * hp + ky) * wp + kx;
            for (int oy = 0; oy < oh; ++oy) {
              const double* src = imap + oy * wp;
              double* dst = omap + oy * ow;
              for (int ox = 0; ox < ow; ++ox) dst[ox] += kval * src[ox];
            }
          }
        }
      }
    }
  }

  auto back = [input, kernels, bias, padded, cin, h, w, cout, kh, kw, pt, pl, hp, wp, oh,
               ow](Tape& t, int id) {
    const double* G = t.node(id).grad.data();
    const double* kv = t.node(kernels.id).value.data();
    const double* pd = padded->data();

    if (double* gb = t.grad_ptr(bias.id)) {
      for (int co = 0; co < cout; ++co) {
        const double* gmap = G + co * oh * ow;
        double acc = 0.0;
        for (int i = 0; i < oh * ow; ++i) acc += gmap[i];
        gb[co] += acc;
      }
    }
    if (double* gk = t.grad_ptr(kernels.id)) {
      for (int co = 0; co < cout; ++co) {
        const double* gmap = G + co * oh * ow;
        for (int ci = 0; ci < cin; ++ci) {
          for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
              const double* imap = pd + (ci * hp + ky) * wp + kx;
              double acc = 0.0;
              for (int oy = 0; oy < oh; ++oy) {
                const double* src = imap + oy * wp;
                const double* g = gmap + oy * ow;
                for (int ox = 0; ox < ow; ++ox) acc += g[ox] * src[ox];
              }
              gk[((co * cin + ci) * kh + ky) * kw + kx] += acc;
            }
          }
        }
      }
    }
    if (double* gi = t.grad_ptr(input.id)) {
      std::vector<double> gpad(static_cast<std::size_t>(cin) * hp * wp, 0.0);
      for (int co = 0; co < cout; ++co) {
        const double* gmap = G + co * oh * ow;
        for (int ci = 0; ci < cin; ++ci) {
          for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
              const double kval = kv[((co * cin + ci) * kh + ky) * kw + kx];
              double* imap = gpad.data() + (ci * hp + ky) * wp + kx;
              for (int oy = 0; oy < oh; ++oy) {
                double* dst = imap + oy * wp;
                const double* g = gmap + oy * ow;
                for (int ox = 0; ox < ow; ++ox) dst[ox] += kval * g[ox];
              }
            }
          }
        }
      }
      for (int ci = 0; ci < cin; ++ci) {
        for (int y = 0; y < h; ++y) {
          const double* src = gpad.data() + (ci * hp + y + pt) * wp + pl;
          double* dst = gi + (ci * h + y) * w;
          for (int x = 0; x < w; ++x) dst[x] += src[x];
        }
      }
    }
  };
  return Val{add_node(std::move(out), {input.id, kernels.id, bias.id}, back)};
}

Val Tape::maxpool2d(Val input, int window, int stride) {
  check_id(input);
  if (window < 1 || stride < 1) throw ConfigError("maxpool2d: window and stride must be >= 1");
  const Tensor& ti = value(input);
  if (ti.rank() != 3) throw DimensionError("maxpool2d: expected input [C x H x W]");
  const int c = ti.extent(0), h = ti.extent(1), w = ti.extent(2);
  if (window > h || window > w) {
    throw DimensionError("maxpool2d: window " + std::to_string(window) + " exceeds input " +
                         ti.shape_str());
  }
  const int oh = (h - window) / stride + 1;
  const int ow = (w - window) / stride + 1;
  Tensor out({c, oh, ow});
  // First (row-major) maximum wins on ties, so backward is deterministic.
  auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(c) * oh * ow);
  {
    const double* in = ti.data();
    double* ov = out.data();
    for (int ch = 0; ch < c; ++ch) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          const int y0 = oy * stride, x0 = ox * stride;
          double best = in[(ch * h + y0) * w + x0];
          int best_idx = (ch * h + y0) * w + x0;
          for (int dy = 0; dy < window; ++dy) {
            for (int dx = 0; dx < window; ++dx) {
              const int idx = (ch * h + y0 + dy) * w + x0 + dx;
              if (in[idx] > best) {
                best = in[idx];
                best_idx = idx;
              }
            }
          }
          ov[(ch * oh + oy) * ow + ox] = best;
          (*argmax)[static_cast<std::size_t>((ch * oh + oy) * ow + ox)] = best_idx;
        }
      }
    }
  }
  const int on = out.size();
  auto back = [input, argmax, on](Tape& t, int id) {
    const double* g = t.node(id).grad.data();
    if (double* gi = t.grad_ptr(input.id)) {
      for (int i = 0; i < on; ++i) gi[(*argmax)[static_cast<std::size_t>(i)]] += g[i];
    }
  };
  return Val{add_node(std::move(out), {input.id}, back)};
}

// ---------------------------------------------------------------------------
// Dropout, loss, regularization
// ---------------------------------------------------------------------------

Val Tape::dropout(Val a, double rate, Rng& rng, bool training) {
  check_id(a);
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return a;  // identity
  const Tensor& ta = value(a);
  const int n = ta.size();
  const double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n));
  Tensor out(ta.shape());
  for (int i = 0; i < n; ++i) {
    const double m = rng.uniform() < rate ? 0.0 : keep_scale;
    (*mask)[static_cast<std::size_t>(i)] = m;
    out[i] = ta[i] * m;
  }
  auto back = [a, mask, n](Tape& t, int id) {
    const double* g = t.node(id).grad.data();
    if (double* ga = t.grad_ptr(a.id)) {
      for (int i = 0; i < n; ++i) ga[i] += g[i] * (*mask)[static_cast<std::size_t>(i)];
    }
  };
  return Val{add_node(std::move(out), {a.id}, back)};
}

Val Tape::softmax_nll(Val logits, const std::vector<int>& labels) {
  check_id(logits);
  const Tensor& tl = value(logits);
  if (tl.rank() != 2) throw DimensionError("softmax_nll: logits must be [batch x classes]");
  const int m = tl.extent(0), c = tl.extent(1);
  if (static_cast<int>(labels.size()) != m) {
    throw DimensionError("softmax_nll: " + std::to_string(labels.size()) + " labels for batch " +
                         std::to_string(m));
  }
  for (int i = 0; i < m; ++i) {
    if (labels[i] < 0 || labels[i] >= c) {
      throw IndexError("softmax_nll: label " + std::to_string(labels[i]) + " out of range [0, " +
                       std::to_string(c) + ")");
    }
  }
  auto probs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(m) * c);
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double* row = tl.data() + i * c;
    double mx = row[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    double* prow = probs->data() + i * c;
    for (int j = 0; j < c; ++j) {
      prow[j] = std::exp(row[j] - mx);
      z += prow[j];
    }
    for (int j = 0; j < c; ++j) prow[j] /= z;
    loss += -(row[labels[i]] - mx - std::log(z));
  }
  loss /= m;
  auto labels_copy = labels;
  auto back = [logits, probs, labels_copy, m, c](Tape& t, int id) {
    const double g = t.node(id).grad[0];
    if (double* gl = t.grad_ptr(logits.id)) {
      const double inv_m = 1.0 / m;
      for (int i = 0; i < m; ++i) {
        const double* prow = probs->data() + i * c;
        double* grow = gl + i * c;
        for (int j = 0; j < c; ++j) grow[j] += g * inv_m * prow[j];
        grow[labels_copy[i]] -= g * inv_m;
      }
    }
  };
  return Val{add_node(Tensor::scalar(loss), {logits.id}, back)};
}

Val Tape::l2_penalty(const std::vector<Val>& params, double coefficient) {
  if (coefficient < 0.0) {
    throw ConfigError("l2_penalty: coefficient must be >= 0, got " + std::to_string(coefficient));
  }
  std::vector<int> parents;
  parents.reserve(params.size());
  double total = 0.0;
  for (Val p : params) {
    check_id(p);
    const Tensor& tp = value(p);
    double s = 0.0;
    for (int i = 0; i < tp.size(); ++i) s += tp[i] * tp[i];
    total += s;
    parents.push_back(p.id);
  }
  total *= coefficient;
  auto params_copy = params;
  auto back = [params_copy, coefficient](Tape& t, int id) {
    const double g = t.node(id).grad[0];
    for (Val p : params_copy) {
      if (double* gp = t.grad_ptr(p.id)) {
        const Tensor& tp = t.node(p.id).value;
        const int n = tp.size();
        const double* v = tp.data();
        for (int i = 0; i < n; ++i) gp[i] += g * 2.0 * coefficient * v[i];
      }
    }
  };
  return Val{add_node(Tensor::scalar(total), std::move(parents), back)};
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw DimensionError("softmax_rows: expected [batch x classes]");
  const int m = logits.extent(0), c = logits.extent(1);
  Tensor out({m, c});
  for (int i = 0; i < m; ++i) {
    const double* row = logits.data() + i * c;
    double* orow = out.data() + i * c;
    double mx = row[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (int j = 0; j < c; ++j) {
      orow[j] = std::exp(row[j] - mx);
      z += orow[j];
    }
    for (int j = 0; j < c; ++j) orow[j] /= z;
  }
  return out;
}

}  // namespace shapelab
