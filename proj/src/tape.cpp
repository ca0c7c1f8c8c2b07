#include "bgm/tape.hpp"

#include <cmath>

namespace bgm::nn {

namespace {
constexpr double kSqrtGradFloor = 1e-12;
}

Tape::Id Tape::push(Tensor val, bool requires_grad, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(val), nullptr, requires_grad, Tensor{}, std::move(back)});
  return static_cast<Id>(nodes_.size() - 1);
}

Tape::Id Tape::leaf(Tensor value) { return push(std::move(value), false, nullptr); }

Tape::Id Tape::var(Tensor value) { return push(std::move(value), true, nullptr); }

Tape::Id Tape::param(const Tensor* bound) {
  nodes_.push_back(Node{Tensor{}, bound, true, Tensor{}, nullptr});
  return static_cast<Id>(nodes_.size() - 1);
}

const Tensor& Tape::value(Id id) const {
  const Node& n = nodes_[id];
  return n.ext ? *n.ext : n.val;
}

Tensor& Tape::grad_buf(Id id) {
  Node& n = nodes_[id];
  if (n.grad.v.empty()) n.grad = Tensor(value(id).shape);
  return n.grad;
}

const Tensor& Tape::grad(Id id) const { return nodes_[id].grad; }

Tensor Tape::take_grad(Id id) { return std::move(nodes_[id].grad); }

void Tape::shape_fail(const std::string& op, const Tensor& a, const Tensor& b) {
  throw ShapeError(op + ": incompatible shapes " + a.shape_str() + " and " + b.shape_str());
}

void Tape::backward(Id loss) {
  if (value(loss).size() != 1) throw std::invalid_argument("backward: loss must be scalar");
  if (ran_backward_) throw std::logic_error("backward: tape already consumed");
  ran_backward_ = true;

  grad_buf(loss)[0] = 1.0;
  for (Id id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.back || n.grad.v.empty()) continue;
    n.back(*this);
  }
  // Differentiable leaves the loss never reached keep a zero gradient.
  for (auto& n : nodes_) {
    if (n.requires_grad && n.grad.v.empty()) n.grad = Tensor(n.ext ? n.ext->shape : n.val.shape);
  }
}

Tape::Id Tape::add(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  Tensor out;
  if (ta.same_shape(tb)) {
    out = ta;
    for (int64_t i = 0; i < out.size(); ++i) out[i] += tb[i];
  } else if (tb.size() == 1) {
    out = ta;
    for (int64_t i = 0; i < out.size(); ++i) out[i] += tb[0];
  } else if (ta.size() == 1) {
    out = tb;
    for (int64_t i = 0; i < out.size(); ++i) out[i] += ta[0];
  } else {
    shape_fail("add", ta, tb);
  }
  bool rq = requires_grad(a) || requires_grad(b);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    if (t.requires_grad(a)) {
      Tensor& ga = t.grad_buf(a);
      if (ga.size() == g.size())
        for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      else
        for (int64_t i = 0; i < g.size(); ++i) ga[0] += g[i];
    }
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buf(b);
      if (gb.size() == g.size())
        for (int64_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      else
        for (int64_t i = 0; i < g.size(); ++i) gb[0] += g[i];
    }
  });
}

Tape::Id Tape::mul(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  Tensor out;
  if (ta.same_shape(tb)) {
    out = ta;
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
  } else if (tb.size() == 1) {
    out = ta;
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= tb[0];
  } else if (ta.size() == 1) {
    out = tb;
    for (int64_t i = 0; i < out.size(); ++i) out[i] *= ta[0];
  } else {
    shape_fail("mul", ta, tb);
  }
  bool rq = requires_grad(a) || requires_grad(b);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    if (t.requires_grad(a)) {
      Tensor& ga = t.grad_buf(a);
      if (va.size() == g.size()) {
        if (vb.size() == 1)
          for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[0];
        else
          for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
      } else {  // a is the scalar side
        for (int64_t i = 0; i < g.size(); ++i) ga[0] += g[i] * vb[i];
      }
    }
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buf(b);
      if (vb.size() == g.size()) {
        if (va.size() == 1)
          for (int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[0];
        else
          for (int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
      } else {
        for (int64_t i = 0; i < g.size(); ++i) gb[0] += g[i] * va[i];
      }
    }
  });
}

Tape::Id Tape::scalar_mul(Id a, double c) {
  Tensor out = value(a);
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= c;
  bool rq = requires_grad(a);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& ga = t.grad_buf(a);
    for (int64_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Tape::Id Tape::matmul(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.rank() != 2) shape_fail("matmul", ta, tb);
  const int m = ta.dim(0);
  const int k = ta.dim(1);

  Tensor out;
  if (tb.rank() == 1) {
    if (tb.dim(0) != k) shape_fail("matmul", ta, tb);
    out = Tensor({m});
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      const double* arow = ta.v.data() + static_cast<int64_t>(i) * k;
      for (int j = 0; j < k; ++j) s += arow[j] * tb[j];
      out[i] = s;
    }
  } else if (tb.rank() == 2) {
    if (tb.dim(0) != k) shape_fail("matmul", ta, tb);
    const int n = tb.dim(1);
    out = Tensor({m, n});
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j) {
        const double aij = ta.at(i, j);
        if (aij == 0.0) continue;
        for (int c = 0; c < n; ++c) out.at(i, c) += aij * tb.at(j, c);
      }
  } else {
    shape_fail("matmul", ta, tb);
  }

  bool rq = requires_grad(a) || requires_grad(b);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    const int M = va.dim(0);
    const int K = va.dim(1);
    if (vb.rank() == 1) {
      if (t.requires_grad(a)) {
        Tensor& ga = t.grad_buf(a);
        for (int i = 0; i < M; ++i)
          for (int j = 0; j < K; ++j) ga.at(i, j) += g[i] * vb[j];
      }
      if (t.requires_grad(b)) {
        Tensor& gb = t.grad_buf(b);
        for (int i = 0; i < M; ++i) {
          const double gi = g[i];
          const double* arow = va.v.data() + static_cast<int64_t>(i) * K;
          for (int j = 0; j < K; ++j) gb[j] += arow[j] * gi;
        }
      }
    } else {
      const int N = vb.dim(1);
      if (t.requires_grad(a)) {
        Tensor& ga = t.grad_buf(a);
        for (int i = 0; i < M; ++i)
          for (int j = 0; j < K; ++j) {
            double s = 0.0;
            for (int c = 0; c < N; ++c) s += g.at(i, c) * vb.at(j, c);
            ga.at(i, j) += s;
          }
      }
      if (t.requires_grad(b)) {
        Tensor& gb = t.grad_buf(b);
        for (int i = 0; i < M; ++i)
          for (int j = 0; j < K; ++j) {
            const double aij = va.at(i, j);
            if (aij == 0.0) continue;
            for (int c = 0; c < N; ++c) gb.at(j, c) += aij * g.at(i, c);
          }
      }
    }
  });
}

Tape::Id Tape::tanh(Id a) {
  Tensor out = value(a);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  bool rq = requires_grad(a);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad_buf(a);
    for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Tape::Id Tape::sigmoid(Id a) {
  Tensor out = value(a);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  bool rq = requires_grad(a);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad_buf(a);
    for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Tape::Id Tape::relu(Id a) {
  Tensor out = value(a);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  bool rq = requires_grad(a);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_buf(a);
    for (int64_t i = 0; i < g.size(); ++i)
      if (x[i] > 0.0) ga[i] += g[i];
  });
}

Tape::Id Tape::concat(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.rank() != 1 || tb.rank() != 1) shape_fail("concat", ta, tb);
  Tensor out({ta.dim(0) + tb.dim(0)});
  for (int64_t i = 0; i < ta.size(); ++i) out[i] = ta[i];
  for (int64_t i = 0; i < tb.size(); ++i) out[ta.size() + i] = tb[i];
  bool rq = requires_grad(a) || requires_grad(b);
  Id self = static_cast<Id>(nodes_.size());
  const int64_t na = ta.size();
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    if (t.requires_grad(a)) {
      Tensor& ga = t.grad_buf(a);
      for (int64_t i = 0; i < na; ++i) ga[i] += g[i];
    }
    if (t.requires_grad(b)) {
      Tensor& gb = t.grad_buf(b);
      for (int64_t i = na; i < g.size(); ++i) gb[i - na] += g[i];
    }
  });
}

Tape::Id Tape::slice(Id a, int start, int len) {
  const Tensor& ta = value(a);
  if (ta.rank() != 1 || start < 0 || len < 0 || start + len > ta.dim(0))
    throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of " + ta.shape_str());
  Tensor out({len});
  for (int i = 0; i < len; ++i) out[i] = ta[start + i];
  bool rq = requires_grad(a);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& ga = t.grad_buf(a);
    for (int i = 0; i < len; ++i) ga[start + i] += g[i];
  });
}

Tape::Id Tape::flatten(Id a) {
  const Tensor& ta = value(a);
  Tensor out = Tensor::from({static_cast<int>(ta.size())}, ta.v);
  bool rq = requires_grad(a);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& ga = t.grad_buf(a);
    for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Tape::Id Tape::conv2d(Id x, Id w, Id b, Pad pad) {
  const Tensor& tx = value(x);
  const Tensor& tw = value(w);
  const Tensor& tb = value(b);
  if (tx.rank() != 3 || tw.rank() != 4 || tw.dim(1) != tx.dim(0)) shape_fail("conv2d", tx, tw);
  if (tb.rank() != 1 || tb.dim(0) != tw.dim(0)) shape_fail("conv2d bias", tw, tb);
  const int ci = tx.dim(0), h = tx.dim(1), wd = tx.dim(2);
  const int co = tw.dim(0), kh = tw.dim(2), kw = tw.dim(3);
  const int ph = pad == Pad::same ? kh / 2 : 0;
  const int pw = pad == Pad::same ? kw / 2 : 0;
  const int oh = pad == Pad::same ? h : h - kh + 1;
  const int ow = pad == Pad::same ? wd : wd - kw + 1;
  if (oh < 1 || ow < 1) shape_fail("conv2d", tx, tw);

  Tensor out({co, oh, ow});
  for (int oc = 0; oc < co; ++oc)
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j) {
        double s = tb[oc];
        for (int ic = 0; ic < ci; ++ic)
          for (int u = 0; u < kh; ++u) {
            const int ii = i + u - ph;
            if (ii < 0 || ii >= h) continue;
            for (int v = 0; v < kw; ++v) {
              const int jj = j + v - pw;
              if (jj < 0 || jj >= wd) continue;
              s += tx.at(ic, ii, jj) * tw.v[((static_cast<int64_t>(oc) * ci + ic) * kh + u) * kw + v];
            }
          }
        out.at(oc, i, j) = s;
      }

  bool rq = requires_grad(x) || requires_grad(w) || requires_grad(b);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& vx = t.value(x);
    const Tensor& vw = t.value(w);
    const bool need_x = t.requires_grad(x);
    const bool need_w = t.requires_grad(w);
    const bool need_b = t.requires_grad(b);
    Tensor* gx = need_x ? &t.grad_buf(x) : nullptr;
    Tensor* gw = need_w ? &t.grad_buf(w) : nullptr;
    Tensor* gb = need_b ? &t.grad_buf(b) : nullptr;
    for (int oc = 0; oc < co; ++oc)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          const double go = g.at(oc, i, j);
          if (go == 0.0) continue;
          if (need_b) (*gb)[oc] += go;
          for (int ic = 0; ic < ci; ++ic)
            for (int u = 0; u < kh; ++u) {
              const int ii = i + u - ph;
              if (ii < 0 || ii >= h) continue;
              for (int v = 0; v < kw; ++v) {
                const int jj = j + v - pw;
                if (jj < 0 || jj >= wd) continue;
                const int64_t widx = ((static_cast<int64_t>(oc) * ci + ic) * kh + u) * kw + v;
                if (need_x) gx->at(ic, ii, jj) += go * vw.v[widx];
                if (need_w) gw->v[widx] += go * vx.at(ic, ii, jj);
              }
            }
        }
  });
}

Tape::Id Tape::avg_pool2(Id x) {
  const Tensor& tx = value(x);
  if (tx.rank() != 3 || tx.dim(1) % 2 != 0 || tx.dim(2) % 2 != 0)
    throw ShapeError("avg_pool2: need [C, even H, even W], got " + tx.shape_str());
  const int c = tx.dim(0), h = tx.dim(1), w = tx.dim(2);
  Tensor out({c, h / 2, w / 2});
  for (int ic = 0; ic < c; ++ic)
    for (int i = 0; i < h / 2; ++i)
      for (int j = 0; j < w / 2; ++j)
        out.at(ic, i, j) = 0.25 * (tx.at(ic, 2 * i, 2 * j) + tx.at(ic, 2 * i, 2 * j + 1) +
                                   tx.at(ic, 2 * i + 1, 2 * j) + tx.at(ic, 2 * i + 1, 2 * j + 1));
  bool rq = requires_grad(x);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& gx = t.grad_buf(x);
    for (int ic = 0; ic < c; ++ic)
      for (int i = 0; i < h / 2; ++i)
        for (int j = 0; j < w / 2; ++j) {
          const double q = 0.25 * g.at(ic, i, j);
          gx.at(ic, 2 * i, 2 * j) += q;
          gx.at(ic, 2 * i, 2 * j + 1) += q;
          gx.at(ic, 2 * i + 1, 2 * j) += q;
          gx.at(ic, 2 * i + 1, 2 * j + 1) += q;
        }
  });
}

Tape::Id Tape::sum(Id a) {
  const Tensor& ta = value(a);
  double s = 0.0;
  for (int64_t i = 0; i < ta.size(); ++i) s += ta[i];
  bool rq = requires_grad(a);
  Id self = static_cast<Id>(nodes_.size());
  return push(Tensor::scalar(s), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const double g = t.nodes_[self].grad[0];
    Tensor& ga = t.grad_buf(a);
    for (int64_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Tape::Id Tape::sum_of_squares(Id a) {
  const Tensor& ta = value(a);
  double s = 0.0;
  for (int64_t i = 0; i < ta.size(); ++i) s += ta[i] * ta[i];
  bool rq = requires_grad(a);
  Id self = static_cast<Id>(nodes_.size());
  return push(Tensor::scalar(s), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const double g = t.nodes_[self].grad[0];
    const Tensor& va = t.value(a);
    Tensor& ga = t.grad_buf(a);
    for (int64_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * va[i] * g;
  });
}

Tape::Id Tape::sqrt(Id a) {
  Tensor out = value(a);
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i]);
  bool rq = requires_grad(a);
  Id self = static_cast<Id>(nodes_.size());
  return push(std::move(out), rq, !rq ? std::function<void(Tape&)>{} : [=](Tape& t) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad_buf(a);
    for (int64_t i = 0; i < g.size(); ++i)
      ga[i] += g[i] * 0.5 / std::max(y[i], kSqrtGradFloor);
  });
}

}  // namespace bgm::nn
