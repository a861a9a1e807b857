#include "pgdqn/numcore/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pgdqn {

std::span<const double> Tape::node_value(const Node& n) const {
  if (n.op == Op::Param) return n.bound->data();
  return n.val;
}

Tape::Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<Var>(nodes_.size() - 1);
}

Tape::Var Tape::input(std::span<const double> v) {
  Node n;
  n.op = Op::Input;
  n.val.assign(v.begin(), v.end());
  n.adj.assign(v.size(), 0.0);
  return push(std::move(n));
}

Tape::Var Tape::param(Tensor& t) {
  auto it = params_.find(&t);
  if (it != params_.end()) return it->second;
  Node n;
  n.op = Op::Param;
  n.bound = &t;
  n.adj.assign(t.size(), 0.0);
  Var v = push(std::move(n));
  params_.emplace(&t, v);
  return v;
}

Tape::Var Tape::affine(Var w, Var b, Var x) {
  const auto wv = node_value(at(w));
  const auto bv = node_value(at(b));
  const auto xv = node_value(at(x));
  if (at(w).op != Op::Param || at(w).bound->shape().size() != 2)
    throw std::invalid_argument("affine: weight must be a rank-2 parameter");
  const std::size_t out = at(w).bound->rows();
  const std::size_t in = at(w).bound->cols();
  if (in != xv.size() || out != bv.size())
    throw std::invalid_argument("affine: dimension mismatch");
  Node n;
  n.op = Op::Affine;
  n.in[0] = w; n.in[1] = b; n.in[2] = x;
  n.val.resize(out);
  for (std::size_t i = 0; i < out; ++i) {
    double acc = bv[i];
    const double* row = wv.data() + i * in;
    for (std::size_t j = 0; j < in; ++j) acc += row[j] * xv[j];
    n.val[i] = acc;
  }
  n.adj.assign(out, 0.0);
  return push(std::move(n));
}

Tape::Var Tape::noisy_affine(Var w_mu, Var w_sigma, Var b_mu, Var b_sigma, Var x,
                             std::span<const double> f_out, std::span<const double> f_in) {
  const auto wm = node_value(at(w_mu));
  const auto ws = node_value(at(w_sigma));
  const auto bm = node_value(at(b_mu));
  const auto bs = node_value(at(b_sigma));
  const auto xv = node_value(at(x));
  const std::size_t out = f_out.size();
  const std::size_t in = f_in.size();
  if (in != xv.size() || out != bm.size() || wm.size() != out * in)
    throw std::invalid_argument("noisy_affine: dimension mismatch");
  Node n;
  n.op = Op::NoisyAffine;
  n.in[0] = w_mu; n.in[1] = w_sigma; n.in[2] = b_mu; n.in[3] = b_sigma; n.in[4] = x;
  n.aux.reserve(out + in);
  n.aux.insert(n.aux.end(), f_out.begin(), f_out.end());
  n.aux.insert(n.aux.end(), f_in.begin(), f_in.end());
  n.aux_split = static_cast<int>(out);
  n.val.resize(out);
  for (std::size_t i = 0; i < out; ++i) {
    double acc = bm[i] + bs[i] * f_out[i];
    const double* mrow = wm.data() + i * in;
    const double* srow = ws.data() + i * in;
    for (std::size_t j = 0; j < in; ++j) acc += (mrow[j] + srow[j] * f_out[i] * f_in[j]) * xv[j];
    n.val[i] = acc;
  }
  n.adj.assign(out, 0.0);
  return push(std::move(n));
}

Tape::Var Tape::relu(Var x) {
  const auto xv = node_value(at(x));
  Node n;
  n.op = Op::Relu;
  n.in[0] = x;
  n.val.resize(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) n.val[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  n.adj.assign(xv.size(), 0.0);
  return push(std::move(n));
}

Tape::Var Tape::softmax(Var x) {
  const auto xv = node_value(at(x));
  Node n;
  n.op = Op::Softmax;
  n.in[0] = x;
  double m = *std::max_element(xv.begin(), xv.end());
  n.val.resize(xv.size());
  double s = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    n.val[i] = std::exp(xv[i] - m);
    s += n.val[i];
  }
  for (double& v : n.val) v /= s;
  n.adj.assign(xv.size(), 0.0);
  return push(std::move(n));
}

Tape::Var Tape::log_softmax(Var x) {
  const auto xv = node_value(at(x));
  Node n;
  n.op = Op::LogSoftmax;
  n.in[0] = x;
  double m = *std::max_element(xv.begin(), xv.end());
  double s = 0.0;
  for (double v : xv) s += std::exp(v - m);
  double lse = m + std::log(s);
  n.val.resize(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) n.val[i] = xv[i] - lse;
  n.adj.assign(xv.size(), 0.0);
  return push(std::move(n));
}

Tape::Var Tape::pick(Var x, int index) {
  const auto xv = node_value(at(x));
  if (index < 0 || static_cast<std::size_t>(index) >= xv.size())
    throw std::invalid_argument("pick: index out of range");
  Node n;
  n.op = Op::Pick;
  n.in[0] = x;
  n.index = index;
  n.val = {xv[static_cast<std::size_t>(index)]};
  n.adj = {0.0};
  return push(std::move(n));
}

Tape::Var Tape::dot(Var a, Var b) {
  const auto av = node_value(at(a));
  const auto bv = node_value(at(b));
  if (av.size() != bv.size()) throw std::invalid_argument("dot: width mismatch");
  Node n;
  n.op = Op::Dot;
  n.in[0] = a; n.in[1] = b;
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
  n.val = {acc};
  n.adj = {0.0};
  return push(std::move(n));
}

Tape::Var Tape::add(Var a, Var b) {
  const auto av = node_value(at(a));
  const auto bv = node_value(at(b));
  if (av.size() != bv.size()) throw std::invalid_argument("add: width mismatch");
  Node n;
  n.op = Op::Add;
  n.in[0] = a; n.in[1] = b;
  n.val.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.val[i] = av[i] + bv[i];
  n.adj.assign(av.size(), 0.0);
  return push(std::move(n));
}

Tape::Var Tape::sub(Var a, Var b) {
  const auto av = node_value(at(a));
  const auto bv = node_value(at(b));
  if (av.size() != bv.size()) throw std::invalid_argument("sub: width mismatch");
  Node n;
  n.op = Op::Sub;
  n.in[0] = a; n.in[1] = b;
  n.val.resize(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) n.val[i] = av[i] - bv[i];
  n.adj.assign(av.size(), 0.0);
  return push(std::move(n));
}

Tape::Var Tape::scale(Var x, double c) {
  const auto xv = node_value(at(x));
  Node n;
  n.op = Op::Scale;
  n.in[0] = x;
  n.c = c;
  n.val.resize(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) n.val[i] = c * xv[i];
  n.adj.assign(xv.size(), 0.0);
  return push(std::move(n));
}

Tape::Var Tape::mean(Var x) {
  const auto xv = node_value(at(x));
  Node n;
  n.op = Op::Mean;
  n.in[0] = x;
  double acc = 0.0;
  for (double v : xv) acc += v;
  n.val = {acc / static_cast<double>(xv.size())};
  n.adj = {0.0};
  return push(std::move(n));
}

Tape::Var Tape::add_scalar(Var x, Var s) {
  const auto xv = node_value(at(x));
  const auto sv = node_value(at(s));
  if (sv.size() != 1) throw std::invalid_argument("add_scalar: s must be width-1");
  Node n;
  n.op = Op::AddScalar;
  n.in[0] = x; n.in[1] = s;
  n.val.resize(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) n.val[i] = xv[i] + sv[0];
  n.adj.assign(xv.size(), 0.0);
  return push(std::move(n));
}

std::span<const double> Tape::value(Var v) const { return node_value(at(v)); }

double Tape::scalar(Var v) const {
  auto s = node_value(at(v));
  if (s.size() != 1) throw std::invalid_argument("scalar: node is not width-1");
  return s[0];
}

void Tape::backward(Var loss) {
  if (consumed_) throw std::logic_error("Tape::backward: tape already consumed");
  if (node_value(at(loss)).size() != 1)
    throw std::invalid_argument("Tape::backward: loss must be width-1");
  consumed_ = true;
  at(loss).adj[0] = 1.0;

  // Construction order is topological, so a single reverse sweep suffices.
  for (int id = loss; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    const auto& dy = n.adj;
    switch (n.op) {
      case Op::Input:
      case Op::Param:
        break;
      case Op::Affine: {
        Node& w = at(n.in[0]);
        Node& b = at(n.in[1]);
        Node& x = at(n.in[2]);
        const auto wv = node_value(w);
        const auto xv = node_value(x);
        const std::size_t out = dy.size();
        const std::size_t in = xv.size();
        for (std::size_t i = 0; i < out; ++i) {
          const double g = dy[i];
          if (g == 0.0) continue;
          b.adj[i] += g;
          double* wrow = w.adj.data() + i * in;
          const double* vrow = wv.data() + i * in;
          for (std::size_t j = 0; j < in; ++j) {
            wrow[j] += g * xv[j];
            x.adj[j] += g * vrow[j];
          }
        }
        break;
      }
      case Op::NoisyAffine: {
        Node& wm = at(n.in[0]);
        Node& ws = at(n.in[1]);
        Node& bm = at(n.in[2]);
        Node& bs = at(n.in[3]);
        Node& x = at(n.in[4]);
        const auto wmv = node_value(wm);
        const auto wsv = node_value(ws);
        const auto xv = node_value(x);
        const std::size_t out = dy.size();
        const std::size_t in = xv.size();
        const double* fo = n.aux.data();
        const double* fi = n.aux.data() + n.aux_split;
        for (std::size_t i = 0; i < out; ++i) {
          const double g = dy[i];
          if (g == 0.0) continue;
          bm.adj[i] += g;
          bs.adj[i] += g * fo[i];
          for (std::size_t j = 0; j < in; ++j) {
            const double eps = fo[i] * fi[j];
            wm.adj[i * in + j] += g * xv[j];
            ws.adj[i * in + j] += g * xv[j] * eps;
            x.adj[j] += g * (wmv[i * in + j] + wsv[i * in + j] * eps);
          }
        }
        break;
      }
      case Op::Relu: {
        Node& x = at(n.in[0]);
        for (std::size_t i = 0; i < dy.size(); ++i)
          if (n.val[i] > 0.0) x.adj[i] += dy[i];
        break;
      }
      case Op::Softmax: {
        Node& x = at(n.in[0]);
        double s = 0.0;
        for (std::size_t i = 0; i < dy.size(); ++i) s += n.val[i] * dy[i];
        for (std::size_t i = 0; i < dy.size(); ++i) x.adj[i] += n.val[i] * (dy[i] - s);
        break;
      }
      case Op::LogSoftmax: {
        Node& x = at(n.in[0]);
        double s = 0.0;
        for (double g : dy) s += g;
        for (std::size_t i = 0; i < dy.size(); ++i)
          x.adj[i] += dy[i] - std::exp(n.val[i]) * s;
        break;
      }
      case Op::Pick:
        at(n.in[0]).adj[static_cast<std::size_t>(n.index)] += dy[0];
        break;
      case Op::Dot: {
        Node& a = at(n.in[0]);
        Node& b = at(n.in[1]);
        const auto av = node_value(a);
        const auto bv = node_value(b);
        for (std::size_t i = 0; i < av.size(); ++i) {
          a.adj[i] += dy[0] * bv[i];
          b.adj[i] += dy[0] * av[i];
        }
        break;
      }
      case Op::Add:
        for (std::size_t i = 0; i < dy.size(); ++i) {
          at(n.in[0]).adj[i] += dy[i];
          at(n.in[1]).adj[i] += dy[i];
        }
        break;
      case Op::Sub:
        for (std::size_t i = 0; i < dy.size(); ++i) {
          at(n.in[0]).adj[i] += dy[i];
          at(n.in[1]).adj[i] -= dy[i];
        }
        break;
      case Op::Scale:
        for (std::size_t i = 0; i < dy.size(); ++i) at(n.in[0]).adj[i] += n.c * dy[i];
        break;
      case Op::Mean: {
        Node& x = at(n.in[0]);
        const double g = dy[0] / static_cast<double>(x.adj.size());
        for (double& a : x.adj) a += g;
        break;
      }
      case Op::AddScalar: {
        Node& x = at(n.in[0]);
        Node& s = at(n.in[1]);
        for (std::size_t i = 0; i < dy.size(); ++i) {
          x.adj[i] += dy[i];
          s.adj[0] += dy[i];
        }
        break;
      }
    }
  }
}

Tensor Tape::grad(const Tensor& param) const {
  auto it = params_.find(&param);
  Tensor g(param.shape());
  if (it == params_.end()) return g;  // never on tape: exact zeros
  const Node& n = at(it->second);
  std::copy(n.adj.begin(), n.adj.end(), g.data().begin());
  return g;
}

}  // namespace pgdqn
