#include "sfcsim/nn/qnetwork.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sfcsim/nn/kernels.hpp"

namespace sfc::nn {

std::size_t NetShape::input_width() const { return std::accumulate(branch_in.begin(), branch_in.end(), std::size_t{0}); }

QNetwork::QNetwork(NetShape shape, std::uint64_t seed) : shape_(std::move(shape)) {
  if (shape_.branch_in.empty()) throw std::invalid_argument("network needs at least one input branch");
  if (shape_.embed == 0 || shape_.out == 0) throw std::invalid_argument("embed and out widths must be positive");
  for (auto h : shape_.hidden)
    if (h == 0) throw std::invalid_argument("hidden widths must be positive");

  const std::size_t nb = shape_.branch_in.size();
  const std::size_t E = shape_.embed;
  for (std::size_t b = 0; b < nb; ++b) {
    params_.emplace_back("branch" + std::to_string(b) + ".w", E, shape_.branch_in[b]);
    params_.emplace_back("branch" + std::to_string(b) + ".b", 1, E);
  }
  params_.emplace_back("gate.u", nb, E);
  params_.emplace_back("gate.k", 1, nb);
  std::size_t prev = nb * E;
  for (std::size_t l = 0; l <= shape_.hidden.size(); ++l) {
    const std::size_t width = l < shape_.hidden.size() ? shape_.hidden[l] : shape_.out;
    const std::string tag = l < shape_.hidden.size() ? "hidden" + std::to_string(l) : std::string("out");
    params_.emplace_back(tag + ".w", width, prev);
    params_.emplace_back(tag + ".b", 1, width);
    prev = width;
  }

  std::mt19937_64 rng(seed);
  auto glorot = [&](Tensor& t, std::size_t fan_in, std::size_t fan_out) {
    const double lim = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in + fan_out, 1)));
    std::uniform_real_distribution<double> u(-lim, lim);
    for (auto& x : t.v) x = u(rng);
  };
  for (std::size_t b = 0; b < nb; ++b) glorot(params_[branch_w(b)], shape_.branch_in[b], E);
  glorot(params_[gate_u()], E, 1);
  for (std::size_t l = 0; l <= shape_.hidden.size(); ++l) {
    auto& w = params_[layer_w(l)];
    glorot(w, w.cols, w.rows);
  }
}

std::size_t QNetwork::num_params() const {
  std::size_t n = 0;
  for (const auto& t : params_) n += t.size();
  return n;
}

void QNetwork::forward(std::span<const double> x, std::size_t rows, Workspace& ws) const {
  const std::size_t width = shape_.input_width();
  if (x.size() != rows * width)
    throw std::invalid_argument("input width mismatch: expected " + std::to_string(rows * width) + " values, got " +
                                std::to_string(x.size()));
  const std::size_t nb = shape_.branch_in.size();
  const std::size_t E = shape_.embed;
  ws.rows = rows;
  ws.xb.resize(nb);
  ws.e.resize(nb);

  std::size_t offset = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t in = shape_.branch_in[b];
    auto& xb = ws.xb[b];
    xb.resize(rows * in);
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(r * width + offset), in, xb.begin() + static_cast<std::ptrdiff_t>(r * in));
    offset += in;
    auto& e = ws.e[b];
    e.resize(rows * E);
    kernels::affine_forward({rows, in, E}, xb, params_[branch_w(b)].v, params_[branch_b(b)].v, e);
    for (auto& v : e) v = std::tanh(v);
  }

  const auto& u = params_[gate_u()].v;
  const auto& k = params_[gate_k()].v;
  ws.alpha.resize(rows * nb);
  ws.g.resize(rows * nb * E);
  for (std::size_t r = 0; r < rows; ++r) {
    double* a = ws.alpha.data() + r * nb;
    double mx = -INFINITY;
    for (std::size_t b = 0; b < nb; ++b) {
      const double* e = ws.e[b].data() + r * E;
      double s = k[b];
      for (std::size_t j = 0; j < E; ++j) s += u[b * E + j] * e[j];
      a[b] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      a[b] = std::exp(a[b] - mx);
      z += a[b];
    }
    for (std::size_t b = 0; b < nb; ++b) {
      a[b] /= z;
      const double* e = ws.e[b].data() + r * E;
      double* g = ws.g.data() + r * nb * E + b * E;
      for (std::size_t j = 0; j < E; ++j) g[j] = a[b] * e[j];
    }
  }

  const std::size_t L = shape_.hidden.size();
  ws.h.resize(L);
  const std::vector<double>* prev = &ws.g;
  std::size_t prev_w = nb * E;
  for (std::size_t l = 0; l < L; ++l) {
    auto& h = ws.h[l];
    h.resize(rows * shape_.hidden[l]);
    kernels::affine_forward({rows, prev_w, shape_.hidden[l]}, *prev, params_[layer_w(l)].v, params_[layer_b(l)].v, h);
    for (auto& v : h) v = v > 0.0 ? v : 0.0;
    prev = &h;
    prev_w = shape_.hidden[l];
  }
  ws.q.resize(rows * shape_.out);
  kernels::affine_forward({rows, prev_w, shape_.out}, *prev, params_[layer_w(L)].v, params_[layer_b(L)].v, ws.q);
}

std::vector<double> QNetwork::forward(std::span<const double> x) const {
  Workspace ws;
  forward(x, 1, ws);
  return ws.q;
}

std::vector<Tensor> QNetwork::zero_grads() const {
  std::vector<Tensor> g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.name, p.rows, p.cols);
  return g;
}

void QNetwork::backward(Workspace& ws, std::span<const double> dq, std::vector<Tensor>& grads) const {
  const std::size_t rows = ws.rows;
  const std::size_t nb = shape_.branch_in.size();
  const std::size_t E = shape_.embed;
  const std::size_t L = shape_.hidden.size();
  if (dq.size() != rows * shape_.out) throw std::invalid_argument("dq size mismatch");
  if (grads.size() != params_.size()) throw std::invalid_argument("gradient layout mismatch");

  ws.d_cur.assign(dq.begin(), dq.end());
  for (std::size_t l = L + 1; l-- > 0;) {
    const std::size_t out_w = l < L ? shape_.hidden[l] : shape_.out;
    const std::vector<double>& in = l > 0 ? ws.h[l - 1] : ws.g;
    const std::size_t in_w = l > 0 ? shape_.hidden[l - 1] : nb * E;
    const kernels::Dims d{rows, in_w, out_w};
    kernels::affine_backward_params(d, ws.d_cur, in, grads[layer_w(l)].v, grads[layer_b(l)].v);
    ws.d_prev.resize(rows * in_w);
    kernels::affine_backward_input(d, ws.d_cur, params_[layer_w(l)].v, ws.d_prev);
    if (l > 0) {
      const auto& h = ws.h[l - 1];
      for (std::size_t i = 0; i < ws.d_prev.size(); ++i)
        if (h[i] <= 0.0) ws.d_prev[i] = 0.0;
    }
    std::swap(ws.d_cur, ws.d_prev);
  }
  // ws.d_cur now holds dL/dg.

  const auto& u = params_[gate_u()].v;
  auto& du = grads[gate_u()].v;
  auto& dk = grads[gate_k()].v;
  ws.d_e.resize(nb * rows * E);
  std::vector<double> da(nb), ds(nb);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* a = ws.alpha.data() + r * nb;
    const double* dg = ws.d_cur.data() + r * nb * E;
    double dot = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const double* e = ws.e[b].data() + r * E;
      double s = 0.0;
      for (std::size_t j = 0; j < E; ++j) s += dg[b * E + j] * e[j];
      da[b] = s;
      dot += a[b] * s;
    }
    for (std::size_t b = 0; b < nb; ++b) {
      ds[b] = a[b] * (da[b] - dot);
      const double* e = ws.e[b].data() + r * E;
      double* de = ws.d_e.data() + b * rows * E + r * E;
      for (std::size_t j = 0; j < E; ++j) {
        de[j] = a[b] * dg[b * E + j] + ds[b] * u[b * E + j];
        du[b * E + j] += ds[b] * e[j];
      }
      dk[b] += ds[b];
    }
  }

  for (std::size_t b = 0; b < nb; ++b) {
    const auto& e = ws.e[b];
    double* de = ws.d_e.data() + b * rows * E;
    for (std::size_t i = 0; i < rows * E; ++i) de[i] *= 1.0 - e[i] * e[i];
    kernels::affine_backward_params({rows, shape_.branch_in[b], E}, std::span<const double>(de, rows * E), ws.xb[b],
                                    grads[branch_w(b)].v, grads[branch_b(b)].v);
  }
}

void QNetwork::copy_params_from(const QNetwork& other) {
  if (!(shape_ == other.shape_) || params_.empty()) {
    *this = other;
    return;
  }
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i].v = other.params_[i].v;
}

bool QNetwork::finite() const {
  for (const auto& t : params_)
    for (double x : t.v)
      if (!std::isfinite(x)) return false;
  return true;
}

bool QNetwork::operator==(const QNetwork& other) const {
  if (!(shape_ == other.shape_) || params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].v != other.params_[i].v) return false;
  return true;
}

// Text format:
//   qnetwork 1
//   branches <n> <w0> ... ; embed <E> ; hidden <n> <h0> ... ; out <A>
//   tensor <name> <rows> <cols>
//   <rows*cols hex floats, one row per line>
//   end
void QNetwork::save(std::ostream& out) const {
  out << "qnetwork 1\n";
  out << "branches " << shape_.branch_in.size();
  for (auto w : shape_.branch_in) out << ' ' << w;
  out << "\nembed " << shape_.embed << "\nhidden " << shape_.hidden.size();
  for (auto w : shape_.hidden) out << ' ' << w;
  out << "\nout " << shape_.out << '\n';
  char buf[40];
  for (const auto& t : params_) {
    out << "tensor " << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (std::size_t r = 0; r < t.rows; ++r) {
      for (std::size_t c = 0; c < t.cols; ++c) {
        std::snprintf(buf, sizeof buf, "%a", t.v[r * t.cols + c]);
        out << (c ? " " : "") << buf;
      }
      out << '\n';
    }
  }
  out << "end\n";
}

namespace {
void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) throw std::runtime_error("checkpoint: expected '" + word + "', got '" + got + "'");
}
}  // namespace

QNetwork QNetwork::load(std::istream& in) {
  expect(in, "qnetwork");
  int version = 0;
  in >> version;
  if (version != 1) throw std::runtime_error("checkpoint: unsupported qnetwork version " + std::to_string(version));
  NetShape shape;
  std::size_t n = 0;
  expect(in, "branches");
  in >> n;
  shape.branch_in.resize(n);
  for (auto& w : shape.branch_in) in >> w;
  expect(in, "embed");
  in >> shape.embed;
  expect(in, "hidden");
  in >> n;
  shape.hidden.resize(n);
  for (auto& w : shape.hidden) in >> w;
  expect(in, "out");
  in >> shape.out;
  if (!in) throw std::runtime_error("checkpoint: malformed shape header");

  QNetwork net(shape, 0);
  for (auto& t : net.params_) {
    expect(in, "tensor");
    std::string name;
    std::size_t rows = 0, cols = 0;
    in >> name >> rows >> cols;
    if (name != t.name || rows != t.rows || cols != t.cols)
      throw std::runtime_error("checkpoint: tensor " + name + " does not match the declared shape");
    std::string tok;
    for (auto& x : t.v) {
      if (!(in >> tok)) throw std::runtime_error("checkpoint: truncated tensor " + name);
      char* end = nullptr;
      x = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str()) throw std::runtime_error("checkpoint: bad number '" + tok + "'");
    }
  }
  expect(in, "end");
  return net;
}

}  // namespace sfc::nn
