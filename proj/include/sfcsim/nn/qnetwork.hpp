#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace sfc::nn {

struct NetShape {
  std::vector<std::size_t> branch_in;  // input width of each feature group
  std::size_t embed = 32;
  std::vector<std::size_t> hidden{128, 64};
  std::size_t out = 1;

  std::size_t input_width() const;
  bool operator==(const NetShape&) const = default;
};

struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::string n, std::size_t r, std::size_t c) : name(std::move(n)), rows(r), cols(c), v(r * c, 0.0) {}
  std::size_t size() const { return v.size(); }
};

/// Multi-branch Q-network.
///
///   e_b   = tanh(W_b x_b + c_b)                  one embedding per input branch
///   a     = softmax_b(u_b . e_b + k_b)           gating over branches
///   g     = concat_b(a_b e_b)
///   h_l   = relu(W_l h_{l-1} + b_l)
///   q     = W_o h_L + b_o
class QNetwork {
 public:
  // Scratch space for one forward/backward pass.
  struct Workspace {
    std::size_t rows = 0;
    std::vector<std::vector<double>> xb;  // per-branch inputs
    std::vector<std::vector<double>> e;   // per-branch embeddings
    std::vector<double> alpha;            // rows x branches
    std::vector<double> g;                // rows x (branches * embed)
    std::vector<std::vector<double>> h;   // hidden activations
    std::vector<double> q;                // rows x out
    // backward scratch
    std::vector<double> d_cur, d_prev, d_g;
    std::vector<double> d_e;
  };

  QNetwork() = default;
  /// Glorot-uniform weights, zero biases.
  QNetwork(NetShape shape, std::uint64_t seed);

  const NetShape& shape() const { return shape_; }
  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  std::size_t num_params() const;

  /// x is rows x input_width, branches laid out back to back.
  /// Throws std::invalid_argument on a width mismatch.
  void forward(std::span<const double> x, std::size_t rows, Workspace& ws) const;
  std::vector<double> forward(std::span<const double> x) const;

  /// Accumulates dLoss/dparam into `grads` for the batch last passed to forward(ws).
  void backward(Workspace& ws, std::span<const double> dq, std::vector<Tensor>& grads) const;
  std::vector<Tensor> zero_grads() const;

  void copy_params_from(const QNetwork& other);
  bool finite() const;
  bool operator==(const QNetwork& other) const;

  void save(std::ostream& out) const;
  static QNetwork load(std::istream& in);

 private:
  // Indices into params_.
  std::size_t branch_w(std::size_t b) const { return 2 * b; }
  std::size_t branch_b(std::size_t b) const { return 2 * b + 1; }
  std::size_t gate_u() const { return 2 * shape_.branch_in.size(); }
  std::size_t gate_k() const { return gate_u() + 1; }
  std::size_t layer_w(std::size_t l) const { return gate_k() + 1 + 2 * l; }
  std::size_t layer_b(std::size_t l) const { return layer_w(l) + 1; }

  NetShape shape_;
  std::vector<Tensor> params_;
};

}  // namespace sfc::nn
