#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "acerac/rng.hpp"

namespace acerac {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation : std::uint32_t { Tanh = 0 };

/// Fully connected network with tanh hidden layers and a linear output.
///
/// The network object only describes the architecture; parameters live in a
/// flat vector owned by the caller. Layer l occupies a column-major
/// (out x in) weight block followed by its out biases.
///
/// Batched calls take one sample per column.
class Mlp {
 public:
  /// Intermediates of a batched forward pass, consumed by the backward
  /// routines. Tied to the parameter vector that produced it.
  class Trace {
   public:
    bool empty() const { return activations_.empty(); }
    Eigen::Index batch() const { return empty() ? 0 : activations_.front().cols(); }
    const MatrixXd& input() const { return activations_.front(); }
    const MatrixXd& output() const { return activations_.back(); }

   private:
    friend class Mlp;
    std::vector<MatrixXd> activations_;
    Eigen::Index params_size_ = 0;
    std::uint64_t params_hash_ = 0;
  };

  struct Gradients {
    VectorXd params;  // summed over the batch
    MatrixXd input;   // one column per sample; empty unless requested
  };

  explicit Mlp(std::vector<int> widths, Activation activation = Activation::Tanh);

  const std::vector<int>& widths() const { return widths_; }
  Activation activation() const { return activation_; }
  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  Eigen::Index param_count() const { return param_count_; }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  VectorXd init_params(Rng& rng) const;

  VectorXd forward(const VectorXd& params, const VectorXd& x) const;
  MatrixXd forward_batch(const VectorXd& params, const MatrixXd& x) const;
  MatrixXd forward_batch(const VectorXd& params, const MatrixXd& x, Trace& trace) const;

  /// J^T v for the parameter Jacobian, summed over columns of v.
  /// Throws std::logic_error if trace was produced by other parameters.
  Gradients backward(const VectorXd& params, const Trace& trace, const MatrixXd& v,
                     bool want_input_grad) const;

  VectorXd vjp(const VectorXd& params, const Trace& trace, const MatrixXd& v) const;
  MatrixXd grad_wrt_input(const VectorXd& params, const Trace& trace, const MatrixXd& v) const;

  /// Single-sample conveniences that run their own forward pass.
  VectorXd vjp(const VectorXd& params, const VectorXd& x, const VectorXd& v) const;
  VectorXd grad_wrt_input(const VectorXd& params, const VectorXd& x, const VectorXd& v) const;

  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.widths_ == b.widths_ && a.activation_ == b.activation_;
  }

 private:
  void check_params(const VectorXd& params) const;
  void check_trace(const VectorXd& params, const Trace& trace) const;
  template <typename Sink>
  MatrixXd run_forward(const VectorXd& params, const MatrixXd& x, Sink&& sink) const;

  std::vector<int> widths_;
  Activation activation_;
  std::vector<Eigen::Index> offsets_;
  Eigen::Index param_count_ = 0;
};

/// Checkpoint format, little-endian:
///   8 bytes   magic "ACMLP\0\0\1"
///   u32       activation id
///   u32       number of widths L, then L x u32 widths
///   u64       parameter count P, then P x f64 parameters
void save_params(std::ostream& os, const Mlp& net, const VectorXd& params);
std::pair<Mlp, VectorXd> load_params(std::istream& is);
void save_params_file(const std::string& path, const Mlp& net, const VectorXd& params);
std::pair<Mlp, VectorXd> load_params_file(const std::string& path);

}  // namespace acerac
