#include "acerac/mlp.hpp"

#include "binary_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace acerac {

namespace {

std::uint64_t fingerprint(const VectorXd& v) {
  // Word-wise FNV-1a over the bit patterns.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    h ^= std::bit_cast<std::uint64_t>(v[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::array<char, 8> kMagic = {'A', 'C', 'M', 'L', 'P', '\0', '\0', '\1'};

}  // namespace

Mlp::Mlp(std::vector<int> widths, Activation activation)
    : widths_(std::move(widths)), activation_(activation) {
  if (widths_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output widths");
  for (int w : widths_) {
    if (w <= 0) throw std::invalid_argument("Mlp: layer widths must be positive");
  }
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    offsets_.push_back(param_count_);
    param_count_ += static_cast<Eigen::Index>(widths_[l]) * widths_[l + 1] + widths_[l + 1];
  }
  offsets_.push_back(param_count_);
}

VectorXd Mlp::init_params(Rng& rng) const {
  VectorXd p(param_count_);
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    for (Eigen::Index i = offsets_[l]; i < offsets_[l + 1]; ++i) p[i] = rng.uniform(-bound, bound);
  }
  return p;
}

void Mlp::check_params(const VectorXd& params) const {
  if (params.size() != param_count_) {
    throw std::invalid_argument("Mlp: parameter vector has length " +
                                std::to_string(params.size()) + ", expected " +
                                std::to_string(param_count_));
  }
}

void Mlp::check_trace(const VectorXd& params, const Trace& trace) const {
  check_params(params);
  if (trace.empty() || trace.activations_.size() != widths_.size() ||
      trace.params_size_ != params.size() || trace.params_hash_ != fingerprint(params)) {
    throw std::logic_error("Mlp: stale or foreign forward trace");
  }
}

namespace {

// 1 - 2 / (exp(2z) + 1) goes through Eigen's vectorized exp; std::tanh does
// not vectorize and dominated training time. Saturates cleanly at +-1.
MatrixXd fast_tanh(const MatrixXd& z) {
  return 1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0);
}

}  // namespace

template <typename Sink>
MatrixXd Mlp::run_forward(const VectorXd& params, const MatrixXd& x, Sink&& sink) const {
  check_params(params);
  if (x.rows() != input_dim()) {
    throw std::invalid_argument("Mlp: input has " + std::to_string(x.rows()) +
                                " rows, expected " + std::to_string(input_dim()));
  }
  MatrixXd a = x;
  const std::size_t layers = widths_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    Eigen::Map<const MatrixXd> w(params.data() + offsets_[l], out, in);
    Eigen::Map<const VectorXd> b(params.data() + offsets_[l] + out * in, out);
    sink(std::move(a));
    MatrixXd z = w * sink.last();
    z.colwise() += b;
    if (l + 1 < layers) z = fast_tanh(z);
    a = std::move(z);
  }
  return a;
}

namespace {

struct DropSink {
  MatrixXd held;
  void operator()(MatrixXd&& m) { held = std::move(m); }
  const MatrixXd& last() const { return held; }
};

struct TraceSink {
  std::vector<MatrixXd>* out;
  void operator()(MatrixXd&& m) { out->push_back(std::move(m)); }
  const MatrixXd& last() const { return out->back(); }
};

}  // namespace

VectorXd Mlp::forward(const VectorXd& params, const VectorXd& x) const {
  return forward_batch(params, MatrixXd(x)).col(0);
}

MatrixXd Mlp::forward_batch(const VectorXd& params, const MatrixXd& x) const {
  return run_forward(params, x, DropSink{});
}

MatrixXd Mlp::forward_batch(const VectorXd& params, const MatrixXd& x, Trace& trace) const {
  trace.activations_.clear();
  trace.activations_.reserve(widths_.size());
  MatrixXd y = run_forward(params, x, TraceSink{&trace.activations_});
  trace.activations_.push_back(y);
  trace.params_size_ = params.size();
  trace.params_hash_ = fingerprint(params);
  return y;
}

Mlp::Gradients Mlp::backward(const VectorXd& params, const Trace& trace, const MatrixXd& v,
                             bool want_input_grad) const {
  check_trace(params, trace);
  if (v.rows() != output_dim() || v.cols() != trace.batch()) {
    throw std::invalid_argument("Mlp: cotangent shape does not match output batch");
  }
  Gradients g;
  g.params = VectorXd::Zero(param_count_);
  const std::size_t layers = widths_.size() - 1;
  MatrixXd delta = v;  // d/d(pre-activation) of the current layer
  for (std::size_t l = layers; l-- > 0;) {
    const int in = widths_[l];
    const int out = widths_[l + 1];
    const MatrixXd& a_in = trace.activations_[l];
    Eigen::Map<MatrixXd> gw(g.params.data() + offsets_[l], out, in);
    Eigen::Map<VectorXd> gb(g.params.data() + offsets_[l] + out * in, out);
    gw.noalias() = delta * a_in.transpose();
    gb = delta.rowwise().sum();
    if (l == 0 && !want_input_grad) break;
    Eigen::Map<const MatrixXd> w(params.data() + offsets_[l], out, in);
    MatrixXd back = w.transpose() * delta;
    if (l > 0) {
      // a_in = tanh(z) for hidden layers
      back.array() *= 1.0 - a_in.array().square();
    } else {
      g.input = std::move(back);
      break;
    }
    delta = std::move(back);
  }
  return g;
}

VectorXd Mlp::vjp(const VectorXd& params, const Trace& trace, const MatrixXd& v) const {
  return backward(params, trace, v, false).params;
}

MatrixXd Mlp::grad_wrt_input(const VectorXd& params, const Trace& trace,
                             const MatrixXd& v) const {
  return backward(params, trace, v, true).input;
}

VectorXd Mlp::vjp(const VectorXd& params, const VectorXd& x, const VectorXd& v) const {
  Trace t;
  forward_batch(params, MatrixXd(x), t);
  return vjp(params, t, MatrixXd(v));
}

VectorXd Mlp::grad_wrt_input(const VectorXd& params, const VectorXd& x,
                             const VectorXd& v) const {
  Trace t;
  forward_batch(params, MatrixXd(x), t);
  return grad_wrt_input(params, t, MatrixXd(v)).col(0);
}

void save_params(std::ostream& os, const Mlp& net, const VectorXd& params) {
  if (params.size() != net.param_count()) {
    throw std::invalid_argument("save_params: parameter count does not match network");
  }
  os.write(kMagic.data(), kMagic.size());
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.activation()));
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(net.widths().size()));
  for (int w : net.widths()) io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(w));
  io::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    io::write_f64(os, params[i]);
  }
  if (!os) throw std::runtime_error("save_params: write failed");
}

std::pair<Mlp, VectorXd> load_params(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw std::runtime_error("load_params: not an ACMLP checkpoint");
  const auto act = io::read_le<std::uint32_t>(is);
  if (act != static_cast<std::uint32_t>(Activation::Tanh)) {
    throw std::runtime_error("load_params: unknown activation id " + std::to_string(act));
  }
  const auto nw = io::read_le<std::uint32_t>(is);
  if (nw < 2 || nw > 64) throw std::runtime_error("load_params: implausible layer count");
  std::vector<int> widths;
  for (std::uint32_t i = 0; i < nw; ++i) widths.push_back(static_cast<int>(io::read_le<std::uint32_t>(is)));
  Mlp net(widths, Activation::Tanh);
  const auto count = io::read_le<std::uint64_t>(is);
  if (count != static_cast<std::uint64_t>(net.param_count())) {
    throw std::runtime_error("load_params: parameter count does not match widths");
  }
  VectorXd params(net.param_count());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    params[i] = io::read_f64(is);
  }
  return {std::move(net), std::move(params)};
}

void save_params_file(const std::string& path, const Mlp& net, const VectorXd& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_params: cannot open " + path);
  save_params(os, net, params);
}

std::pair<Mlp, VectorXd> load_params_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_params: cannot open " + path);
  return load_params(is);
}

}  // namespace acerac
