#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "signalbench/rng.hpp"

namespace signalbench {

enum class Activation : std::uint8_t { Relu = 0, Linear = 1, Softmax = 2 };

struct Layer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;  // out
  Activation act = Activation::Linear;
};

// Per-layer activations from one forward pass, kept for the backward pass.
// a[0] is the input batch; a[k+1] the output of layer k. Columns are samples.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> a;
};

struct MlpGradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
};

// Dense multilayer perceptron in double precision. Batched: inputs and
// gradients are matrices whose columns are independent samples, so one
// forward/backward covers a whole minibatch.
class Mlp {
 public:
  Mlp() = default;

  // sizes = {in, h1, ..., out}; acts has one entry per layer (sizes.size()-1).
  // Weights ~ uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from the seed; biases 0.
  Mlp(const std::vector<int>& sizes, const std::vector<Activation>& acts, std::uint64_t seed);

  int input_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().W.cols()); }
  int output_size() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().W.rows()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t parameter_count() const;
  bool same_architecture(const Mlp& other) const;

  // Forward pass over a batch (rows = input_size, cols = samples). When cache
  // is non-null it is filled for a later backward call.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, ForwardCache* cache = nullptr) const;
  Eigen::VectorXd forward1(const Eigen::VectorXd& input) const;

  // Reverse-mode pass: output_grad is dLoss/dOutput for the batch the cache
  // was built from (loss summed over columns). Returns dLoss/dInput, which
  // lets a trunk and its heads compose. grads may be null to skip parameter
  // gradient accumulation.
  Eigen::MatrixXd backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad,
                           MlpGradients* grads) const;

  MlpGradients zero_gradients() const;

 private:
  std::vector<Layer> layers_;
};

// Plain gradient descent or adaptive-moment estimation. step() throws on
// non-finite gradients so a diverging run aborts loudly instead of silently
// poisoning the weights.
class Optimizer {
 public:
  enum class Method { Sgd, Adam };

  explicit Optimizer(Method method = Method::Adam, double learning_rate = 0.001,
                     double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  void step(Mlp& net, const MlpGradients& grads);
  double learning_rate() const { return lr_; }
  Method method() const { return method_; }

 private:
  Method method_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> mW_, vW_;
  std::vector<Eigen::VectorXd> mb_, vb_;
};

// Element-wise arithmetic mean of identically shaped networks.
Mlp average_weights(const std::vector<Mlp>& nets);

// Bounded FIFO with uniform sampling (with replacement).
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

  // Logical index: 0 is the oldest surviving item.
  const T& operator[](std::size_t i) const { return items_[(head_ + i) % items_.size()]; }

  std::vector<T> sample(std::size_t k, Rng& rng) const {
    if (items_.empty()) throw std::logic_error("cannot sample an empty replay buffer");
    std::vector<T> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(items_[rng.uniform_int(items_.size())]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // insertion point once full == oldest element
  std::vector<T> items_;
};

// Flat little-endian binary model format (documented in the README):
//   magic "SBNN", u32 version, u32 layer count,
//   per layer: u32 in, u32 out, u8 activation,
//   then per layer: weights row-major (out*in doubles), biases (out doubles).
void save_mlp(std::ostream& out, const Mlp& net);
void save_mlp(const std::filesystem::path& path, const Mlp& net);
Mlp load_mlp(std::istream& in);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace signalbench
