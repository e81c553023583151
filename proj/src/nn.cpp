#include "signalbench/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace signalbench {

namespace {

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::Linear:
      return z;
    case Activation::Softmax: {
      Eigen::MatrixXd out(z.rows(), z.cols());
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        Eigen::VectorXd shifted = z.col(c).array() - z.col(c).maxCoeff();
        Eigen::VectorXd e = shifted.array().exp();
        out.col(c) = e / e.sum();
      }
      return out;
    }
  }
  throw std::logic_error("unknown activation");
}

// dLoss/dZ from dLoss/dA, using the activation output A.
Eigen::MatrixXd activation_backward(Activation act, const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& da) {
  switch (act) {
    case Activation::Relu:
      return da.cwiseProduct((a.array() > 0.0).cast<double>().matrix());
    case Activation::Linear:
      return da;
    case Activation::Softmax: {
      Eigen::MatrixXd dz(a.rows(), a.cols());
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        double dot = a.col(c).dot(da.col(c));
        dz.col(c) = a.col(c).cwiseProduct(da.col(c).array().matrix() -
                                          Eigen::VectorXd::Constant(a.rows(), dot));
      }
      return dz;
    }
  }
  throw std::logic_error("unknown activation");
}

}  // namespace

Mlp::Mlp(const std::vector<int>& sizes, const std::vector<Activation>& acts, std::uint64_t seed) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp needs at least an input and output size");
  if (acts.size() != sizes.size() - 1)
    throw std::invalid_argument("mlp needs one activation per layer");
  for (int s : sizes)
    if (s < 1) throw std::invalid_argument("mlp layer sizes must be positive");

  Rng rng(seed);
  layers_.reserve(acts.size());
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    Layer layer;
    int in = sizes[k], out = sizes[k + 1];
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    layer.W.resize(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.W(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
    layer.b = Eigen::VectorXd::Zero(out);
    layer.act = acts[k];
    layers_.push_back(std::move(layer));
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += static_cast<std::size_t>(l.W.size()) + l.b.size();
  return n;
}

bool Mlp::same_architecture(const Mlp& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].W.rows() != other.layers_[k].W.rows()) return false;
    if (layers_[k].W.cols() != other.layers_[k].W.cols()) return false;
    if (layers_[k].act != other.layers_[k].act) return false;
  }
  return true;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, ForwardCache* cache) const {
  if (layers_.empty()) throw std::logic_error("forward on an empty mlp");
  if (input.rows() != input_size())
    throw std::invalid_argument("mlp input has wrong dimension");
  if (cache) {
    cache->a.clear();
    cache->a.reserve(layers_.size() + 1);
    cache->a.push_back(input);
  }
  Eigen::MatrixXd x = input;
  for (const Layer& l : layers_) {
    Eigen::MatrixXd z = (l.W * x).colwise() + l.b;
    x = apply_activation(l.act, z);
    if (cache) cache->a.push_back(x);
  }
  return x;
}

Eigen::VectorXd Mlp::forward1(const Eigen::VectorXd& input) const {
  return forward(Eigen::MatrixXd(input)).col(0);
}

Eigen::MatrixXd Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad,
                              MlpGradients* grads) const {
  if (cache.a.size() != layers_.size() + 1)
    throw std::invalid_argument("forward cache does not match this mlp");
  if (output_grad.rows() != output_size() || output_grad.cols() != cache.a.back().cols())
    throw std::invalid_argument("output gradient shape does not match the cached batch");
  if (grads) {
    grads->dW.resize(layers_.size());
    grads->db.resize(layers_.size());
  }

  Eigen::MatrixXd da = output_grad;
  for (int k = static_cast<int>(layers_.size()) - 1; k >= 0; --k) {
    const Layer& l = layers_[k];
    Eigen::MatrixXd dz = activation_backward(l.act, cache.a[k + 1], da);
    if (grads) {
      grads->dW[k] = dz * cache.a[k].transpose();
      grads->db[k] = dz.rowwise().sum();
    }
    da = l.W.transpose() * dz;
  }
  return da;
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  g.dW.reserve(layers_.size());
  g.db.reserve(layers_.size());
  for (const Layer& l : layers_) {
    g.dW.push_back(Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()));
    g.db.push_back(Eigen::VectorXd::Zero(l.b.size()));
  }
  return g;
}

Optimizer::Optimizer(Method method, double learning_rate, double beta1, double beta2,
                     double epsilon)
    : method_(method), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  if (!(lr_ > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

void Optimizer::step(Mlp& net, const MlpGradients& grads) {
  auto& layers = net.layers();
  if (grads.dW.size() != layers.size() || grads.db.size() != layers.size())
    throw std::invalid_argument("gradient shape does not match the network");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (!grads.dW[k].allFinite() || !grads.db[k].allFinite())
      throw std::runtime_error("non-finite gradient: training diverged");
  }

  if (method_ == Method::Sgd) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
      layers[k].W -= lr_ * grads.dW[k];
      layers[k].b -= lr_ * grads.db[k];
    }
    return;
  }

  if (mW_.empty()) {
    for (const Layer& l : layers) {
      mW_.push_back(Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()));
      vW_.push_back(Eigen::MatrixXd::Zero(l.W.rows(), l.W.cols()));
      mb_.push_back(Eigen::VectorXd::Zero(l.b.size()));
      vb_.push_back(Eigen::VectorXd::Zero(l.b.size()));
    }
  }
  if (mW_.size() != layers.size())
    throw std::invalid_argument("optimizer state belongs to a different network");

  ++t_;
  double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < layers.size(); ++k) {
    mW_[k] = beta1_ * mW_[k] + (1.0 - beta1_) * grads.dW[k];
    vW_[k] = beta2_ * vW_[k] + (1.0 - beta2_) * grads.dW[k].cwiseProduct(grads.dW[k]);
    mb_[k] = beta1_ * mb_[k] + (1.0 - beta1_) * grads.db[k];
    vb_[k] = beta2_ * vb_[k] + (1.0 - beta2_) * grads.db[k].cwiseProduct(grads.db[k]);

    layers[k].W.array() -=
        lr_ * (mW_[k].array() / c1) / ((vW_[k].array() / c2).sqrt() + eps_);
    layers[k].b.array() -=
        lr_ * (mb_[k].array() / c1) / ((vb_[k].array() / c2).sqrt() + eps_);
  }
}

Mlp average_weights(const std::vector<Mlp>& nets) {
  if (nets.empty()) throw std::invalid_argument("average_weights needs at least one network");
  for (const Mlp& n : nets)
    if (!n.same_architecture(nets.front()))
      throw std::invalid_argument("average_weights: architecture mismatch");

  Mlp out = nets.front();
  auto& layers = out.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    for (std::size_t i = 1; i < nets.size(); ++i) {
      layers[k].W += nets[i].layers()[k].W;
      layers[k].b += nets[i].layers()[k].b;
    }
    layers[k].W /= static_cast<double>(nets.size());
    layers[k].b /= static_cast<double>(nets.size());
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'B', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("model file truncated");
  return v;
}

}  // namespace

void save_mlp(std::ostream& out, const Mlp& net) {
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const Layer& l : net.layers()) {
    write_pod(out, static_cast<std::uint32_t>(l.W.cols()));
    write_pod(out, static_cast<std::uint32_t>(l.W.rows()));
    write_pod(out, static_cast<std::uint8_t>(l.act));
  }
  for (const Layer& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.W.rows(); ++r)
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) write_pod(out, l.W(r, c));
    for (Eigen::Index i = 0; i < l.b.size(); ++i) write_pod(out, l.b(i));
  }
  if (!out) throw std::runtime_error("model write failed");
}

Mlp load_mlp(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a model file (bad magic)");
  auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) throw std::runtime_error("unsupported model file version");
  auto n_layers = read_pod<std::uint32_t>(in);
  if (n_layers == 0 || n_layers > 1000) throw std::runtime_error("model file corrupt");

  std::vector<int> sizes;
  std::vector<Activation> acts;
  for (std::uint32_t k = 0; k < n_layers; ++k) {
    auto in_dim = read_pod<std::uint32_t>(in);
    auto out_dim = read_pod<std::uint32_t>(in);
    auto act = read_pod<std::uint8_t>(in);
    if (act > 2) throw std::runtime_error("model file corrupt (bad activation)");
    if (k == 0) sizes.push_back(static_cast<int>(in_dim));
    if (!sizes.empty() && sizes.back() != static_cast<int>(in_dim))
      throw std::runtime_error("model file corrupt (dimension chain)");
    sizes.push_back(static_cast<int>(out_dim));
    acts.push_back(static_cast<Activation>(act));
  }

  Mlp net(sizes, acts, 0);
  for (Layer& l : net.layers()) {
    for (Eigen::Index r = 0; r < l.W.rows(); ++r)
      for (Eigen::Index c = 0; c < l.W.cols(); ++c) l.W(r, c) = read_pod<double>(in);
    for (Eigen::Index i = 0; i < l.b.size(); ++i) l.b(i) = read_pod<double>(in);
  }
  return net;
}

void save_mlp(const std::filesystem::path& path, const Mlp& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_mlp(out, net);
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_mlp(in);
}

}  // namespace signalbench
