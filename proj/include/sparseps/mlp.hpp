// Copyright 2026 The sparseps Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense multilayer perceptron with manual backpropagation, Adam, and the
// binary checkpoint format.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "sparseps/errors.hpp"
#include "sparseps/geometry.hpp"
#include "sparseps/image_io.hpp"

namespace sparseps {

enum class Activation : std::uint8_t { kRelu = 0, kSigmoid = 1, kLinear = 2 };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kLinear;
};

// Per-layer gradients, shaped like the model.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;

  double squared_norm() const {
    double s = 0.0;
    for (const auto& w : weight) s += w.squaredNorm();
    for (const auto& b : bias) s += b.squaredNorm();
    return s;
  }
};

// Intermediate values of one batched forward pass, kept for backward().
struct ForwardTape {
  std::vector<Eigen::MatrixXd> inputs;       // input of each layer
  std::vector<Eigen::MatrixXd> activations;  // output of each layer
  const Eigen::MatrixXd& output() const { return activations.back(); }
};

inline Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
  switch (a) {
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kSigmoid:
      return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case Activation::kLinear:
      return z;
  }
  return z;
}

class MlpModel {
 public:
  MlpModel() = default;

  // Layer sizes dims[0] -> dims[1] -> ... with one activation per layer.
  // Weights are uniform in +-sqrt(6 / (fan_in + fan_out)); biases start at 0.
  MlpModel(const std::vector<int>& dims, const std::vector<Activation>& activations, Rng& rng) {
    if (dims.size() < 2 || activations.size() != dims.size() - 1) {
      throw ShapeError("MlpModel: need one activation per layer");
    }
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
      const int in = dims[i], out = dims[i + 1];
      if (in <= 0 || out <= 0) throw ShapeError("MlpModel: layer sizes must be positive");
      const double limit = std::sqrt(6.0 / (in + out));
      std::uniform_real_distribution<double> init(-limit, limit);
      DenseLayer layer;
      layer.weight.resize(out, in);
      // Filled row by row so the draw order does not depend on storage order.
      for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) layer.weight(r, c) = init(rng);
      }
      layer.bias = Eigen::VectorXd::Zero(out);
      layer.activation = activations[i];
      layers_.push_back(std::move(layer));
    }
  }

  explicit MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { check_chain(); }

  int input_dim() const { return layers_.empty() ? 0 : int(layers_.front().weight.cols()); }
  int output_dim() const { return layers_.empty() ? 0 : int(layers_.back().weight.rows()); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += std::size_t(l.weight.size() + l.bias.size());
    return n;
  }

  // Flat view over all parameters: per layer, weights (column-major) then biases.
  double& parameter(std::size_t i) {
    for (auto& l : layers_) {
      if (i < std::size_t(l.weight.size())) return l.weight.data()[i];
      i -= std::size_t(l.weight.size());
      if (i < std::size_t(l.bias.size())) return l.bias[Eigen::Index(i)];
      i -= std::size_t(l.bias.size());
    }
    throw ShapeError("parameter index out of range");
  }

  static double gradient_at(const MlpGradients& g, std::size_t i) {
    for (std::size_t l = 0; l < g.weight.size(); ++l) {
      if (i < std::size_t(g.weight[l].size())) return g.weight[l].data()[i];
      i -= std::size_t(g.weight[l].size());
      if (i < std::size_t(g.bias[l].size())) return g.bias[l][Eigen::Index(i)];
      i -= std::size_t(g.bias[l].size());
    }
    throw ShapeError("gradient index out of range");
  }

  // Columns of x are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
    check_input(x);
    Eigen::MatrixXd a = x;
    for (const auto& l : layers_) a = activate((l.weight * a).colwise() + l.bias, l.activation);
    return a;
  }

  ForwardTape forward_tape(const Eigen::MatrixXd& x) const {
    check_input(x);
    ForwardTape tape;
    Eigen::MatrixXd a = x;
    for (const auto& l : layers_) {
      tape.inputs.push_back(a);
      a = activate((l.weight * a).colwise() + l.bias, l.activation);
      tape.activations.push_back(a);
    }
    return tape;
  }

  // Given dLoss/dOutput, returns parameter gradients and, when requested,
  // dLoss/dInput.
  MlpGradients backward(const ForwardTape& tape, const Eigen::MatrixXd& grad_output,
                        Eigen::MatrixXd* grad_input = nullptr) const {
    MlpGradients g;
    g.weight.resize(layers_.size());
    g.bias.resize(layers_.size());
    Eigen::MatrixXd delta = grad_output;
    for (std::size_t i = layers_.size(); i-- > 0;) {
      const auto& l = layers_[i];
      const auto& a = tape.activations[i];
      switch (l.activation) {
        case Activation::kRelu:
          delta = delta.cwiseProduct((a.array() > 0.0).cast<double>().matrix());
          break;
        case Activation::kSigmoid:
          delta = delta.cwiseProduct(a.cwiseProduct((1.0 - a.array()).matrix()));
          break;
        case Activation::kLinear:
          break;
      }
      g.weight[i] = delta * tape.inputs[i].transpose();
      g.bias[i] = delta.rowwise().sum();
      if (i > 0 || grad_input != nullptr) delta = l.weight.transpose() * delta;
    }
    if (grad_input != nullptr) *grad_input = std::move(delta);
    return g;
  }

  bool all_finite() const {
    for (const auto& l : layers_) {
      if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
  }

  friend bool operator==(const MlpModel& a, const MlpModel& b) {
    if (a.layers_.size() != b.layers_.size()) return false;
    for (std::size_t i = 0; i < a.layers_.size(); ++i) {
      const auto& x = a.layers_[i];
      const auto& y = b.layers_[i];
      if (x.activation != y.activation || x.weight.rows() != y.weight.rows() ||
          x.weight.cols() != y.weight.cols() || x.weight != y.weight || x.bias != y.bias) {
        return false;
      }
    }
    return true;
  }

 private:
  void check_chain() const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].bias.size() != layers_[i].weight.rows()) throw ShapeError("bias size mismatch");
      if (i > 0 && layers_[i].weight.cols() != layers_[i - 1].weight.rows()) {
        throw ShapeError("layer dimensions do not chain");
      }
    }
  }

  void check_input(const Eigen::MatrixXd& x) const {
    if (layers_.empty()) throw ShapeError("empty model");
    if (x.rows() != input_dim()) {
      throw ShapeError("model expects input dim " + std::to_string(input_dim()) + ", got " +
                       std::to_string(x.rows()));
    }
  }

  std::vector<DenseLayer> layers_;
};

class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(MlpModel& model, const MlpGradients& g) {
    auto& layers = model.layers();
    if (m_.weight.empty()) {
      for (const auto& l : layers) {
        m_.weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
        m_.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
      }
      v_ = m_;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, double(t_));
    const double c2 = 1.0 - std::pow(beta2_, double(t_));
    for (std::size_t i = 0; i < layers.size(); ++i) {
      update(layers[i].weight, m_.weight[i], v_.weight[i], g.weight[i], c1, c2);
      update(layers[i].bias, m_.bias[i], v_.bias[i], g.bias[i], c1, c2);
    }
  }

  long steps() const { return t_; }

 private:
  template <typename P>
  void update(P& param, P& m, P& v, const P& g, double c1, double c2) const {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  }

  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  MlpGradients m_, v_;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

// "SPLN", u32 version, u32 layer count, then per layer: u32 rows, u32 cols,
// u8 activation, rows*cols row-major float32 weights, rows float32 biases.
inline void save_checkpoint(const MlpModel& model, const std::string& path) {
  auto out = detail::open_out(path);
  out.write("SPLN", 4);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, std::uint32_t(model.layers().size()));
  for (const auto& l : model.layers()) {
    detail::put_u32(out, std::uint32_t(l.weight.rows()));
    detail::put_u32(out, std::uint32_t(l.weight.cols()));
    out.put(char(l.activation));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) detail::put_f32(out, float(l.weight(r, c)));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) detail::put_f32(out, float(l.bias[r]));
  }
  if (!out) throw IoError("write failed: " + path);
}

inline MlpModel load_checkpoint(const std::string& path) {
  auto in = detail::open_in(path);
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "SPLN") throw IoError(path + ": not a model checkpoint");
  try {
    const std::uint32_t version = detail::get_u32(in);
    if (version != kCheckpointVersion) throw IoError(path + ": unsupported checkpoint version");
    const std::uint32_t count = detail::get_u32(in);
    std::vector<DenseLayer> layers(count);
    for (auto& l : layers) {
      const std::uint32_t rows = detail::get_u32(in), cols = detail::get_u32(in);
      const int act = in.get();
      if (act < 0 || act > 2 || rows == 0 || cols == 0 || rows > (1u << 16) || cols > (1u << 16)) {
        throw IoError(path + ": corrupt layer header");
      }
      l.activation = Activation(act);
      l.weight.resize(rows, cols);
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = detail::get_f32(in);
      }
      l.bias.resize(rows);
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = detail::get_f32(in);
    }
    return MlpModel(std::move(layers));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace sparseps
