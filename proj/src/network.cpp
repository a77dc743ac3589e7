#include "lirpg/network.hpp"

#include <sstream>
#include <stdexcept>

namespace lirpg {

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MutRowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

std::string to_string(const Arch& arch) {
  switch (arch.kind) {
    case ArchKind::tabular:
      return "tabular";
    case ArchKind::linear:
      return "linear";
    case ArchKind::mlp: {
      std::string out = "mlp:";
      for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(arch.hidden[i]);
      }
      return out;
    }
  }
  return "?";
}

Arch parse_arch(const std::string& s) {
  if (s == "tabular") return {ArchKind::tabular, {}};
  if (s == "linear") return {ArchKind::linear, {}};
  if (s.rfind("mlp:", 0) == 0) {
    Arch arch{ArchKind::mlp, {}};
    std::istringstream in(s.substr(4));
    std::string tok;
    while (std::getline(in, tok, ',')) {
      std::size_t used = 0;
      int width = 0;
      try {
        width = std::stoi(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || width < 1) throw std::invalid_argument("bad mlp width in '" + s + "'");
      arch.hidden.push_back(width);
    }
    if (arch.hidden.empty()) throw std::invalid_argument("mlp needs at least one hidden layer: '" + s + "'");
    return arch;
  }
  throw std::invalid_argument("unknown architecture '" + s + "'");
}

Network::Network(Arch arch, int input_dim, int output_dim)
    : arch_(std::move(arch)), input_dim_(input_dim), output_dim_(output_dim) {
  if (input_dim_ < 1 || output_dim_ < 1) throw std::invalid_argument("Network: dimensions must be positive");
  if (arch_.kind == ArchKind::tabular) {
    num_params_ = static_cast<Eigen::Index>(input_dim_) * output_dim_;
    return;
  }
  std::vector<int> widths{input_dim_};
  if (arch_.kind == ArchKind::mlp) {
    if (arch_.hidden.empty()) throw std::invalid_argument("Network: mlp needs hidden layers");
    widths.insert(widths.end(), arch_.hidden.begin(), arch_.hidden.end());
  }
  widths.push_back(output_dim_);
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    Layer l;
    l.in = widths[i];
    l.out = widths[i + 1];
    l.w_offset = offset;
    offset += static_cast<Eigen::Index>(l.in) * l.out;
    l.b_offset = offset;
    offset += l.out;
    layers_.push_back(l);
  }
  num_params_ = offset;
}

std::vector<Slice> Network::layout() const {
  if (arch_.kind == ArchKind::tabular) return {{"table", 0, num_params_}};
  std::vector<Slice> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const std::string prefix = layers_.size() == 1 ? "" : "layer" + std::to_string(i) + ".";
    out.push_back({prefix + "W", l.w_offset, static_cast<Eigen::Index>(l.in) * l.out});
    out.push_back({prefix + "b", l.b_offset, l.out});
  }
  return out;
}

int Network::one_hot_index(const Eigen::VectorXd& x) const {
  int idx = -1;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] == 1.0 && idx < 0) {
      idx = static_cast<int>(i);
    } else if (x[i] != 0.0) {
      idx = -2;
      break;
    }
  }
  if (idx < 0) throw std::invalid_argument("Network: tabular architecture needs one-hot input");
  return idx;
}

Eigen::VectorXd Network::forward(const Eigen::VectorXd& params, const Eigen::VectorXd& x) const {
  if (x.size() != input_dim_) throw std::invalid_argument("Network::forward: input dimension mismatch");
  if (params.size() != num_params_) throw std::invalid_argument("Network::forward: parameter count mismatch");
  if (arch_.kind == ArchKind::tabular) {
    return params.segment(static_cast<Eigen::Index>(one_hot_index(x)) * output_dim_, output_dim_);
  }
  Eigen::VectorXd h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    RowMajorMap w(params.data() + l.w_offset, l.out, l.in);
    Eigen::VectorXd z = w * h + params.segment(l.b_offset, l.out);
    h = (i + 1 < layers_.size()) ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  return h;
}

Eigen::VectorXd Network::backward(const Eigen::VectorXd& params, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& upstream, Eigen::Ref<Eigen::VectorXd> grad,
                                  double scale) const {
  if (x.size() != input_dim_) throw std::invalid_argument("Network::backward: input dimension mismatch");
  if (params.size() != num_params_ || grad.size() != num_params_) {
    throw std::invalid_argument("Network::backward: parameter count mismatch");
  }
  if (upstream.size() != output_dim_) throw std::invalid_argument("Network::backward: upstream size mismatch");

  if (arch_.kind == ArchKind::tabular) {
    const Eigen::Index off = static_cast<Eigen::Index>(one_hot_index(x)) * output_dim_;
    grad.segment(off, output_dim_) += scale * upstream;
    return params.segment(off, output_dim_);
  }

  // Forward pass keeping every layer's input.
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(layers_.size());
  Eigen::VectorXd h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    inputs.push_back(h);
    RowMajorMap w(params.data() + l.w_offset, l.out, l.in);
    Eigen::VectorXd z = w * h + params.segment(l.b_offset, l.out);
    h = (i + 1 < layers_.size()) ? Eigen::VectorXd(z.array().tanh()) : z;
  }
  const Eigen::VectorXd output = h;

  Eigen::VectorXd delta = scale * upstream;  // d/dz of the current layer
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const auto& l = layers_[k];
    MutRowMajorMap gw(grad.data() + l.w_offset, l.out, l.in);
    gw.noalias() += delta * inputs[k].transpose();
    grad.segment(l.b_offset, l.out) += delta;
    if (k == 0) break;
    RowMajorMap w(params.data() + l.w_offset, l.out, l.in);
    // inputs[k] is tanh of the previous pre-activation.
    delta = (w.transpose() * delta).array() * (1.0 - inputs[k].array().square());
  }
  return output;
}

}  // namespace lirpg
