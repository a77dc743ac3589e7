#pragma once

#include "lirpg/param_vector.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace lirpg {

enum class ArchKind { tabular, linear, mlp };

/// Network architecture. `hidden` is only meaningful for mlp.
struct Arch {
  ArchKind kind = ArchKind::tabular;
  std::vector<int> hidden;

  friend bool operator==(const Arch&, const Arch&) = default;
};

/// "tabular", "linear", or "mlp:16,16".
std::string to_string(const Arch& arch);
Arch parse_arch(const std::string& s);

/// Parameter-free description of a map R^in -> R^out. Parameters live in a
/// separate flat vector so the same network can be evaluated at several
/// parameter points (theta and theta').
///
///   tabular: input must be one-hot; output is the row of a lookup table.
///   linear:  W x + b.
///   mlp:     tanh hidden layers, linear output layer.
class Network {
 public:
  Network() = default;
  Network(Arch arch, int input_dim, int output_dim);

  const Arch& arch() const { return arch_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const { return output_dim_; }
  Eigen::Index num_params() const { return num_params_; }
  std::vector<Slice> layout() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& params, const Eigen::VectorXd& x) const;

  /// grad += scale * (d out / d params)^T upstream. Returns forward output.
  Eigen::VectorXd backward(const Eigen::VectorXd& params, const Eigen::VectorXd& x, const Eigen::VectorXd& upstream,
                           Eigen::Ref<Eigen::VectorXd> grad, double scale = 1.0) const;

 private:
  struct Layer {
    int in = 0;
    int out = 0;
    Eigen::Index w_offset = 0;
    Eigen::Index b_offset = 0;
  };

  int one_hot_index(const Eigen::VectorXd& x) const;

  Arch arch_;
  int input_dim_ = 0;
  int output_dim_ = 0;
  Eigen::Index num_params_ = 0;
  std::vector<Layer> layers_;
};

}  // namespace lirpg
