#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace lirpg {

struct Slice {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
  friend bool operator==(const Slice&, const Slice&) = default;
};

/// Flat parameter vector with a named partition of its coordinates.
class ParamVector {
 public:
  ParamVector() = default;
  /// Zero-filled vector with the given layout. The slices must tile
  /// [0, total) in order without gaps.
  explicit ParamVector(std::vector<Slice> layout);
  ParamVector(std::vector<Slice> layout, Eigen::VectorXd values);

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }
  const std::vector<Slice>& layout() const { return layout_; }
  Eigen::Index size() const { return values_.size(); }

  const Slice& slice(const std::string& name) const;
  Eigen::VectorBlock<Eigen::VectorXd> segment(const std::string& name);
  Eigen::VectorBlock<const Eigen::VectorXd> segment(const std::string& name) const;

  ParamVector zeros_like() const { return ParamVector(layout_); }
  bool all_finite() const { return values_.allFinite(); }
  bool same_layout(const ParamVector& other) const { return layout_ == other.layout_; }

 private:
  std::vector<Slice> layout_;
  Eigen::VectorXd values_;
};

/// Text serialization with a layout header. Values are written as hex floats
/// so a write/read cycle is bit-exact:
///
///   params <name> <size> <num_slices>
///   slice <slice_name> <offset> <size>
///   ...
///   values <v0> <v1> ...
void write_params(std::ostream& os, const std::string& name, const ParamVector& p);
/// Reads one block written by write_params; throws std::runtime_error when the
/// name or shape disagrees with `expected` (pass an empty name to skip the check).
ParamVector read_params(std::istream& is, const std::string& expected_name);

/// Scales v in place so that its Euclidean norm is at most max_norm.
/// Returns the factor applied (1 when no clipping happened).
double clip_by_norm(Eigen::VectorXd& v, double max_norm);

}  // namespace lirpg
