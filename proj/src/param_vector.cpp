#include "lirpg/param_vector.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace lirpg {

namespace {

void check_layout(const std::vector<Slice>& layout) {
  Eigen::Index next = 0;
  for (const auto& s : layout) {
    if (s.offset != next || s.size < 0) {
      throw std::invalid_argument("ParamVector: slice '" + s.name + "' breaks the partition");
    }
    next += s.size;
  }
}

Eigen::Index total_size(const std::vector<Slice>& layout) {
  return layout.empty() ? 0 : layout.back().offset + layout.back().size;
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw std::runtime_error("read_params: bad number '" + tok + "'");
  return v;
}

void expect(std::istream& is, const std::string& word) {
  std::string tok;
  if (!(is >> tok) || tok != word) {
    throw std::runtime_error("read_params: expected '" + word + "', found '" + tok + "'");
  }
}

}  // namespace

ParamVector::ParamVector(std::vector<Slice> layout)
    : layout_(std::move(layout)), values_(Eigen::VectorXd::Zero(total_size(layout_))) {
  check_layout(layout_);
}

ParamVector::ParamVector(std::vector<Slice> layout, Eigen::VectorXd values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  check_layout(layout_);
  if (values_.size() != total_size(layout_)) throw std::invalid_argument("ParamVector: size does not match layout");
}

const Slice& ParamVector::slice(const std::string& name) const {
  for (const auto& s : layout_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("ParamVector: no slice named '" + name + "'");
}

Eigen::VectorBlock<Eigen::VectorXd> ParamVector::segment(const std::string& name) {
  const auto& s = slice(name);
  return values_.segment(s.offset, s.size);
}

Eigen::VectorBlock<const Eigen::VectorXd> ParamVector::segment(const std::string& name) const {
  const auto& s = slice(name);
  return values_.segment(s.offset, s.size);
}

void write_params(std::ostream& os, const std::string& name, const ParamVector& p) {
  os << "params " << name << ' ' << p.size() << ' ' << p.layout().size() << '\n';
  for (const auto& s : p.layout()) os << "slice " << s.name << ' ' << s.offset << ' ' << s.size << '\n';
  os << "values";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << ' ' << hexfloat(p.values()[i]);
  os << '\n';
}

ParamVector read_params(std::istream& is, const std::string& expected_name) {
  expect(is, "params");
  std::string name;
  Eigen::Index size = 0;
  std::size_t num_slices = 0;
  if (!(is >> name >> size >> num_slices)) throw std::runtime_error("read_params: truncated header");
  if (!expected_name.empty() && name != expected_name) {
    throw std::runtime_error("read_params: expected block '" + expected_name + "', found '" + name + "'");
  }
  std::vector<Slice> layout(num_slices);
  for (auto& s : layout) {
    expect(is, "slice");
    if (!(is >> s.name >> s.offset >> s.size)) throw std::runtime_error("read_params: truncated slice");
  }
  expect(is, "values");
  Eigen::VectorXd values(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error("read_params: truncated values");
    values[i] = parse_double(tok);
  }
  return ParamVector(std::move(layout), std::move(values));
}

double clip_by_norm(Eigen::VectorXd& v, double max_norm) {
  const double norm = v.norm();
  if (norm <= max_norm || norm == 0.0) return 1.0;
  const double scale = max_norm / norm;
  v *= scale;
  return scale;
}

}  // namespace lirpg
