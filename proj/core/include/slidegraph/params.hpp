// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "slidegraph/autodiff.hpp"
#include "slidegraph/tensor.hpp"

namespace slidegraph {

struct NamedTensor {
  std::string name;
  Tensor value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Ordered, named collection of trainable tensors.
class ParameterSet {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return entries_.size(); }
  Tensor& operator[](std::size_t i) { return entries_.at(i).value; }
  const Tensor& operator[](std::size_t i) const { return entries_.at(i).value; }
  const std::string& name(std::size_t i) const { return entries_.at(i).name; }
  /// Throws ContractViolation when missing.
  std::size_t index_of(const std::string& name) const;
  const std::vector<NamedTensor>& entries() const { return entries_; }
  std::vector<NamedTensor>& entries() { return entries_; }
  std::size_t scalar_count() const;

  /// Register every parameter as a trainable leaf of `tape`, in order.
  std::vector<Var> bind(Tape& tape) const;
  /// Register every parameter as a constant of `tape`, in order.
  std::vector<Var> bind_constant(Tape& tape) const;

  bool same_layout(const ParameterSet& other) const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<NamedTensor> entries_;
};

}  // namespace slidegraph
