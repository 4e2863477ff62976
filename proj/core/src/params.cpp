// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/params.hpp"

#include "slidegraph/error.hpp"

namespace slidegraph {

std::size_t ParameterSet::add(std::string name, Tensor value) {
  for (const auto& e : entries_) require(e.name != name, [&] { return "duplicate parameter name: " + name; });
  entries_.push_back({std::move(name), std::move(value)});
  return entries_.size() - 1;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return i;
  throw ContractViolation("no parameter named " + name);
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

std::vector<Var> ParameterSet::bind(Tape& tape) const {
  std::vector<Var> vars;
  vars.reserve(entries_.size());
  for (const auto& e : entries_) vars.push_back(tape.variable(e.value));
  return vars;
}

std::vector<Var> ParameterSet::bind_constant(Tape& tape) const {
  std::vector<Var> vars;
  vars.reserve(entries_.size());
  for (const auto& e : entries_) vars.push_back(tape.constant(e.value));
  return vars;
}

bool ParameterSet::same_layout(const ParameterSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name != other.entries_[i].name || !entries_[i].value.same_shape(other.entries_[i].value))
      return false;
  return true;
}

}  // namespace slidegraph
