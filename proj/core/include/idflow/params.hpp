#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "idflow/tensor.hpp"

namespace idflow {

/// Named learnable tensors with stable (insertion) iteration order.
template <typename T>
class ModelParamsT {
 public:
  TensorT<T>& add(const std::string& name, TensorT<T> t) {
    if (index_.count(name)) throw Error(ErrorKind::Contract, "duplicate parameter: " + name);
    index_[name] = items_.size();
    items_.emplace_back(name, std::move(t));
    return items_.back().second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  TensorT<T>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::Contract, "unknown parameter: " + name);
    return items_[it->second].second;
  }
  const TensorT<T>& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::Contract, "unknown parameter: " + name);
    return items_[it->second].second;
  }

  size_t size() const { return items_.size(); }
  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  int64_t count_params() const {
    int64_t n = 0;
    for (const auto& [name, t] : items_) n += t.numel();
    return n;
  }

  void zero_grad() {
    for (auto& [name, t] : items_) t.zero_grad();
  }

  void set_requires_grad(bool rg) {
    for (auto& [name, t] : items_) t.set_requires_grad(rg);
  }

 private:
  std::vector<std::pair<std::string, TensorT<T>>> items_;
  std::unordered_map<std::string, size_t> index_;
};

using ModelParams = ModelParamsT<float>;

/// Total learnable scalar count.
template <typename T>
int64_t count_params(const ModelParamsT<T>& params) {
  return params.count_params();
}

// "IDN1" checkpoint container, little-endian:
//   magic "IDN1", u32 entry count, then per entry
//   { u16 name length, name bytes, u8 rank, u32 dims..., float32 data }.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace idflow
