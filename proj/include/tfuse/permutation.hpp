#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "tfuse/error.hpp"

namespace tfuse {

/// A bijection on {0, ..., n-1}. `at(k)` is the index visited at ordered
/// position k.
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (std::size_t v : order_) {
      if (v >= order_.size() || seen[v]) throw DomainError("Permutation: not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    return Permutation(std::move(order));
  }

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t at(std::size_t k) const { return order_.at(k); }
  std::span<const std::size_t> order() const noexcept { return order_; }

  template <typename T>
  std::vector<T> apply(std::span<const T> values) const {
    if (values.size() != order_.size()) throw DimensionError("Permutation::apply: size mismatch");
    std::vector<T> out(values.size());
    for (std::size_t k = 0; k < order_.size(); ++k) out[k] = values[order_[k]];
    return out;
  }

  /// Inverse of apply: scatters ordered values back to original positions.
  template <typename T>
  std::vector<T> unapply(std::span<const T> ordered) const {
    if (ordered.size() != order_.size()) throw DimensionError("Permutation::unapply: size mismatch");
    std::vector<T> out(ordered.size());
    for (std::size_t k = 0; k < order_.size(); ++k) out[order_[k]] = ordered[k];
    return out;
  }

  bool operator==(const Permutation&) const = default;

 private:
  std::vector<std::size_t> order_;
};

/// Ascending rank order, ties broken by original index.
inline Permutation rank_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return Permutation(std::move(order));
}

/// Pilot order from the responses.
inline Permutation pilot_rank(std::span<const double> y) { return rank_order(y); }

/// Working order refreshed from the current theta.
inline Permutation rank_update(std::span<const double> theta) { return rank_order(theta); }

}  // namespace tfuse
