#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gshap/errors.hpp"

namespace gshap {

/// Width limit of a coalition bitmask.
inline constexpr int kMaxPlayers = 63;

/// Default refusal threshold for exact 2^P enumeration.
inline constexpr int kDefaultPlayerCap = 25;

/// A set of players (features or groups) stored as a bitmask.
struct Coalition {
  std::uint64_t members = 0;

  static constexpr Coalition empty() { return {}; }
  static constexpr Coalition grand(int player_count) {
    return {player_count >= 64 ? ~std::uint64_t{0}
                               : (std::uint64_t{1} << player_count) - 1};
  }
  static constexpr Coalition single(int player) {
    return {std::uint64_t{1} << player};
  }

  constexpr int size() const { return std::popcount(members); }
  constexpr bool contains(int player) const {
    return (members >> player) & 1U;
  }
  constexpr Coalition with(int player) const {
    return {members | (std::uint64_t{1} << player)};
  }
  constexpr Coalition without(int player) const {
    return {members & ~(std::uint64_t{1} << player)};
  }
  constexpr bool is_subset_of(Coalition other) const {
    return (members & ~other.members) == 0;
  }

  std::vector<int> indices() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint64_t m = members; m != 0; m &= m - 1) {
      out.push_back(std::countr_zero(m));
    }
    return out;
  }

  friend constexpr Coalition operator|(Coalition a, Coalition b) {
    return {a.members | b.members};
  }
  friend constexpr Coalition operator&(Coalition a, Coalition b) {
    return {a.members & b.members};
  }
  friend constexpr bool operator==(Coalition, Coalition) = default;
  friend constexpr auto operator<=>(Coalition, Coalition) = default;
};

inline void check_player_count(int player_count, int cap = kDefaultPlayerCap) {
  if (player_count < 1) {
    throw DomainError("player count must be at least 1, got " +
                      std::to_string(player_count));
  }
  if (player_count > kMaxPlayers) {
    throw CapacityError("player count " + std::to_string(player_count) +
                        " exceeds the 63-player coalition mask width");
  }
  if (player_count > cap) {
    throw CapacityError(
        "exact enumeration over " + std::to_string(player_count) +
        " players exceeds the cap of " + std::to_string(cap) +
        "; group the features and use groupShapley instead");
  }
}

/// All submasks of a fixed universe, in increasing numeric order. Stateless:
/// every call to begin() restarts the walk, so ranges can be shared freely.
class SubsetRange {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = Coalition;
    using difference_type = std::ptrdiff_t;
    using pointer = const Coalition*;
    using reference = Coalition;

    iterator() = default;
    iterator(std::uint64_t universe, std::uint64_t current, bool done)
        : universe_(universe), current_(current), done_(done) {}

    Coalition operator*() const { return {current_}; }
    iterator& operator++() {
      if (current_ == universe_) {
        done_ = true;
      } else {
        // Next submask in increasing order.
        current_ = (current_ - universe_) & universe_;
      }
      return *this;
    }
    iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) {
      if (a.done_ || b.done_) return a.done_ == b.done_;
      return a.current_ == b.current_;
    }

   private:
    std::uint64_t universe_ = 0;
    std::uint64_t current_ = 0;
    bool done_ = true;
  };

  explicit SubsetRange(Coalition universe) : universe_(universe.members) {}

  iterator begin() const { return {universe_, 0, false}; }
  iterator end() const { return {universe_, 0, true}; }
  std::uint64_t count() const {
    return std::uint64_t{1} << std::popcount(universe_);
  }
  Coalition universe() const { return {universe_}; }

 private:
  std::uint64_t universe_;
};

/// Coalitions of {0..player_count-1} that exclude `excluded_player`.
inline SubsetRange enumerate_subsets(int player_count, int excluded_player,
                                     int cap = kDefaultPlayerCap) {
  check_player_count(player_count, cap);
  if (excluded_player < 0 || excluded_player >= player_count) {
    throw DomainError("excluded player " + std::to_string(excluded_player) +
                      " outside 0.." + std::to_string(player_count - 1));
  }
  return SubsetRange(Coalition::grand(player_count).without(excluded_player));
}

/// Exact Shapley kernel weight |S|!(P-|S|-1)!/P!.
class ShapleyWeight {
 public:
  using Rational = boost::multiprecision::cpp_rational;

  explicit ShapleyWeight(Rational value) : value_(std::move(value)) {}

  const Rational& exact() const { return value_; }
  double to_double() const { return value_.convert_to<double>(); }

  friend bool operator==(const ShapleyWeight&, const ShapleyWeight&) = default;

 private:
  Rational value_;
};

namespace detail {
inline boost::multiprecision::cpp_int factorial(int n) {
  boost::multiprecision::cpp_int out = 1;
  for (int k = 2; k <= n; ++k) out *= k;
  return out;
}
}  // namespace detail

inline ShapleyWeight shapley_weight(int coalition_size, int player_count) {
  if (player_count < 1 || player_count > kMaxPlayers) {
    throw DomainError("player count must lie in 1..63, got " +
                      std::to_string(player_count));
  }
  if (coalition_size < 0 || coalition_size >= player_count) {
    throw DomainError("coalition size " + std::to_string(coalition_size) +
                      " must lie in 0.." + std::to_string(player_count - 1));
  }
  using boost::multiprecision::cpp_rational;
  cpp_rational w(detail::factorial(coalition_size) *
                 detail::factorial(player_count - coalition_size - 1));
  w /= cpp_rational(detail::factorial(player_count));
  return ShapleyWeight(std::move(w));
}

/// Weights for every coalition size 0..P-1, rounded once from the exact value.
inline std::vector<double> shapley_weight_table(int player_count) {
  std::vector<double> table(static_cast<std::size_t>(player_count));
  for (int s = 0; s < player_count; ++s) {
    table[static_cast<std::size_t>(s)] =
        shapley_weight(s, player_count).to_double();
  }
  return table;
}

}  // namespace gshap
