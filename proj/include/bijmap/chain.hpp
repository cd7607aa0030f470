#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bijmap/error.hpp"

namespace bijmap {

/// Canonical identity of a face: its vertex indices in increasing order.
using FaceKey = std::vector<int>;

/// Sorts `verts` into a FaceKey and returns the parity of the sorting
/// permutation (+1 even, -1 odd). Repeated vertices are a structural error.
inline std::pair<FaceKey, int> canonicalize(std::span<const int> verts) {
  FaceKey key(verts.begin(), verts.end());
  int sign = 1;
  // insertion sort, counting transpositions
  for (std::size_t i = 1; i < key.size(); ++i) {
    for (std::size_t j = i; j > 0 && key[j - 1] > key[j]; --j) {
      std::swap(key[j - 1], key[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < key.size(); ++i) {
    if (key[i - 1] == key[i]) throw StructuralError("face has a repeated vertex");
  }
  return {std::move(key), sign};
}

namespace detail {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw InputError("chain coefficient overflow");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw InputError("chain coefficient overflow");
  return r;
}

}  // namespace detail

/// Formal integer combination of l-faces. Coefficients are stored against the
/// canonical (sorted) vertex order of each face; zero terms are never stored.
class Chain {
 public:
  using Terms = std::map<FaceKey, std::int64_t>;

  explicit Chain(int dim = 0) : dim_(dim) {}

  /// The unit chain of one oriented face, given in its own vertex order.
  static Chain oriented_face(std::span<const int> verts) {
    Chain c(static_cast<int>(verts.size()) - 1);
    c.add_oriented(verts, 1);
    return c;
  }

  int dim() const { return dim_; }
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  std::int64_t coefficient(const FaceKey& key) const {
    auto it = terms_.find(key);
    return it == terms_.end() ? 0 : it->second;
  }

  /// Adds `coef` times the face with the given vertex order.
  void add_oriented(std::span<const int> verts, std::int64_t coef) {
    if (static_cast<int>(verts.size()) != dim_ + 1) {
      throw StructuralError("face size does not match chain dimension");
    }
    auto [key, sign] = canonicalize(verts);
    add_canonical(key, detail::checked_mul(sign, coef));
  }

  /// Adds `coef` to the coefficient of a face given by its canonical key.
  void add_canonical(const FaceKey& key, std::int64_t coef) {
    if (coef == 0) return;
    auto it = terms_.find(key);
    if (it == terms_.end()) {
      terms_.emplace(key, coef);
      return;
    }
    it->second = detail::checked_add(it->second, coef);
    if (it->second == 0) terms_.erase(it);
  }

  Chain& operator+=(const Chain& other) {
    check_dim(other);
    for (const auto& [key, coef] : other.terms_) add_canonical(key, coef);
    return *this;
  }

  Chain& operator-=(const Chain& other) {
    check_dim(other);
    for (const auto& [key, coef] : other.terms_) add_canonical(key, detail::checked_mul(-1, coef));
    return *this;
  }

  friend Chain operator+(Chain a, const Chain& b) { return a += b; }
  friend Chain operator-(Chain a, const Chain& b) { return a -= b; }

  friend Chain operator*(std::int64_t s, const Chain& c) {
    Chain r(c.dim_);
    for (const auto& [key, coef] : c.terms_) r.add_canonical(key, detail::checked_mul(s, coef));
    return r;
  }

  Chain operator-() const { return -1 * (*this); }

  bool operator==(const Chain& other) const {
    return dim_ == other.dim_ && terms_ == other.terms_;
  }

  /// Terms rewritten as (vertex order, coefficient) with the orientation flipped
  /// where needed so every coefficient is positive.
  std::vector<std::pair<std::vector<int>, std::int64_t>> oriented_terms() const {
    std::vector<std::pair<std::vector<int>, std::int64_t>> out;
    out.reserve(terms_.size());
    for (const auto& [key, coef] : terms_) {
      std::vector<int> verts = key;
      std::int64_t c = coef;
      if (c < 0) {
        if (verts.size() >= 2) {
          std::swap(verts[0], verts[1]);
          c = -c;
        }
      }
      out.emplace_back(std::move(verts), c);
    }
    return out;
  }

 private:
  void check_dim(const Chain& other) const {
    if (other.dim_ != dim_) throw StructuralError("adding chains of different dimension");
  }

  int dim_;
  Terms terms_;
};

/// Boundary of a chain with the alternating-sign face formula. For 0-chains the
/// result is the empty (-1)-chain carrying no terms; see is_cycle for how the
/// degree-zero augmentation is handled.
inline Chain boundary(const Chain& c) {
  if (c.dim() < 1) throw StructuralError("boundary of a 0-chain is not defined");
  Chain out(c.dim() - 1);
  for (const auto& [key, coef] : c.terms()) {
    FaceKey facet(key.size() - 1);
    for (std::size_t skip = 0; skip < key.size(); ++skip) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (i != skip) facet[k++] = key[i];
      }
      std::int64_t sign = (skip % 2 == 0) ? 1 : -1;
      out.add_canonical(facet, detail::checked_mul(sign, coef));
    }
  }
  return out;
}

/// True iff the chain has empty boundary. A 0-chain counts as a cycle when its
/// coefficients sum to zero (reduced chain complex), which is what makes
/// x_L - x_0 the boundary cycle of a polygonal line.
inline bool is_cycle(const Chain& c) {
  if (c.dim() == 0) {
    std::int64_t sum = 0;
    for (const auto& [key, coef] : c.terms()) sum = detail::checked_add(sum, coef);
    return sum == 0;
  }
  return boundary(c).empty();
}

}  // namespace bijmap
