#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dstlift {

/// Finite set of variable ordinals, stored as a fixed 256-bit mask so that
/// union, subset and hashing are a handful of word operations.
class IndexSet {
 public:
  static constexpr int kMaxVars = 256;

  IndexSet() = default;
  IndexSet(std::initializer_list<int> elems) {
    for (int i : elems) insert(i);
  }
  static IndexSet from_elements(std::span<const int> elems) {
    IndexSet s;
    for (int i : elems) s.insert(i);
    return s;
  }
  /// Low `n` bits of `mask` as a set (n <= 64).
  static IndexSet from_mask(std::uint64_t mask) {
    IndexSet s;
    s.w_[0] = mask;
    return s;
  }

  void insert(int i) { w_[check(i) >> 6] |= bit(i); }
  void erase(int i) { w_[check(i) >> 6] &= ~bit(i); }
  bool contains(int i) const { return i >= 0 && i < kMaxVars && (w_[i >> 6] & bit(i)) != 0; }

  int size() const {
    int c = 0;
    for (auto w : w_) c += std::popcount(w);
    return c;
  }
  bool empty() const { return (w_[0] | w_[1] | w_[2] | w_[3]) == 0; }
  /// Largest element, or -1 for the empty set.
  int max_element() const {
    for (int k = 3; k >= 0; --k)
      if (w_[k]) return k * 64 + 63 - std::countl_zero(w_[k]);
    return -1;
  }

  IndexSet operator|(const IndexSet& o) const { return combine(o, [](auto a, auto b) { return a | b; }); }
  IndexSet operator&(const IndexSet& o) const { return combine(o, [](auto a, auto b) { return a & b; }); }
  /// Set difference.
  IndexSet operator-(const IndexSet& o) const { return combine(o, [](auto a, auto b) { return a & ~b; }); }
  IndexSet& operator|=(const IndexSet& o) { return *this = *this | o; }

  bool subset_of(const IndexSet& o) const { return (*this - o).empty(); }
  bool intersects(const IndexSet& o) const { return !(*this & o).empty(); }

  template <class F>
  void for_each(F&& f) const {
    for (int k = 0; k < 4; ++k)
      for (std::uint64_t w = w_[k]; w; w &= w - 1) f(k * 64 + std::countr_zero(w));
  }
  std::vector<int> elements() const {
    std::vector<int> out;
    for_each([&](int i) { out.push_back(i); });
    return out;
  }
  /// Low word of the mask; meaningful when every element is below 64.
  std::uint64_t low_mask() const { return w_[0]; }

  /// "{}" or "{0,3,7}".
  std::string to_string() const;

  friend bool operator==(const IndexSet& a, const IndexSet& b) { return a.w_ == b.w_; }
  friend bool operator!=(const IndexSet& a, const IndexSet& b) { return a.w_ != b.w_; }
  std::size_t hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (auto w : w_) h = (h ^ w) * 0xff51afd7ed558ccdull, h ^= h >> 32;
    return static_cast<std::size_t>(h);
  }

 private:
  static int check(int i);
  static std::uint64_t bit(int i) { return std::uint64_t{1} << (i & 63); }
  template <class Op>
  IndexSet combine(const IndexSet& o, Op op) const {
    IndexSet r;
    for (int k = 0; k < 4; ++k) r.w_[k] = op(w_[k], o.w_[k]);
    return r;
  }

  std::array<std::uint64_t, 4> w_{};
};

struct IndexSetHash {
  std::size_t operator()(const IndexSet& s) const { return s.hash(); }
};

/// Canonical order: by size, then lexicographically by sorted elements.
bool canonical_less(const IndexSet& a, const IndexSet& b);

/// All subsets of {0..n-1} of size at most d, in canonical order.
std::vector<IndexSet> index_sets_up_to(int n, int d);
/// All subsets of s, in canonical order.
std::vector<IndexSet> subsets_of(const IndexSet& s);
/// All subsets of s with at most d elements, in canonical order.
std::vector<IndexSet> subsets_of(const IndexSet& s, int d);
/// Number of subsets of an n-set of size at most d, saturating at UINT64_MAX.
std::uint64_t count_index_sets(int n, int d);

}  // namespace dstlift
