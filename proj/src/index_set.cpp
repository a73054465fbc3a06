#include "dstlift/index_set.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace dstlift {

int IndexSet::check(int i) {
  if (i < 0 || i >= kMaxVars)
    throw std::out_of_range("variable ordinal " + std::to_string(i) + " outside [0, " + std::to_string(kMaxVars) + ")");
  return i;
}

std::string IndexSet::to_string() const {
  std::string s = "{";
  bool first = true;
  for_each([&](int i) {
    if (!first) s += ',';
    s += std::to_string(i);
    first = false;
  });
  return s + "}";
}

bool canonical_less(const IndexSet& a, const IndexSet& b) {
  int sa = a.size(), sb = b.size();
  if (sa != sb) return sa < sb;
  return a.elements() < b.elements();
}

namespace {

// Appends every size-k combination of `elems` (lexicographic) to out.
void combinations(const std::vector<int>& elems, int k, std::vector<IndexSet>& out) {
  const int n = static_cast<int>(elems.size());
  if (k > n) return;
  std::vector<int> pos(k);
  for (int i = 0; i < k; ++i) pos[i] = i;
  for (;;) {
    IndexSet s;
    for (int p : pos) s.insert(elems[p]);
    out.push_back(s);
    int i = k - 1;
    while (i >= 0 && pos[i] == n - k + i) --i;
    if (i < 0) return;
    ++pos[i];
    for (int j = i + 1; j < k; ++j) pos[j] = pos[j - 1] + 1;
  }
}

std::vector<IndexSet> all_up_to(const std::vector<int>& elems, int d) {
  std::vector<IndexSet> out;
  d = std::min<int>(d, static_cast<int>(elems.size()));
  for (int k = 0; k <= d; ++k) combinations(elems, k, out);
  return out;
}

}  // namespace

std::vector<IndexSet> index_sets_up_to(int n, int d) {
  if (n < 0 || n > IndexSet::kMaxVars) throw std::out_of_range("variable count out of range");
  std::vector<int> elems(n);
  for (int i = 0; i < n; ++i) elems[i] = i;
  return all_up_to(elems, d);
}

std::vector<IndexSet> subsets_of(const IndexSet& s) { return all_up_to(s.elements(), s.size()); }

std::vector<IndexSet> subsets_of(const IndexSet& s, int d) { return all_up_to(s.elements(), d); }

std::uint64_t count_index_sets(int n, int d) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  d = std::min(d, n);
  std::uint64_t total = 0;
  // binom(n, k) built incrementally with 128-bit intermediates
  unsigned __int128 c = 1;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) c = c * static_cast<unsigned>(n - k + 1) / static_cast<unsigned>(k);
    if (c > kMax || total > kMax - static_cast<std::uint64_t>(c)) return kMax;
    total += static_cast<std::uint64_t>(c);
  }
  return total;
}

}  // namespace dstlift
