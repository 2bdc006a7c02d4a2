#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hte/numerics.hpp"

namespace hte {

namespace {

// merge sort counting inversions; ties take the left element (not counted)
long long merge_count(std::vector<double>& v, std::vector<double>& buf,
                      std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += static_cast<long long>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

long long tied_pairs(const std::vector<double>& sorted) {
  long long t = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      t += static_cast<long long>(run) * static_cast<long long>(run - 1) / 2;
      run = 1;
    }
  }
  return t;
}

}  // namespace

// Knight's O(n log n) algorithm. The concordant-minus-discordant count S is
// integer-exact, so this path agrees exactly with pair enumeration.
double kendall_tau(const Vector& u, const Vector& v, KendallVariant variant) {
  const Eigen::Index n = u.size();
  if (n != v.size()) throw std::invalid_argument("kendall_tau: length mismatch");
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least 2 points");
  if (!u.allFinite() || !v.allFinite())
    throw std::invalid_argument("kendall_tau: non-finite input");

  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (u[static_cast<Eigen::Index>(a)] != u[static_cast<Eigen::Index>(b)])
      return u[static_cast<Eigen::Index>(a)] < u[static_cast<Eigen::Index>(b)];
    return v[static_cast<Eigen::Index>(a)] < v[static_cast<Eigen::Index>(b)];
  });

  std::vector<double> vs(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < vs.size(); ++i)
    vs[i] = v[static_cast<Eigen::Index>(order[i])];

  const long long n0 = static_cast<long long>(n) * (n - 1) / 2;

  // ties in u, and joint (u,v) ties, from the (u,v)-sorted sequence
  long long m1 = 0, m12 = 0;
  {
    std::size_t i = 0;
    while (i < vs.size()) {
      std::size_t j = i;
      while (j < vs.size() &&
             u[static_cast<Eigen::Index>(order[j])] == u[static_cast<Eigen::Index>(order[i])])
        ++j;
      const long long run = static_cast<long long>(j - i);
      m1 += run * (run - 1) / 2;
      std::size_t a = i;
      while (a < j) {
        std::size_t b = a;
        while (b < j && vs[b] == vs[a]) ++b;
        const long long r2 = static_cast<long long>(b - a);
        m12 += r2 * (r2 - 1) / 2;
        a = b;
      }
      i = j;
    }
  }

  std::vector<double> buf(vs.size());
  const long long swaps = merge_count(vs, buf, 0, vs.size());
  const long long m2 = tied_pairs(vs);

  if (m1 == n0 || m2 == n0) throw std::domain_error("zero-variance ranking");

  const long long s = n0 - m1 - m2 + m12 - 2 * swaps;
  if (variant == KendallVariant::TauA)
    return static_cast<double>(s) / static_cast<double>(n0);
  // perfect (anti)concordance is integer-detectable; return +-1 exactly
  if (m1 == m2) {
    if (s == n0 - m1) return 1.0;
    if (s == -(n0 - m1)) return -1.0;
  }
  return static_cast<double>(s) /
         (std::sqrt(static_cast<double>(n0 - m1)) * std::sqrt(static_cast<double>(n0 - m2)));
}

}  // namespace hte
