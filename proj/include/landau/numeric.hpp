#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace landau {

/// Deterministic pairwise (tree) summation; result depends only on the input order.
inline double tree_sum(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return tree_sum(xs.first(half)) + tree_sum(xs.subspan(half));
}

/// Mean and standard error of a sample.
struct SampleStats {
  double mean{0.0};
  double variance{0.0};  // unbiased
  double std_error{0.0};
  std::size_t count{0};
};

inline SampleStats sample_stats(std::span<const double> xs) {
  SampleStats st;
  st.count = xs.size();
  if (xs.empty()) return st;
  st.mean = tree_sum(xs) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    std::vector<double> dev(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) dev[k] = (xs[k] - st.mean) * (xs[k] - st.mean);
    st.variance = tree_sum(dev) / static_cast<double>(xs.size() - 1);
    st.std_error = std::sqrt(st.variance / static_cast<double>(xs.size()));
  }
  return st;
}

}  // namespace landau
