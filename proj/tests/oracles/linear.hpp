#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace oracle {

struct Conductor {
  std::size_t a;
  std::size_t b;
  long double c;
};

/// Effective resistance between vertices s and t by Gaussian elimination with
/// partial pivoting on the Laplacian grounded at t, in extended precision.
inline long double resistance(std::size_t vertices, const std::vector<Conductor>& edges,
                              std::size_t s, std::size_t t) {
  std::vector<std::vector<long double>> lap(vertices, std::vector<long double>(vertices, 0));
  for (const auto& e : edges) {
    lap[e.a][e.a] += e.c;
    lap[e.b][e.b] += e.c;
    lap[e.a][e.b] -= e.c;
    lap[e.b][e.a] -= e.c;
  }
  std::vector<std::size_t> keep;
  for (std::size_t v = 0; v < vertices; ++v) {
    if (v != t) keep.push_back(v);
  }
  const std::size_t n = keep.size();
  std::vector<std::vector<long double>> m(n, std::vector<long double>(n + 1, 0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) m[r][c] = lap[keep[r]][keep[c]];
    m[r][n] = keep[r] == s ? 1 : 0;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    }
    std::swap(m[col], m[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const long double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::vector<long double> x(n, 0);
  for (std::size_t r = n; r-- > 0;) {
    long double acc = m[r][n];
    for (std::size_t c = r + 1; c < n; ++c) acc -= m[r][c] * x[c];
    x[r] = acc / m[r][r];
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (keep[r] == s) return x[r];
  }
  return 0;
}

}  // namespace oracle
