#pragma once

#include <cstddef>
#include <vector>

#include "linear.hpp"

namespace oracle {

/// Minimum energy Σ f²/c over unit flows from s to t: a tree flow plus the
/// best combination of fundamental cycles. Assumes a connected network.
inline long double min_flow_energy(std::size_t vertices, const std::vector<Conductor>& edges,
                                   std::size_t s, std::size_t t) {
  const std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> incident(vertices);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e].a].push_back(e);
    incident[edges[e].b].push_back(e);
  }
  std::vector<std::size_t> parent(vertices, none), parent_edge(vertices, none), depth(vertices, 0);
  std::vector<bool> tree(edges.size(), false), seen(vertices, false);
  std::vector<std::size_t> queue{s};
  seen[s] = true;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const auto v = queue[q];
    for (const auto e : incident[v]) {
      const auto w = edges[e].a == v ? edges[e].b : edges[e].a;
      if (seen[w]) continue;
      seen[w] = true;
      parent[w] = v;
      parent_edge[w] = e;
      depth[w] = depth[v] + 1;
      tree[e] = true;
      queue.push_back(w);
    }
  }
  // Sign of traversing the tree edge from child v to its parent.
  auto up_sign = [&](std::size_t v) { return edges[parent_edge[v]].a == v ? 1.0L : -1.0L; };

  // Path flow into `chi` from x to y through the tree.
  auto route = [&](std::vector<long double>& chi, std::size_t x, std::size_t y) {
    while (x != y) {
      if (depth[x] >= depth[y]) {
        chi[parent_edge[x]] += up_sign(x);
        x = parent[x];
      } else {
        chi[parent_edge[y]] -= up_sign(y);
        y = parent[y];
      }
    }
  };

  std::vector<long double> f0(edges.size(), 0);
  route(f0, s, t);
  std::vector<std::vector<long double>> cycles;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (tree[e] || edges[e].a == edges[e].b) continue;
    std::vector<long double> chi(edges.size(), 0);
    chi[e] = 1;
    route(chi, edges[e].b, edges[e].a);
    cycles.push_back(std::move(chi));
  }

  const std::size_t k = cycles.size();
  std::vector<std::vector<long double>> m(k, std::vector<long double>(k + 1, 0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const long double r = 1 / edges[e].c;
      for (std::size_t j = 0; j < k; ++j) m[i][j] += r * cycles[i][e] * cycles[j][e];
      m[i][k] -= r * f0[e] * cycles[i][e];
    }
  }
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    }
    std::swap(m[col], m[piv]);
    for (std::size_t r = col + 1; r < k; ++r) {
      const long double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= k; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::vector<long double> z(k, 0);
  for (std::size_t r = k; r-- > 0;) {
    long double acc = m[r][k];
    for (std::size_t c = r + 1; c < k; ++c) acc -= m[r][c] * z[c];
    z[r] = acc / m[r][r];
  }
  long double energy = 0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    long double f = f0[e];
    for (std::size_t j = 0; j < k; ++j) f += z[j] * cycles[j][e];
    energy += f * f / edges[e].c;
  }
  return energy;
}

}  // namespace oracle
