// Exact integer network-flow kernel for the transport solver.
//
// Masses are quantized to kMassUnits integer units by largest-remainder
// rounding, so feasibility questions become bipartite max-flow with int64
// capacities and the negative-flow repair becomes a 0/1-cost min-cost flow.
// Scale rationale: per-entry rounding error is below 1e-13, so marginal
// drift stays under the 1e-10 transport tolerance, while any real
// infeasibility gap at the 1e-9 certificate margin maps to a shortfall of
// at least ~10^4 units, far above the kFeasibilitySlack threshold.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

namespace pwl::netflow {

constexpr std::int64_t kMassUnits = 10'000'000'000'000;  // 1e13
constexpr std::int64_t kFeasibilitySlack = 2048;

class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes) : adj_(nodes) {}

  int node_count() const { return static_cast<int>(adj_.size()); }

  // Returns the edge id; the paired reverse edge is id^1.
  int add_edge(int u, int v, std::int64_t cap, std::int64_t cost = 0) {
    int id = static_cast<int>(edges_.size());
    edges_.push_back({v, cap, cost, 0});
    edges_.push_back({u, 0, -cost, 0});
    adj_[u].push_back(id);
    adj_[v].push_back(id + 1);
    return id;
  }

  std::int64_t flow_on(int id) const { return edges_[id].flow; }

  std::int64_t max_flow(int s, int t) {
    std::int64_t total = 0;
    while (true) {
      auto parent = bfs_path(s, t);
      if (parent[t] < 0) break;
      std::int64_t push = std::numeric_limits<std::int64_t>::max();
      for (int v = t; v != s;) {
        const Edge& e = edges_[parent[v]];
        push = std::min(push, e.cap - e.flow);
        v = edges_[parent[v] ^ 1].to;
      }
      for (int v = t; v != s;) {
        edges_[parent[v]].flow += push;
        edges_[parent[v] ^ 1].flow -= push;
        v = edges_[parent[v] ^ 1].to;
      }
      total += push;
    }
    return total;
  }

  // Successive shortest augmenting paths with Dijkstra over reduced costs.
  // Requires all edge costs nonnegative. Returns {flow, cost}.
  std::pair<std::int64_t, std::int64_t> min_cost_max_flow(int s, int t) {
    for (const Edge& e : edges_)
      if (e.cost < 0 && e.cap > 0)
        throw std::logic_error("min-cost flow requires nonnegative costs");
    int n = node_count();
    std::vector<std::int64_t> potential(n, 0);
    std::int64_t flow = 0, cost = 0;
    while (true) {
      constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
      std::vector<std::int64_t> dist(n, kInf);
      std::vector<int> parent(n, -1);
      using Item = std::pair<std::int64_t, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      dist[s] = 0;
      heap.push({0, s});
      while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int id : adj_[u]) {
          const Edge& e = edges_[id];
          if (e.flow >= e.cap) continue;
          std::int64_t nd = d + e.cost + potential[u] - potential[e.to];
          if (nd < dist[e.to]) {
            dist[e.to] = nd;
            parent[e.to] = id;
            heap.push({nd, e.to});
          }
        }
      }
      if (parent[t] < 0) break;
      for (int v = 0; v < n; ++v)
        if (dist[v] < kInf) potential[v] += dist[v];
      std::int64_t push = std::numeric_limits<std::int64_t>::max();
      for (int v = t; v != s;) {
        const Edge& e = edges_[parent[v]];
        push = std::min(push, e.cap - e.flow);
        v = edges_[parent[v] ^ 1].to;
      }
      for (int v = t; v != s;) {
        edges_[parent[v]].flow += push;
        edges_[parent[v] ^ 1].flow -= push;
        cost += push * edges_[parent[v]].cost;
        v = edges_[parent[v] ^ 1].to;
      }
      flow += push;
    }
    return {flow, cost};
  }

  // Nodes reachable from s in the residual graph (for cut certificates).
  std::vector<bool> residual_reachable(int s) const {
    std::vector<bool> seen(node_count(), false);
    std::queue<int> q;
    seen[s] = true;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int id : adj_[u]) {
        const Edge& e = edges_[id];
        if (e.flow < e.cap && !seen[e.to]) {
          seen[e.to] = true;
          q.push(e.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    std::int64_t cap;
    std::int64_t cost;
    std::int64_t flow;
  };

  std::vector<int> bfs_path(int s, int t) const {
    std::vector<int> parent(node_count(), -1);
    std::queue<int> q;
    q.push(s);
    std::vector<bool> seen(node_count(), false);
    seen[s] = true;
    while (!q.empty() && !seen[t]) {
      int u = q.front();
      q.pop();
      for (int id : adj_[u]) {
        const Edge& e = edges_[id];
        if (e.flow < e.cap && !seen[e.to]) {
          seen[e.to] = true;
          parent[e.to] = id;
          q.push(e.to);
        }
      }
    }
    return parent;
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
};

// Largest-remainder quantization: nonnegative weights to integer units
// summing exactly to total. Zero weights stay zero.
inline std::vector<std::int64_t> quantize_masses(
    const std::vector<double>& weights, std::int64_t total = kMassUnits) {
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (sum <= 0) throw std::invalid_argument("cannot quantize zero mass");
  size_t n = weights.size();
  std::vector<std::int64_t> units(n, 0);
  std::vector<std::pair<double, size_t>> remainders;
  std::int64_t assigned = 0;
  for (size_t i = 0; i < n; ++i) {
    if (weights[i] < 0)
      throw std::invalid_argument("cannot quantize negative mass");
    if (weights[i] == 0) continue;
    double exact = weights[i] / sum * static_cast<double>(total);
    units[i] = static_cast<std::int64_t>(exact);
    assigned += units[i];
    remainders.push_back({exact - static_cast<double>(units[i]), i});
  }
  std::sort(remainders.begin(), remainders.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  std::int64_t leftover = total - assigned;
  for (size_t k = 0; leftover > 0; k = (k + 1) % remainders.size()) {
    ++units[remainders[k].second];
    --leftover;
  }
  return units;
}

}  // namespace pwl::netflow
