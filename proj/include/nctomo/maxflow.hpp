#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace nctomo {

/// Integer-capacity max-flow (Edmonds-Karp). Small graphs only.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : adj_(nodes) {}

  void add_arc(std::size_t from, std::size_t to, long capacity) {
    adj_[from].push_back(arcs_.size());
    arcs_.push_back({to, capacity});
    adj_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0});
  }

  /// Max flow from s to t, stopping early once `limit` is reached.
  long max_flow(std::size_t s, std::size_t t, long limit = std::numeric_limits<long>::max()) {
    long flow = 0;
    std::vector<std::ptrdiff_t> via(adj_.size());
    while (flow < limit) {
      std::fill(via.begin(), via.end(), -1);
      std::queue<std::size_t> q;
      q.push(s);
      via[s] = -2;
      while (!q.empty() && via[t] == -1) {
        const std::size_t v = q.front();
        q.pop();
        for (auto a : adj_[v])
          if (arcs_[a].cap > 0 && via[arcs_[a].to] == -1) {
            via[arcs_[a].to] = static_cast<std::ptrdiff_t>(a);
            q.push(arcs_[a].to);
          }
      }
      if (via[t] == -1) break;
      long push = limit - flow;
      for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to) push = std::min(push, arcs_[via[v]].cap);
      for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].cap -= push;
        arcs_[via[v] ^ 1].cap += push;
      }
      flow += push;
    }
    return flow;
  }

 private:
  struct Arc {
    std::size_t to;
    long cap;
  };
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Arc> arcs_;
};

}  // namespace nctomo
