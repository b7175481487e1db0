#include "pairit/fieldkit/sampling.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

#include "pairit/core/error.hpp"

namespace pairit::fieldkit {

namespace {

// Dinic max flow on a small bipartite network.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : adj_(n), level_(n), it_(n) {}

  int add_edge(int u, int v, int cap) {
    adj_[u].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({v, cap});
    adj_[v].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({u, 0});
    return static_cast<int>(edges_.size()) - 2;
  }

  int flow_on(int edge) const { return edges_[edge ^ 1].cap; }

  long run(int s, int t) {
    long total = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (int f = dfs(s, t, std::numeric_limits<int>::max())) total += f;
    }
    return total;
  }

 private:
  struct Edge {
    int to;
    int cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int id : adj_[u]) {
        const auto& e = edges_[id];
        if (e.cap > 0 && level_[e.to] < 0) {
          level_[e.to] = level_[u] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  int dfs(int u, int t, int pushed) {
    if (u == t) return pushed;
    for (auto& i = it_[u]; i < static_cast<int>(adj_[u].size()); ++i) {
      auto& e = edges_[adj_[u][i]];
      if (e.cap <= 0 || level_[e.to] != level_[u] + 1) continue;
      if (int f = dfs(e.to, t, std::min(pushed, e.cap))) {
        e.cap -= f;
        edges_[adj_[u][i] ^ 1].cap += f;
        return f;
      }
    }
    return 0;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<int> it_;
};

int arm_index(Arm a) { return a == Arm::HumanAI ? 1 : 0; }

// Even split of `total` over the strata, with the remainder given to the
// strata listed first in `order`.
std::array<int, kStrata> even_targets(int total, const std::vector<int>& order) {
  std::array<int, kStrata> out{};
  for (int s = 0; s < kStrata; ++s) out[s] = total / kStrata;
  for (int r = 0; r < total % kStrata; ++r) ++out[order[r]];
  return out;
}

struct ArmPick {
  std::vector<std::size_t> chosen;  // indices into ads
  std::array<int, kStrata> cells{};
};

// One arm: every team gets exactly one ad (phase 1), then `total - teams`
// teams get a second ad (phase 2), all within per-stratum caps.
std::optional<ArmPick> pick_arm(const std::vector<AdRecord>& ads, const std::vector<int>& strata,
                                const std::vector<std::size_t>& members, int total,
                                const std::array<int, kStrata>& caps, Rng& rng) {
  std::map<std::string, int> team_index;
  for (auto i : members) team_index.try_emplace(ads[i].teamId, static_cast<int>(team_index.size()));
  const int T = static_cast<int>(team_index.size());
  // pools[team][stratum] -> shuffled ad indices
  std::vector<std::array<std::vector<std::size_t>, kStrata>> pools(T);
  for (auto i : members) pools[team_index[ads[i].teamId]][strata[i]].push_back(i);
  for (auto& team : pools) {
    for (auto& cell : team) rng.shuffle(std::span(cell));
  }
  std::vector<int> team_order(T);
  std::iota(team_order.begin(), team_order.end(), 0);
  rng.shuffle(std::span(team_order));

  ArmPick pick;
  std::array<int, kStrata> used{};
  std::vector<std::array<int, kStrata>> taken(T, std::array<int, kStrata>{});

  auto phase = [&](int team_cap, int required, const std::array<int, kStrata>& cell_cap) {
    const int S = 0, sink = T + kStrata + 1;
    MaxFlow g(T + kStrata + 2);
    std::vector<std::array<int, kStrata>> edge(T);
    for (int t : team_order) {
      g.add_edge(S, 1 + t, team_cap);
      for (int s = 0; s < kStrata; ++s) {
        const int avail = static_cast<int>(pools[t][s].size()) - taken[t][s];
        edge[t][s] = avail > 0 ? g.add_edge(1 + t, 1 + T + s, avail) : -1;
      }
    }
    for (int s = 0; s < kStrata; ++s) g.add_edge(1 + T + s, sink, std::max(0, cell_cap[s] - used[s]));
    if (g.run(S, sink) < required) return false;
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < kStrata; ++s) {
        if (edge[t][s] < 0) continue;
        for (int f = g.flow_on(edge[t][s]); f > 0; --f) {
          pick.chosen.push_back(pools[t][s][taken[t][s]++]);
          ++used[s];
        }
      }
    }
    return true;
  };

  if (!phase(1, T, caps)) return std::nullopt;
  if (!phase(1, total - T, caps)) return std::nullopt;
  if (static_cast<int>(pick.chosen.size()) != total) return std::nullopt;
  pick.cells = used;
  return pick;
}

}  // namespace

std::vector<int> click_strata(const std::vector<AdRecord>& ads) {
  std::vector<int> out(ads.size(), -1);
  for (Arm arm : {Arm::HumanHuman, Arm::HumanAI}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ads.size(); ++i) {
      if (ads[i].arm == arm && !ads[i].flagged) idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (ads[a].click != ads[b].click) return ads[a].click < ads[b].click;
      return ads[a].adId < ads[b].adId;
    });
    const std::size_t n = idx.size();
    for (std::size_t r = 0; r < n; ++r) out[idx[r]] = static_cast<int>(r * kStrata / n);
  }
  return out;
}

StratifiedSample stratified_sample(const std::vector<AdRecord>& ads, std::size_t targetN, Rng& rng) {
  StratifiedSample out;
  const auto strata = click_strata(ads);
  std::array<std::vector<std::size_t>, 2> members;
  std::array<std::map<std::string, int>, 2> team_sizes;
  for (std::size_t i = 0; i < ads.size(); ++i) {
    if (ads[i].flagged) {
      ++out.removedFlagged;
      continue;
    }
    members[arm_index(ads[i].arm)].push_back(i);
    ++team_sizes[arm_index(ads[i].arm)][ads[i].teamId];
  }

  std::array<int, 2> lo{}, hi{};
  for (int a = 0; a < 2; ++a) {
    lo[a] = static_cast<int>(team_sizes[a].size());
    for (const auto& [_, n] : team_sizes[a]) hi[a] += std::min(n, 2);
  }
  const int N = static_cast<int>(targetN);
  if (N < lo[0] + lo[1]) {
    throw Error(ErrorCode::InfeasibleConstraints,
                "one ad per team needs " + std::to_string(lo[0] + lo[1]) + " ads, target is " + std::to_string(N));
  }
  if (N > hi[0] + hi[1]) {
    throw Error(ErrorCode::InfeasibleConstraints,
                "at most two ads per team allows " + std::to_string(hi[0] + hi[1]) + " ads, target is " +
                    std::to_string(N));
  }
  // As even as the team bounds allow.
  int hai = std::clamp(N / 2 + N % 2, lo[1], hi[1]);
  int hh = N - hai;
  if (hh < lo[0] || hh > hi[0]) {
    hh = std::clamp(hh, lo[0], hi[0]);
    hai = N - hh;
  }
  out.armTotals = {hh, hai};

  for (int a = 0; a < 2; ++a) {
    if (out.armTotals[a] == 0) continue;
    std::vector<int> order(kStrata);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    auto caps = even_targets(out.armTotals[a], order);
    std::optional<ArmPick> pick;
    // Exact balance first; loosen each cell by one step at a time.
    for (int slack = 0; slack <= out.armTotals[a] && !pick; ++slack) {
      auto c = caps;
      for (auto& x : c) x += slack;
      pick = pick_arm(ads, strata, members[a], out.armTotals[a], c, rng);
    }
    if (!pick) {
      throw Error(ErrorCode::InfeasibleConstraints,
                  std::string("no per-team assignment for arm ") + (a ? "HumanAI" : "HumanHuman"));
    }
    out.cells[a] = pick->cells;
    for (auto i : pick->chosen) out.adIds.push_back(ads[i].adId);
  }
  return out;
}

}  // namespace pairit::fieldkit
