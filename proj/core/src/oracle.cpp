#include "dflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

namespace dflow {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr std::size_t kMaxGenerators = 2000000;

bool cost_less(double a, double b) {
  if (std::isinf(b)) return a < b;
  return a < b - kTieTolerance * std::max(1.0, std::abs(b));
}

std::size_t factorial_capped(std::size_t n, std::size_t cap) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) {
    if (f > cap / i) return cap + 1;
    f *= i;
  }
  return f;
}

struct Generator {
  std::vector<std::int8_t> action;  // local place -> local place
  double cost = 0.0;
  Movement movement;
};

class StateGraph {
 public:
  StateGraph(const Tiling& t, const Box& region, DistanceMode mode, const OracleLimits& limits)
      : tiling_(t), region_(region) {
    if (!region.within(t)) throw DimensionError("oracle region outside tiling");
    places_ = region_indices(t, region);
    n_ = places_.size();
    if (n_ > 20) throw CapacityError("state space too large for the oracle");
    states_ = factorial_capped(n_, limits.max_states);
    if (states_ > limits.max_states)
      throw CapacityError("state space of " + std::to_string(n_) + "! exceeds the limit of " +
                          std::to_string(limits.max_states) + " states");
    fact_.assign(n_ + 1, 1);
    for (std::size_t i = 1; i <= n_; ++i) fact_[i] = fact_[i - 1] * i;
    if (mode == DistanceMode::S)
      build_s();
    else
      build_e(limits.max_array);
  }

  std::size_t size() const { return states_; }
  std::size_t local(std::size_t cube) const { return region_.rank_of(tiling_, cube); }
  std::size_t place(std::size_t local) const { return places_[local]; }
  std::size_t n() const { return n_; }
  const std::vector<Generator>& generators() const { return gens_; }

  std::size_t rank(const std::vector<std::int8_t>& s) const {
    std::size_t r = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t smaller = 0;
      for (std::size_t j = i + 1; j < n_; ++j)
        if (s[j] < s[i]) ++smaller;
      r += smaller * fact_[n_ - 1 - i];
    }
    return r;
  }

  std::vector<std::int8_t> unrank(std::size_t r) const {
    std::vector<std::int8_t> pool(n_), s(n_);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t f = fact_[n_ - 1 - i];
      const std::size_t k = r / f;
      r %= f;
      s[i] = pool[k];
      pool.erase(pool.begin() + static_cast<long>(k));
    }
    return s;
  }

 private:
  void add(std::vector<std::int8_t> action, Movement m) {
    const double c = movement_cost(tiling_, m);
    auto [it, fresh] = index_.emplace(action, gens_.size());
    if (fresh) {
      gens_.push_back({std::move(action), c, std::move(m)});
      if (gens_.size() > kMaxGenerators) throw CapacityError("too many oracle generators");
    } else if (cost_less(c, gens_[it->second].cost)) {
      gens_[it->second].cost = c;
      gens_[it->second].movement = std::move(m);
    }
  }

  std::vector<std::int8_t> identity() const {
    std::vector<std::int8_t> a(n_);
    std::iota(a.begin(), a.end(), 0);
    return a;
  }

  void build_s() {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if (are_adjacent(tiling_, places_[i], places_[j])) edges.emplace_back(i, j);
    std::vector<std::size_t> chosen;
    std::vector<bool> used(n_, false);
    auto rec = [&](auto&& self, std::size_t e) -> void {
      if (e == edges.size()) {
        if (chosen.empty()) return;
        auto action = identity();
        SMovement m;
        for (auto k : chosen) {
          const auto [i, j] = edges[k];
          std::swap(action[i], action[j]);
          m.pairs.emplace_back(places_[i], places_[j]);
        }
        add(std::move(action), m);
        return;
      }
      self(self, e + 1);
      const auto [i, j] = edges[e];
      if (!used[i] && !used[j]) {
        used[i] = used[j] = true;
        chosen.push_back(e);
        self(self, e + 1);
        chosen.pop_back();
        used[i] = used[j] = false;
      }
    };
    rec(rec, 0);
  }

  void build_e(int max_array) {
    struct Item {
      CoupleSequence seq;
      std::vector<std::size_t> cubes;  // local indices covered by the array
    };
    std::vector<Item> items;
    const int nu = tiling_.nu();
    for (int ax = 0; ax < nu; ++ax) {
      const int ext = region_.extent(ax);
      const int longest = max_array > 0 ? std::min(max_array, ext) : ext;
      for (std::size_t r = 0; r < n_; ++r) {
        const CubeId start = tiling_.coords(places_[r]);
        for (int len = 2; len <= longest; ++len) {
          if (start[ax] + len - 1 > region_.hi()[ax]) break;
          CubeId hi = start;
          hi[ax] += len - 1;
          const Box array(start, hi);
          std::vector<std::size_t> cubes;
          for (int o = 0; o < len; ++o) {
            CubeId c = start;
            c[ax] += o;
            cubes.push_back(local(tiling_.index(c)));
          }
          for (std::uint32_t mask = 1; mask < (1u << len); ++mask) {
            if (__builtin_popcount(mask) % 2 != 0) continue;
            std::vector<int> pos;
            for (int o = 0; o < len; ++o)
              if (mask & (1u << o)) pos.push_back(o);
            items.push_back({{array, pos}, cubes});
          }
        }
      }
    }
    std::vector<std::size_t> chosen;
    std::vector<bool> used(n_, false);
    auto rec = [&](auto&& self, std::size_t k) -> void {
      if (k == items.size()) {
        if (chosen.empty()) return;
        auto action = identity();
        EMovement m;
        for (auto i : chosen) {
          const auto& it = items[i];
          const auto& pos = it.seq.positions;
          for (std::size_t j = 0; j < pos.size() / 2; ++j)
            std::swap(action[it.cubes[static_cast<std::size_t>(pos[j])]],
                      action[it.cubes[static_cast<std::size_t>(pos[pos.size() - 1 - j])]]);
          m.sequences.push_back(it.seq);
        }
        add(std::move(action), m);
        return;
      }
      self(self, k + 1);
      const auto& it = items[k];
      if (std::none_of(it.cubes.begin(), it.cubes.end(), [&](std::size_t c) { return used[c]; })) {
        for (auto c : it.cubes) used[c] = true;
        chosen.push_back(k);
        self(self, k + 1);
        chosen.pop_back();
        for (auto c : it.cubes) used[c] = false;
      }
    };
    rec(rec, 0);
  }

  Tiling tiling_;
  Box region_;
  std::vector<std::size_t> places_;
  std::size_t n_ = 0;
  std::size_t states_ = 0;
  std::vector<std::size_t> fact_;
  std::vector<Generator> gens_;
  std::map<std::vector<std::int8_t>, std::size_t> index_;
};

struct Search {
  std::vector<double> dist;
  std::vector<std::uint16_t> steps;
  std::vector<std::int64_t> parent;
  std::vector<std::int32_t> via;
  std::size_t settled = 0;
};

Search dijkstra(const StateGraph& g, std::size_t source, std::optional<std::size_t> goal) {
  Search s;
  const std::size_t size = g.size();
  s.dist.assign(size, std::numeric_limits<double>::infinity());
  s.steps.assign(size, 0);
  s.parent.assign(size, -1);
  s.via.assign(size, -1);
  std::vector<bool> done(size, false);

  struct Entry {
    double cost;
    std::uint16_t steps;
    std::size_t rank;
  };
  auto later = [](const Entry& a, const Entry& b) {
    if (cost_less(a.cost, b.cost)) return false;
    if (cost_less(b.cost, a.cost)) return true;
    if (a.steps != b.steps) return a.steps > b.steps;
    return a.rank > b.rank;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(later)> pq(later);
  s.dist[source] = 0.0;
  pq.push({0.0, 0, source});
  const auto& gens = g.generators();
  std::vector<std::int8_t> next(g.n());
  while (!pq.empty()) {
    const Entry e = pq.top();
    pq.pop();
    if (done[e.rank]) continue;
    done[e.rank] = true;
    ++s.settled;
    if (goal && e.rank == *goal) break;
    const auto state = g.unrank(e.rank);
    for (std::size_t k = 0; k < gens.size(); ++k) {
      const auto& act = gens[k].action;
      for (std::size_t i = 0; i < state.size(); ++i) next[i] = act[static_cast<std::size_t>(state[i])];
      const std::size_t r = g.rank(next);
      if (done[r]) continue;
      const double c = s.dist[e.rank] + gens[k].cost;
      const auto st = static_cast<std::uint16_t>(s.steps[e.rank] + 1);
      const bool better = cost_less(c, s.dist[r]) || (!cost_less(s.dist[r], c) && st < s.steps[r]);
      if (better) {
        s.dist[r] = c;
        s.steps[r] = st;
        s.parent[r] = static_cast<std::int64_t>(e.rank);
        s.via[r] = static_cast<std::int32_t>(k);
        pq.push({c, st, r});
      }
    }
  }
  return s;
}

// Local state of the particles sitting in the region under p, labelled by sorted particle id.
std::vector<std::int8_t> local_state(const StateGraph& g, const Permutation& p, const std::vector<std::size_t>& ids) {
  std::vector<std::int8_t> s(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) s[i] = static_cast<std::int8_t>(g.local(p(ids[i])));
  return s;
}

}  // namespace

OracleResult exact_distance(const Permutation& p, const Permutation& q, DistanceMode mode, const OracleLimits& limits) {
  const Tiling& t = p.tiling();
  if (q.tiling() != t) throw DimensionError("permutations on different tilings");
  const Box region = limits.region ? *limits.region : Box::whole(t);
  const StateGraph g(t, region, mode, limits);

  const auto pinv = p.inverse_table();
  std::vector<std::size_t> ids;
  for (std::size_t r = 0; r < g.n(); ++r) ids.push_back(static_cast<std::size_t>(pinv[g.place(r)]));
  std::sort(ids.begin(), ids.end());
  for (std::size_t c = 0; c < t.size(); ++c) {
    const bool in_p = region.contains_index(t, p(c)), in_q = region.contains_index(t, q(c));
    if (in_p != in_q || (!in_p && p(c) != q(c)))
      throw PreconditionError("permutations differ outside the oracle region");
  }

  const std::size_t source = g.rank(local_state(g, p, ids));
  const std::size_t goal = g.rank(local_state(g, q, ids));
  const Search s = dijkstra(g, source, goal);

  std::vector<std::size_t> path;
  for (auto r = static_cast<std::int64_t>(goal); r != static_cast<std::int64_t>(source); r = s.parent[static_cast<std::size_t>(r)])
    path.push_back(static_cast<std::size_t>(s.via[static_cast<std::size_t>(r)]));
  std::reverse(path.begin(), path.end());
  OracleResult out{0.0, DiscreteFlow(t), s.settled};
  for (auto k : path) out.witness.push(g.generators()[k].movement);
  out.distance = out.witness.total_cost();
  return out;
}

std::vector<Permutation> region_permutations(const Tiling& t, const Box& region) {
  const auto places = region_indices(t, region);
  std::vector<std::size_t> order(places.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Permutation> out;
  do {
    std::vector<std::int32_t> target(t.size());
    std::iota(target.begin(), target.end(), 0);
    for (std::size_t i = 0; i < places.size(); ++i) target[places[i]] = static_cast<std::int32_t>(places[order[i]]);
    out.emplace_back(t, std::move(target));
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

EquivalenceReport equivalence_report(const Tiling& t, const std::vector<Permutation>& sample, const OracleLimits& limits) {
  const Box region = limits.region ? *limits.region : Box::whole(t);
  const StateGraph gs(t, region, DistanceMode::S, limits);
  const StateGraph ge(t, region, DistanceMode::E, limits);
  std::vector<std::size_t> ids = region_indices(t, region);
  const auto id = Permutation::identity(t);
  const std::size_t source = gs.rank(local_state(gs, id, ids));
  const Search ss = dijkstra(gs, source, std::nullopt);
  const Search se = dijkstra(ge, source, std::nullopt);

  EquivalenceReport rep;
  for (const auto& p : sample) {
    EquivalenceRow row{p};
    row.l2 = l2_to_identity(p);
    if (p.is_identity()) {
      row.skipped = true;
      rep.rows.push_back(std::move(row));
      continue;
    }
    for (std::size_t c = 0; c < t.size(); ++c)
      if (!region.contains_index(t, c) && p(c) != c) throw PreconditionError("sample permutation moves cubes outside the region");
    const std::size_t r = gs.rank(local_state(gs, p, ids));
    row.dist_s = ss.dist[r];
    row.dist_e = se.dist[r];
    row.holds = !cost_less(2.0 * row.dist_s, row.dist_e);
    rep.all_hold = rep.all_hold && row.holds;
    rep.max_ratio = std::max(rep.max_ratio, row.dist_s / row.dist_e);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace dflow
