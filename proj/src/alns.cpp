#include "platoon/alns.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "platoon/errors.hpp"

namespace platoon {

namespace {

constexpr double kEps = 1e-9;

const char* const kRemovalNames[] = {"remove_worst", "remove_random", "remove_platoon_nonexchange",
                                     "remove_platoon_any", "remove_exchanged"};
const char* const kInsertionNames[] = {"insert_solo_sp_time",     "insert_solo_min_cost",
                                       "insert_solo_regret",      "insert_pairwise_sp_time",
                                       "insert_pairwise_min_cost", "insert_pairwise_regret",
                                       "insert_into_platoon"};
const char* const kSwapNames[] = {"swap_charge_amount", "swap_leading_ratio"};

std::size_t roulette(const std::vector<double>& weights, Rng& rng) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double x = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x < weights[i]) return i;
    x -= weights[i];
  }
  // Rounding left x at the top edge: last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

std::vector<TruckIndex> present(const Solution& sol) {
  std::vector<TruckIndex> out;
  for (TruckIndex k = 0; k < sol.num_trucks(); ++k) {
    if (sol.has(k)) out.push_back(k);
  }
  return out;
}

}  // namespace

void AlnsConfig::validate() const {
  auto bad = [](const char* what) { throw InputError(ErrorCode::invalid_parameter, what); };
  if (!(lambda > 0.0)) bad("lambda must be positive");
  if (nu < 1) bad("nu must be positive");
  if (!(delta1 > 0.0 && delta2 > 0.0 && delta3 > 0.0)) bad("scores must be positive");
  if (!(reaction > 0.0 && reaction <= 1.0)) bad("reaction factor outside (0,1]");
  if (!(initial_temperature > 0.0)) bad("initial temperature must be positive");
  if (!(cooling > 0.0 && cooling < 1.0)) bad("cooling rate outside (0,1)");
  if (kappa_min < 1) bad("kappa_min must be positive");
  if (!(kappa_fraction > 0.0)) bad("kappa fraction must be positive");
  if (!(time_limit_s > 0.0)) bad("time limit must be positive");
  if (no_improve_limit < 1) bad("non-improving limit must be positive");
  if (!(swap_probability >= 0.0 && swap_probability <= 1.0)) bad("swap probability outside [0,1]");
}

std::vector<double> OperatorPool::probabilities(double lambda) const {
  std::vector<double> p(ops.size());
  if (ops.empty()) return p;
  double top = ops.front().weight;
  for (const auto& op : ops) top = std::max(top, op.weight);
  double sum = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    p[i] = std::exp(lambda * (ops[i].weight - top));
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

OperatorPool make_pool(PoolKind kind) {
  OperatorPool pool;
  pool.kind = kind;
  auto fill = [&](const auto& names) {
    for (const char* n : names) pool.ops.push_back(OperatorStats{n, 1.0, 0.0, 0});
  };
  switch (kind) {
    case PoolKind::removal: fill(kRemovalNames); break;
    case PoolKind::insertion: fill(kInsertionNames); break;
    case PoolKind::swap: fill(kSwapNames); break;
  }
  return pool;
}

std::size_t select_operator(const OperatorPool& pool, double lambda, Rng& rng) {
  if (pool.ops.empty()) throw std::invalid_argument("empty operator pool");
  return roulette(pool.probabilities(lambda), rng);
}

void update_weights(OperatorPool& pool, double reaction) {
  for (auto& op : pool.ops) {
    op.weight = (1.0 - reaction) * op.weight + reaction * op.score;
    op.score = 0.0;
  }
}

bool accept(double candidate_cost, double incumbent_cost, double temperature, Rng& rng) {
  const double delta = candidate_cost - incumbent_cost;
  if (delta <= 0.0) return true;
  return rng.uniform() < std::exp(-delta / temperature);
}

std::size_t draw_kappa(std::size_t trucks, const AlnsConfig& config, Rng& rng) {
  if (trucks < 2) return trucks;
  const auto lo = static_cast<std::int64_t>(config.kappa_min);
  const auto hi = std::max<std::int64_t>(lo, static_cast<std::int64_t>(std::floor(config.kappa_fraction *
                                                                                    static_cast<double>(trucks))));
  return std::min<std::size_t>(trucks, static_cast<std::size_t>(rng.uniform_int(lo, hi)));
}

// ---------------------------------------------------------------------------

Operators::Operators(const Instance& instance, const Preprocessed& pre, const AlnsConfig& config)
    : inst_(instance), pre_(pre), config_(config), inserter_(instance, pre) {}

std::vector<std::pair<PlatoonId, std::vector<TruckIndex>>> Operators::platoons(const Solution& sol) {
  std::map<PlatoonId, std::vector<TruckIndex>> members;
  for (const auto& [key, group] : sol.groups()) {
    if (group.size() < 2) continue;
    auto& m = members[key.platoon];
    for (const Member& mb : group) m.push_back(mb.truck);
  }
  std::vector<std::pair<PlatoonId, std::vector<TruckIndex>>> out;
  for (auto& [id, m] : members) {
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    out.emplace_back(id, std::move(m));
  }
  return out;
}

std::vector<std::size_t> Operators::exchange_counts(const Solution& sol) {
  std::vector<std::size_t> count(sol.num_trucks(), 0);
  std::vector<std::size_t> seen(sol.num_trucks(), 0);
  for (const auto& [id, members] : platoons(sol)) {
    for (TruckIndex k : members) ++seen[k];
  }
  for (TruckIndex k = 0; k < count.size(); ++k) count[k] = seen[k] > 0 ? seen[k] - 1 : 0;
  return count;
}

RemovalResult Operators::take_out(Solution& sol, std::vector<TruckIndex> trucks) const {
  RemovalResult result;
  std::sort(trucks.begin(), trucks.end());
  trucks.erase(std::unique(trucks.begin(), trucks.end()), trucks.end());
  const std::vector<TruckIndex> comp = sol.component(trucks, sol.groups());
  for (TruckIndex k : trucks) sol.at(k).reset();
  std::vector<TruckIndex> seeds;
  for (TruckIndex k : comp) {
    if (sol.has(k)) seeds.push_back(k);
  }
  result.removed = trucks;
  for (TruckIndex k : inserter_.repair_after_removal(sol, seeds)) result.removed.push_back(k);
  result.noop = result.removed.empty();
  return result;
}

RemovalResult Operators::remove_worst(Solution& sol, Rng& rng) const {
  const auto trucks = present(sol);
  const std::size_t kappa = draw_kappa(trucks.size(), config_, rng);
  const Assessment a = assess(inst_, sol.refs());
  std::vector<std::pair<double, TruckIndex>> detour;
  for (std::size_t r = 0; r < trucks.size(); ++r) {
    detour.emplace_back(a.truck_cost.at(r) - pre_.sp_cost[trucks[r]], trucks[r]);
  }
  std::stable_sort(detour.begin(), detour.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<TruckIndex> chosen;
  for (std::size_t i = 0; i < kappa; ++i) chosen.push_back(detour[i].second);
  return take_out(sol, chosen);
}

RemovalResult Operators::remove_random(Solution& sol, Rng& rng) const {
  std::vector<TruckIndex> trucks = present(sol);
  const std::size_t kappa = draw_kappa(trucks.size(), config_, rng);
  for (std::size_t i = 0; i < kappa; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                            static_cast<std::int64_t>(trucks.size() - 1)));
    std::swap(trucks[i], trucks[j]);
  }
  trucks.resize(kappa);
  return take_out(sol, trucks);
}

RemovalResult Operators::remove_platoon_nonexchange(Solution& sol, Rng& rng) const {
  const auto plats = platoons(sol);
  const auto exch = exchange_counts(sol);
  const GroupMap groups = sol.groups();
  std::vector<double> weight;
  std::vector<const std::vector<TruckIndex>*> eligible;
  for (const auto& [id, members] : plats) {
    if (std::any_of(members.begin(), members.end(), [&](TruckIndex k) { return exch[k] > 0; })) continue;
    double hours = 0.0;
    for (const auto& [key, group] : groups) {
      if (key.platoon == id && group.size() >= 2) {
        hours += inst_.network.arc(*inst_.network.find_arc(key.tail, key.head)).travel_time;
      }
    }
    weight.push_back(1.0 / (static_cast<double>(members.size()) * hours));
    eligible.push_back(&members);
  }
  if (eligible.empty()) return RemovalResult{{}, true};
  return take_out(sol, *eligible[roulette(weight, rng)]);
}

RemovalResult Operators::remove_platoon_any(Solution& sol, Rng& rng) const {
  const auto plats = platoons(sol);
  if (plats.empty()) {
    const auto trucks = present(sol);
    if (trucks.empty()) return RemovalResult{{}, true};
    const auto i = rng.uniform_int(0, static_cast<std::int64_t>(trucks.size()) - 1);
    return take_out(sol, {trucks[static_cast<std::size_t>(i)]});
  }
  std::vector<double> weight;
  for (const auto& [id, members] : plats) weight.push_back(1.0 / static_cast<double>(members.size()));
  return take_out(sol, plats[roulette(weight, rng)].second);
}

RemovalResult Operators::remove_exchanged(Solution& sol, Rng& rng) const {
  const std::size_t kappa = draw_kappa(present(sol).size(), config_, rng);
  RemovalResult total;
  while (total.removed.size() < kappa) {
    const auto counts = exchange_counts(sol);
    std::vector<double> weight(counts.begin(), counts.end());
    if (std::all_of(weight.begin(), weight.end(), [](double w) { return w <= 0.0; })) break;
    const TruckIndex k = roulette(weight, rng);
    RemovalResult r = take_out(sol, {k});
    total.removed.insert(total.removed.end(), r.removed.begin(), r.removed.end());
  }
  total.noop = total.removed.empty();
  return total;
}

RemovalResult Operators::remove(std::size_t op, Solution& sol, Rng& rng) const {
  switch (op) {
    case 0: return remove_worst(sol, rng);
    case 1: return remove_random(sol, rng);
    case 2: return remove_platoon_nonexchange(sol, rng);
    case 3: return remove_platoon_any(sol, rng);
    case 4: return remove_exchanged(sol, rng);
  }
  throw std::out_of_range("removal operator");
}

std::vector<TruckIndex> Operators::order(const std::vector<TruckIndex>& trucks, InsertionCriterion c) const {
  std::vector<TruckIndex> out = trucks;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  auto key = [&](TruckIndex k) {
    const TruckDelivery& t = inst_.trucks[k];
    switch (c) {
      case InsertionCriterion::sp_time: return -pre_.paths.time(t.origin, t.destination);
      case InsertionCriterion::min_cost: {
        const auto& best = pre_.classes[k].best;
        return best.score - inst_.params.alpha1 * best.hours;
      }
      case InsertionCriterion::regret: return -pre_.classes[k].regret;
    }
    return 0.0;
  };
  std::stable_sort(out.begin(), out.end(), [&](TruckIndex a, TruckIndex b) { return key(a) < key(b); });
  return out;
}

void Operators::insert_solo(Solution& sol, const std::vector<TruckIndex>& removed, InsertionCriterion c) const {
  for (TruckIndex k : order(removed, c)) {
    if (sol.has(k)) continue;
    if (!inserter_.insert_solo(sol, k)) throw std::logic_error("servable truck has no solo route");
  }
}

void Operators::insert_pairwise(Solution& sol, const std::vector<TruckIndex>& removed, InsertionCriterion c) const {
  std::vector<TruckIndex> queue = order(removed, c);
  while (!queue.empty()) {
    const TruckIndex k = queue.front();
    queue.erase(queue.begin());
    if (sol.has(k)) continue;
    std::optional<double> best_gain;
    std::optional<Solution> best;
    std::optional<TruckIndex> partner;
    for (TruckIndex j : queue) {
      Solution trial = sol;
      if (auto gain = inserter_.insert_pair(trial, k, j); gain && (!best_gain || *gain > *best_gain + kEps)) {
        best_gain = gain;
        best = std::move(trial);
        partner = j;
      }
    }
    {
      Solution trial = sol;
      auto gain = inserter_.insert_joining(trial, k, PartnerScope::solo_only);
      if (gain && (!best_gain || *gain > *best_gain + kEps)) {
        best_gain = gain;
        best = std::move(trial);
        partner.reset();
      }
    }
    if (best) {
      sol = std::move(*best);
      if (partner) queue.erase(std::find(queue.begin(), queue.end(), *partner));
    } else if (!inserter_.insert_solo(sol, k)) {
      throw std::logic_error("servable truck has no solo route");
    }
  }
}

void Operators::insert_into_platoon(Solution& sol, const std::vector<TruckIndex>& removed) const {
  for (TruckIndex k : order(removed, InsertionCriterion::sp_time)) {
    if (sol.has(k)) continue;
    if (inserter_.insert_joining(sol, k, PartnerScope::platooned_only)) continue;
    if (!inserter_.insert_solo(sol, k)) throw std::logic_error("servable truck has no solo route");
  }
}

void Operators::insert(std::size_t op, Solution& sol, const std::vector<TruckIndex>& removed) const {
  static constexpr InsertionCriterion kCriteria[] = {InsertionCriterion::sp_time, InsertionCriterion::min_cost,
                                                     InsertionCriterion::regret};
  if (op < 3) return insert_solo(sol, removed, kCriteria[op]);
  if (op < 6) return insert_pairwise(sol, removed, kCriteria[op - 3]);
  if (op == 6) return insert_into_platoon(sol, removed);
  throw std::out_of_range("insertion operator");
}

SwapResult Operators::swap_charge_amount(Solution& sol, Rng& rng) const {
  const Parameters& par = inst_.params;
  std::vector<std::pair<TruckIndex, std::size_t>> stops;
  for (TruckIndex k : present(sol)) {
    const Itinerary& it = *sol.at(k);
    for (std::size_t p = 0; p + 1 < it.num_arcs(); ++p) {
      const NodeIndex node = it.nodes[p + 1];
      if (inst_.can_charge(node) && node != inst_.trucks[k].origin) stops.emplace_back(k, p);
    }
  }
  if (stops.empty()) return {};
  const auto [k, p] = stops[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(stops.size()) - 1))];

  const GroupMap groups = sol.groups();
  const std::vector<TruckIndex> comp = sol.component({k}, groups);
  std::vector<std::optional<Itinerary>> backup;
  for (TruckIndex t : comp) backup.push_back(sol.at(t));

  Itinerary& it = *sol.at(k);
  const std::vector<double> cons = consumption_profile(inst_, it, k, groups);
  const std::size_t m = it.num_arcs();
  double arrival = par.full_energy();
  for (std::size_t q = 0; q <= p; ++q) arrival += -cons[q] + (q > 0 ? it.charge[q - 1] : 0.0);
  const double current = it.charge[p];
  // Tight when the energy after this stop only just reaches the next stop
  // that charges (or the destination).
  double need = 0.0;
  for (std::size_t q = p + 1; q < m; ++q) {
    need += cons[q];
    if (q + 1 == m || it.charge[q] > kEps) break;
  }
  const bool tight = arrival + current - need <= par.floor_energy() + 1e-6;
  const double headroom = std::max(0.0, par.full_energy() - (arrival + current));
  it.charge[p] = tight ? rng.uniform(current, current + headroom) : rng.uniform(0.0, current);
  // Destination tops up whatever is left.
  double energy = par.full_energy();
  for (std::size_t q = 0; q + 1 < m; ++q) energy += -cons[q] + it.charge[q];
  energy -= cons[m - 1];
  it.charge[m - 1] = par.full_energy() - energy;

  if (assess(inst_, sol.refs(comp)).feasible()) return SwapResult{true, false};
  for (std::size_t i = 0; i < comp.size(); ++i) sol.at(comp[i]) = std::move(backup[i]);
  return SwapResult{false, true};
}

SwapResult Operators::swap_leading_ratio(Solution& sol, Rng& rng) const {
  const GroupMap groups = sol.groups();
  std::vector<std::pair<std::tuple<NodeIndex, NodeIndex, PlatoonId>, const std::vector<Member>*>> multi;
  for (const auto& [key, members] : groups) {
    if (members.size() >= 2) multi.emplace_back(std::tuple{key.tail, key.head, key.platoon}, &members);
  }
  if (multi.empty()) return {};
  std::sort(multi.begin(), multi.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto& members = *multi[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(multi.size()) - 1))].second;
  std::vector<Member> sorted = members;
  std::sort(sorted.begin(), sorted.end(), [](const Member& a, const Member& b) { return a.truck < b.truck; });
  const auto n = static_cast<std::int64_t>(sorted.size());
  const auto gi = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
  auto ri = static_cast<std::size_t>(rng.uniform_int(0, n - 2));
  if (ri >= gi) ++ri;
  const Member giver = sorted[gi];
  const Member receiver = sorted[ri];

  double& hg = sol.at(giver.truck)->ratio[giver.pos];
  double& hr = sol.at(receiver.truck)->ratio[receiver.pos];
  const double step = inst_.params.binary_leading_ratio ? 1.0 : 0.1;
  const double new_g = std::max(0.0, hg - step);
  const double moved = hg - new_g;
  if (moved <= 0.0) return {};

  const std::vector<TruckIndex> comp = sol.component({giver.truck}, groups);
  std::vector<std::optional<Itinerary>> backup;
  for (TruckIndex t : comp) backup.push_back(sol.at(t));
  const double old_r = hr;
  hg = new_g;
  hr = std::min(1.0, old_r + moved);
  if (inserter_.settle(sol, comp)) return SwapResult{true, false};
  for (std::size_t i = 0; i < comp.size(); ++i) sol.at(comp[i]) = std::move(backup[i]);
  return SwapResult{false, true};
}

SwapResult Operators::swap(std::size_t op, Solution& sol, Rng& rng) const {
  switch (op) {
    case 0: return swap_charge_amount(sol, rng);
    case 1: return swap_leading_ratio(sol, rng);
  }
  throw std::out_of_range("swap operator");
}

// ---------------------------------------------------------------------------

AlnsResult run(const Instance& instance, const AlnsConfig& config, std::uint64_t seed) {
  const Preprocessed pre = preprocess(instance);
  return run(instance, pre, config, seed);
}

AlnsResult run(const Instance& instance, const Preprocessed& pre, const AlnsConfig& config, std::uint64_t seed) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };
  Rng rng(seed);
  Operators ops(instance, pre, config);
  AlnsResult result;
  result.pools = {make_pool(PoolKind::removal), make_pool(PoolKind::insertion), make_pool(PoolKind::swap)};
  auto& removal = result.pools[0];
  auto& insertion = result.pools[1];
  auto& swaps = result.pools[2];

  Solution current = build_initial_solution(instance, pre);
  Assessment a = assess(instance, current.refs());
  if (!a.feasible()) throw std::logic_error("initial solution infeasible: " + a.violations.front().kind);
  double current_cost = a.cost.total;
  result.initial_cost = current_cost;
  Solution best = current;
  double best_cost = current_cost;
  double temperature = config.initial_temperature;
  int no_improve = 0;

  for (std::size_t iter = 1;; ++iter) {
    if (config.max_iterations && iter > config.max_iterations) break;
    if (no_improve >= config.no_improve_limit || elapsed() >= config.time_limit_s) break;
    if (instance.num_trucks() == 0) break;
    RunLogRow row;
    row.iteration = iter;

    Solution candidate = current;
    std::size_t r = select_operator(removal, config.lambda, rng);
    RemovalResult removed = ops.remove(r, candidate, rng);
    if (removed.noop) {
      // Retry with the other removal operators in pool order.
      for (std::size_t alt = 0; alt < removal.ops.size() && removed.noop; ++alt) {
        if (alt == r) continue;
        candidate = current;
        removed = ops.remove(alt, candidate, rng);
        if (!removed.noop) r = alt;
      }
    }
    ++removal.ops[r].uses;
    const std::size_t i = select_operator(insertion, config.lambda, rng);
    ++insertion.ops[i].uses;
    ops.insert(i, candidate, removed.removed);

    std::optional<std::size_t> s;
    if (rng.uniform() < config.swap_probability) {
      s = select_operator(swaps, config.lambda, rng);
      ++swaps.ops[*s].uses;
      const SwapResult sr = ops.swap(*s, candidate, rng);
      if (sr.violated) swaps.ops[*s].score += config.delta3;
    }
    row.removal = removal.ops[r].name;
    row.insertion = insertion.ops[i].name;
    if (s) row.swap = swaps.ops[*s].name;

    const Assessment ca = assess(instance, candidate.refs());
    bool improved_best = false;
    if (ca.feasible()) {
      const double cost = ca.cost.total;
      row.delta = cost - current_cost;
      double credit = 0.0;
      const bool accepted = accept(cost, current_cost, temperature, rng);
      if (cost < best_cost - kEps) {
        credit = config.delta1;
        improved_best = true;
      } else if (cost < current_cost - kEps) {
        credit = config.delta2;
      } else if (accepted) {
        credit = config.delta3;
      }
      removal.ops[r].score += credit;
      insertion.ops[i].score += credit;
      if (s) swaps.ops[*s].score += credit;
      if (accepted) {
        current = std::move(candidate);
        current_cost = cost;
        row.accepted = true;
      }
      if (improved_best) {
        best = current;
        best_cost = current_cost;
      }
    }
    no_improve = improved_best ? 0 : no_improve + 1;
    temperature *= config.cooling;
    row.temperature = temperature;
    row.incumbent = current_cost;
    row.best = best_cost;
    result.log.push_back(std::move(row));
    result.iterations = iter;
    if (iter % static_cast<std::size_t>(config.nu) == 0) {
      for (auto& pool : result.pools) update_weights(pool, config.reaction);
    }
  }
  result.best = to_plan(best);
  result.cost = assess(instance, best.refs()).cost;
  return result;
}

void write_run_log(const std::vector<RunLogRow>& log, std::ostream& out) {
  out << "iteration,removal,insertion,swap,delta,accepted,temperature,incumbent,best\n";
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return std::string(buf);
  };
  for (const RunLogRow& row : log) {
    out << row.iteration << ',' << row.removal << ',' << row.insertion << ',' << row.swap << ','
        << (row.delta ? num(*row.delta) : std::string()) << ',' << (row.accepted ? 1 : 0) << ','
        << num(row.temperature) << ',' << num(row.incumbent) << ',' << num(row.best) << '\n';
  }
}

}  // namespace platoon
