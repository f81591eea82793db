#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "platoon/preprocess.hpp"
#include "platoon/rng.hpp"

namespace platoon {

struct AlnsConfig {
  double lambda = 10.0;
  int nu = 50;  // iterations per weight segment
  double delta1 = 3.0;  // new global best
  double delta2 = 2.0;  // improved the incumbent
  double delta3 = 1.0;  // accepted although worse
  double reaction = 0.2;
  double initial_temperature = 100.0;
  double cooling = 0.95;
  int kappa_min = 2;
  double kappa_fraction = 0.1;  // kappa_max = max(kappa_min, floor(fraction * K))
  double time_limit_s = 3600.0;
  int no_improve_limit = 50;
  std::size_t max_iterations = 0;  // 0: unbounded
  double swap_probability = 0.3;

  /// Throws InputError(invalid_parameter).
  void validate() const;
};

enum class PoolKind { removal, insertion, swap };

struct OperatorStats {
  std::string name;
  double weight = 1.0;
  double score = 0.0;
  std::size_t uses = 0;
};

struct OperatorPool {
  PoolKind kind = PoolKind::removal;
  std::vector<OperatorStats> ops;

  /// Softmax of lambda * weight.
  std::vector<double> probabilities(double lambda) const;
};

OperatorPool make_pool(PoolKind kind);

/// Roulette wheel over the softmax probabilities.
std::size_t select_operator(const OperatorPool& pool, double lambda, Rng& rng);

/// w = (1 - r) w + r s for every operator, then s = 0.
void update_weights(OperatorPool& pool, double reaction);

/// Metropolis rule: always for a non-positive change, else exp(-delta / T).
bool accept(double candidate_cost, double incumbent_cost, double temperature, Rng& rng);

/// Number of deliveries a removal takes out.
std::size_t draw_kappa(std::size_t trucks, const AlnsConfig& config, Rng& rng);

enum class InsertionCriterion { sp_time, min_cost, regret };

struct RemovalResult {
  std::vector<TruckIndex> removed;  // includes trucks dropped during repair
  bool noop = false;
};

struct SwapResult {
  bool applied = false;
  bool violated = false;  // candidate was infeasible and rolled back
};

/// Destroy, repair and swap moves on a working solution.
class Operators {
 public:
  Operators(const Instance& instance, const Preprocessed& pre, const AlnsConfig& config);

  RemovalResult remove_worst(Solution& sol, Rng& rng) const;
  RemovalResult remove_random(Solution& sol, Rng& rng) const;
  RemovalResult remove_platoon_nonexchange(Solution& sol, Rng& rng) const;
  RemovalResult remove_platoon_any(Solution& sol, Rng& rng) const;
  RemovalResult remove_exchanged(Solution& sol, Rng& rng) const;
  RemovalResult remove(std::size_t op, Solution& sol, Rng& rng) const;

  void insert_solo(Solution& sol, const std::vector<TruckIndex>& removed, InsertionCriterion c) const;
  void insert_pairwise(Solution& sol, const std::vector<TruckIndex>& removed, InsertionCriterion c) const;
  void insert_into_platoon(Solution& sol, const std::vector<TruckIndex>& removed) const;
  void insert(std::size_t op, Solution& sol, const std::vector<TruckIndex>& removed) const;

  SwapResult swap_charge_amount(Solution& sol, Rng& rng) const;
  SwapResult swap_leading_ratio(Solution& sol, Rng& rng) const;
  SwapResult swap(std::size_t op, Solution& sol, Rng& rng) const;

  /// Removal order used by the insertion criteria.
  std::vector<TruckIndex> order(const std::vector<TruckIndex>& trucks, InsertionCriterion c) const;

  /// Multi-member platoons: id -> member trucks (sorted), in id order.
  static std::vector<std::pair<PlatoonId, std::vector<TruckIndex>>> platoons(const Solution& sol);
  /// Distinct multi-member platoons a truck rides in, minus one.
  static std::vector<std::size_t> exchange_counts(const Solution& sol);

 private:
  RemovalResult take_out(Solution& sol, std::vector<TruckIndex> trucks) const;

  const Instance& inst_;
  const Preprocessed& pre_;
  const AlnsConfig& config_;
  Inserter inserter_;
};

struct RunLogRow {
  std::size_t iteration = 0;
  std::string removal;
  std::string insertion;
  std::string swap;  // empty when no swap ran
  std::optional<double> delta;  // absent when the candidate was infeasible
  bool accepted = false;
  double temperature = 0.0;
  double incumbent = 0.0;
  double best = 0.0;
};

struct AlnsResult {
  Plan best;
  CostBreakdown cost;
  double initial_cost = 0.0;
  std::size_t iterations = 0;
  std::vector<RunLogRow> log;
  std::vector<OperatorPool> pools;
};

/// Full search from the warm start. Throws InputError(unservable) before
/// searching when some truck cannot be served.
AlnsResult run(const Instance& instance, const AlnsConfig& config, std::uint64_t seed);
AlnsResult run(const Instance& instance, const Preprocessed& pre, const AlnsConfig& config, std::uint64_t seed);

void write_run_log(const std::vector<RunLogRow>& log, std::ostream& out);

}  // namespace platoon
