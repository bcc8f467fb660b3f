#include "wpb/policies.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace wpb {

namespace {

double require_priority(const PolicyView& view, std::string_view policy) {
  if (!view.step.metadata.priority) {
    throw std::logic_error(std::string(policy) +
                           " requires the privileged priority field");
  }
  return *view.step.metadata.priority;
}

// Live items that may be expired at step t, oldest first.
std::vector<const MemoryItem*> expirable_by_age(const PolicyView& view) {
  std::vector<const MemoryItem*> out;
  for (const auto& [id, item] : view.memory.items()) {
    if (item.timestep < view.t) out.push_back(&item);
  }
  std::sort(out.begin(), out.end(), [](const MemoryItem* a, const MemoryItem* b) {
    return std::tie(a->timestep, a->id) < std::tie(b->timestep, b->id);
  });
  return out;
}

bool fits(const PolicyView& view, Bytes cost) {
  return cost <= view.memory.remaining_bytes();
}

}  // namespace

void PolicyParams::validate() const {
  if (stride < 1) throw std::invalid_argument("uniform_sample stride must be >= 1");
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("tau must lie in [0, 1]");
}

std::vector<Action> plan_last_kb(const PolicyView& view) {
  const Bytes cost = estimate_bytes(view.step);
  if (cost > view.memory.budget_bytes()) return {SkipAction{}};

  std::vector<Action> actions;
  Bytes free = view.memory.remaining_bytes();
  for (const MemoryItem* item : expirable_by_age(view)) {
    if (cost <= free) break;
    actions.push_back(ExpireAction{item->id});
    free += item->charged_bytes;
  }
  if (cost > free) return {SkipAction{}};
  actions.push_back(WriteAction{view.step});
  return actions;
}

std::vector<Action> NoMemory::decide(const PolicyView&) { return {SkipAction{}}; }

std::vector<Action> FifoStoreAll::decide(const PolicyView& view) {
  if (fits(view, estimate_bytes(view.step))) return {WriteAction{view.step}};
  return {SkipAction{}};
}

std::vector<Action> LastKb::decide(const PolicyView& view) {
  return plan_last_kb(view);
}

std::vector<Action> UniformSample::decide(const PolicyView& view) {
  if (view.t % stride_ == 0 && fits(view, estimate_bytes(view.step))) {
    return {WriteAction{view.step}};
  }
  return {SkipAction{}};
}

std::vector<Action> MergeAggressive::decide(const PolicyView& view) {
  const MemoryItem* match = nullptr;
  for (const auto& [id, item] : view.memory.items()) {
    if (item.kind != ItemKind::kWrite || item.api != view.step.observation.api) {
      continue;
    }
    if (!match || std::tie(item.timestep, item.id) > std::tie(match->timestep, match->id)) {
      match = &item;
    }
  }
  if (!match) return plan_last_kb(view);

  ObservationDelta delta =
      compute_delta(view.memory.effective_observation(match->id), view.step.observation);
  if (delta.empty()) return {SkipAction{}};
  if (fits(view, merge_cost(delta))) return {MergeAction{match->id, std::move(delta)}};
  return plan_last_kb(view);
}

std::vector<Action> PriorityThreshold::decide(const PolicyView& view) {
  const double p = require_priority(view, name());
  if (p > tau_ && fits(view, estimate_bytes(view.step))) {
    return {WriteAction{view.step}};
  }
  return {SkipAction{}};
}

std::vector<Action> PriorityGreedy::decide(const PolicyView& view) {
  const double p = require_priority(view, name());
  const Bytes cost = estimate_bytes(view.step);
  if (cost > view.memory.budget_bytes()) return {SkipAction{}};

  std::vector<Action> actions;
  if (!fits(view, cost)) {
    struct Candidate {
      double priority;
      std::size_t timestep;
      ItemId id;
      Bytes bytes;
    };
    std::vector<Candidate> candidates;
    for (const auto& [id, item] : view.memory.items()) {
      if (item.timestep >= view.t) continue;
      auto rec = recorded_.find(item.timestep);
      candidates.push_back(Candidate{rec == recorded_.end() ? 0.0 : rec->second,
                                     item.timestep, item.id, item.charged_bytes});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) {
                return std::tie(a.priority, a.timestep, a.id) <
                       std::tie(b.priority, b.timestep, b.id);
              });

    // Plan all evictions first; emit none unless the write ends up fitting.
    Bytes free = view.memory.remaining_bytes();
    for (const auto& c : candidates) {
      if (cost <= free || c.priority >= p) break;
      actions.push_back(ExpireAction{c.id});
      free += c.bytes;
    }
    if (cost > free) return {SkipAction{}};
  }
  recorded_[view.t] = p;
  actions.push_back(WriteAction{view.step});
  return actions;
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{
      "no_mem",           "fifo_store_all",     "last_kb",        "uniform_sample",
      "merge_aggressive", "priority_threshold", "priority_greedy"};
  return names;
}

bool is_known_policy(std::string_view name) {
  const auto& names = policy_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_privileged_policy(std::string_view name) {
  return name == "priority_threshold" || name == "priority_greedy";
}

std::unique_ptr<Policy> make_policy(std::string_view name, const PolicyParams& params) {
  params.validate();
  if (name == "no_mem") return std::make_unique<NoMemory>();
  if (name == "fifo_store_all") return std::make_unique<FifoStoreAll>();
  if (name == "last_kb") return std::make_unique<LastKb>();
  if (name == "uniform_sample") return std::make_unique<UniformSample>(params.stride);
  if (name == "merge_aggressive") return std::make_unique<MergeAggressive>();
  if (name == "priority_threshold") return std::make_unique<PriorityThreshold>(params.tau);
  if (name == "priority_greedy") return std::make_unique<PriorityGreedy>();
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

}  // namespace wpb
