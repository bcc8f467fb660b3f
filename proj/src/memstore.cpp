#include "wpb/memstore.hpp"

#include <ostream>
#include <stdexcept>

namespace wpb {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Bytes estimate_bytes(const json& observation, const json& metadata) {
  const json envelope{{"m", metadata}, {"x", observation}};
  return static_cast<Bytes>(canonical_dump(envelope).size()) + kItemHeaderBytes +
         kIndexEntryBytes;
}

Bytes estimate_bytes(const Step& step) {
  return estimate_bytes(to_json(step.observation), to_json(step.metadata));
}

json to_json(const ObservationDelta& delta) {
  json out = json::object();
  if (delta.version) out["version"] = *delta.version;
  if (delta.note) out["note"] = *delta.note;
  if (delta.params) {
    json params = json::object();
    for (const auto& [k, v] : *delta.params) params[k] = v;
    out["params"] = std::move(params);
  }
  return out;
}

ObservationDelta compute_delta(const Observation& effective,
                               const Observation& incoming) {
  if (effective.api != incoming.api) {
    throw std::invalid_argument("compute_delta: api mismatch ('" + effective.api +
                                "' vs '" + incoming.api + "')");
  }
  ObservationDelta delta;
  if (effective.version != incoming.version) delta.version = incoming.version;
  if (effective.params != incoming.params) delta.params = incoming.params;
  if (effective.note != incoming.note) delta.note = incoming.note;
  return delta;
}

Observation apply_delta(Observation base, const ObservationDelta& delta) {
  if (delta.version) base.version = *delta.version;
  if (delta.params) base.params = *delta.params;
  if (delta.note) base.note = *delta.note;
  return base;
}

Bytes merge_cost(const ObservationDelta& delta) {
  return static_cast<Bytes>(canonical_dump(to_json(delta)).size()) + kIndexEntryBytes;
}

std::string_view action_name(const Action& action) {
  return std::visit(Overloaded{
                        [](const WriteAction&) { return std::string_view("WRITE"); },
                        [](const MergeAction&) { return std::string_view("MERGE"); },
                        [](const ExpireAction&) { return std::string_view("EXPIRE"); },
                        [](const SkipAction&) { return std::string_view("SKIP"); },
                    },
                    action);
}

std::string_view reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::kOverBudget: return "over_budget";
    case RejectReason::kExpireTooYoung: return "expire_too_young";
    case RejectReason::kMergeBadBase: return "merge_bad_base";
    case RejectReason::kMergeApiMismatch: return "merge_api_mismatch";
    case RejectReason::kMergeNoncanonicalDelta: return "merge_noncanonical_delta";
    case RejectReason::kMergeEmptyDelta: return "merge_empty_delta";
    case RejectReason::kMissingTarget: return "missing_target";
  }
  return "unknown";
}

MemoryState::MemoryState(Bytes budget_bytes) : budget_bytes_(budget_bytes) {
  if (budget_bytes < 0) throw std::invalid_argument("budget_bytes must be >= 0");
}

const MemoryItem* MemoryState::find(ItemId id) const {
  auto it = items_.find(id);
  return it == items_.end() ? nullptr : &it->second;
}

Observation MemoryState::effective_observation(ItemId base) const {
  const MemoryItem* item = find(base);
  if (!item || item->kind != ItemKind::kWrite) {
    throw std::invalid_argument("effective_observation: not a live WRITE item");
  }
  Observation obs = std::get<Step>(item->payload).observation;
  for (const auto& [id, other] : items_) {
    if (other.kind == ItemKind::kMerge && other.base_id == base) {
      obs = apply_delta(std::move(obs), std::get<ObservationDelta>(other.payload));
    }
  }
  return obs;
}

std::optional<RejectReason> MemoryState::check_merge(const Step& current,
                                                     const MergeAction& merge) const {
  const MemoryItem* target = find(merge.target);
  if (!target) return RejectReason::kMissingTarget;
  if (target->kind != ItemKind::kWrite) return RejectReason::kMergeBadBase;
  if (target->api != current.observation.api) return RejectReason::kMergeApiMismatch;
  // A merge is a no-op if either the sent delta or the canonical one is empty.
  const ObservationDelta canonical =
      compute_delta(effective_observation(merge.target), current.observation);
  if (merge.delta.empty() || canonical.empty()) return RejectReason::kMergeEmptyDelta;
  if (merge.delta != canonical) return RejectReason::kMergeNoncanonicalDelta;
  return std::nullopt;
}

const ActionRecord& MemoryState::record(std::size_t t, const Action& action,
                                        std::optional<RejectReason> rejection,
                                        Bytes bytes_delta, std::optional<ItemId> id) {
  log_.push_back(ActionRecord{t, action, rejection, bytes_delta, id});
  return log_.back();
}

const ActionRecord& MemoryState::apply_action(const Step& current,
                                              const Action& action) {
  const std::size_t t = current.t;
  return std::visit(
      Overloaded{
          [&](const WriteAction& write) -> const ActionRecord& {
            const Bytes cost = estimate_bytes(write.step);
            if (cost > remaining_bytes()) {
              return record(t, action, RejectReason::kOverBudget, 0, std::nullopt);
            }
            const ItemId id = next_id_++;
            items_.emplace(id, MemoryItem{id, ItemKind::kWrite, write.step.t,
                                          write.step.observation.api, write.step,
                                          std::nullopt, cost});
            bytes_used_ += cost;
            return record(t, action, std::nullopt, cost, id);
          },
          [&](const MergeAction& merge) -> const ActionRecord& {
            if (auto reason = check_merge(current, merge)) {
              return record(t, action, reason, 0, std::nullopt);
            }
            const Bytes cost = merge_cost(merge.delta);
            if (cost > remaining_bytes()) {
              return record(t, action, RejectReason::kOverBudget, 0, std::nullopt);
            }
            const ItemId id = next_id_++;
            items_.emplace(id, MemoryItem{id, ItemKind::kMerge, t,
                                          current.observation.api, merge.delta,
                                          merge.target, cost});
            bytes_used_ += cost;
            return record(t, action, std::nullopt, cost, id);
          },
          [&](const ExpireAction& expire) -> const ActionRecord& {
            auto it = items_.find(expire.target);
            if (it == items_.end()) {
              return record(t, action, RejectReason::kMissingTarget, 0, std::nullopt);
            }
            if (it->second.timestep >= t) {
              return record(t, action, RejectReason::kExpireTooYoung, 0, std::nullopt);
            }
            const Bytes credit = it->second.charged_bytes;
            items_.erase(it);
            bytes_used_ -= credit;
            return record(t, action, std::nullopt, -credit, std::nullopt);
          },
          [&](const SkipAction&) -> const ActionRecord& {
            return record(t, action, std::nullopt, 0, std::nullopt);
          },
      },
      action);
}

std::set<std::size_t> MemoryState::retained_timesteps() const {
  std::set<std::size_t> out;
  for (const auto& [id, item] : items_) {
    if (item.kind == ItemKind::kWrite) {
      out.insert(item.timestep);
      continue;
    }
    const MemoryItem* base = item.base_id ? find(*item.base_id) : nullptr;
    if (base && base->kind == ItemKind::kWrite && base->api == item.api) {
      out.insert(item.timestep);
    }
  }
  return out;
}

std::size_t MemoryState::accepted_count(std::string_view action) const {
  std::size_t n = 0;
  for (const auto& rec : log_) {
    if (rec.accepted() && action_name(rec.action) == action) ++n;
  }
  return n;
}

void write_action_log(std::ostream& out, const std::vector<ActionRecord>& log) {
  for (const auto& rec : log) {
    json line{{"t", rec.t},
              {"action", action_name(rec.action)},
              {"outcome", rec.accepted() ? "accepted" : "rejected"},
              {"bytes_delta", rec.bytes_delta}};
    if (rec.rejection) line["reason"] = reject_reason_name(*rec.rejection);
    if (rec.item_id) line["item_id"] = *rec.item_id;
    std::visit(Overloaded{
                   [&](const WriteAction& w) { line["step"] = w.step.t; },
                   [&](const MergeAction& m) {
                     line["target"] = m.target;
                     line["delta"] = to_json(m.delta);
                   },
                   [&](const ExpireAction& e) { line["target"] = e.target; },
                   [](const SkipAction&) {},
               },
               rec.action);
    out << canonical_dump(line) << '\n';
  }
}

}  // namespace wpb
