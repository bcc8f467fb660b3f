#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wpb/episode.hpp"

namespace wpb {

using ItemId = std::uint64_t;
using Bytes = std::int64_t;

inline constexpr Bytes kItemHeaderBytes = 32;
inline constexpr Bytes kIndexEntryBytes = 16;

// Byte length of the canonical envelope {"m":metadata,"x":observation} plus
// the 32-byte item header and 16-byte index entry.
Bytes estimate_bytes(const Step& step);
Bytes estimate_bytes(const nlohmann::json& observation, const nlohmann::json& metadata);

// Shallow field-diff over the non-api top-level fields of an Observation.
// `params` is compared and carried as a single atomic field.
struct ObservationDelta {
  std::optional<std::string> version;
  std::optional<Params> params;
  std::optional<std::string> note;

  bool empty() const { return !version && !params && !note; }
  bool operator==(const ObservationDelta&) const = default;
};

nlohmann::json to_json(const ObservationDelta& delta);

// Throws std::invalid_argument when the two observations name different apis.
ObservationDelta compute_delta(const Observation& effective, const Observation& incoming);
Observation apply_delta(Observation base, const ObservationDelta& delta);

// Charged cost of a MERGE: canonical delta bytes + index entry, no header.
Bytes merge_cost(const ObservationDelta& delta);

enum class ItemKind { kWrite, kMerge };

struct MemoryItem {
  ItemId id = 0;
  ItemKind kind = ItemKind::kWrite;
  std::size_t timestep = 0;
  std::string api;
  std::variant<Step, ObservationDelta> payload;
  std::optional<ItemId> base_id;  // MERGE only
  Bytes charged_bytes = 0;
};

struct WriteAction {
  Step step;
};
struct MergeAction {
  ItemId target = 0;
  ObservationDelta delta;
};
struct ExpireAction {
  ItemId target = 0;
};
struct SkipAction {};

using Action = std::variant<WriteAction, MergeAction, ExpireAction, SkipAction>;

std::string_view action_name(const Action& action);

enum class RejectReason {
  kOverBudget,
  kExpireTooYoung,
  kMergeBadBase,
  kMergeApiMismatch,
  kMergeNoncanonicalDelta,
  kMergeEmptyDelta,
  kMissingTarget,
};

std::string_view reject_reason_name(RejectReason reason);

struct ActionRecord {
  std::size_t t = 0;
  Action action;
  std::optional<RejectReason> rejection;
  Bytes bytes_delta = 0;
  std::optional<ItemId> item_id;  // id created by an accepted WRITE/MERGE

  bool accepted() const { return !rejection; }
};

// Budgeted external memory M_t. Live items are keyed by id; ids are assigned
// monotonically, so iteration order is insertion order.
class MemoryState {
 public:
  explicit MemoryState(Bytes budget_bytes);

  // Applies one action emitted while processing `current` (t = current.t).
  // Rejections are logged and never mutate items or bytes_used.
  const ActionRecord& apply_action(const Step& current, const Action& action);

  Bytes budget_bytes() const { return budget_bytes_; }
  Bytes bytes_used() const { return bytes_used_; }
  Bytes remaining_bytes() const { return budget_bytes_ - bytes_used_; }

  const std::map<ItemId, MemoryItem>& items() const { return items_; }
  const MemoryItem* find(ItemId id) const;
  const std::vector<ActionRecord>& log() const { return log_; }

  // Base observation overlaid with its live deltas in insertion order.
  // Throws std::invalid_argument if `base` is not a live WRITE item.
  Observation effective_observation(ItemId base) const;

  std::set<std::size_t> retained_timesteps() const;

  std::size_t accepted_count(std::string_view action) const;

 private:
  std::optional<RejectReason> check_merge(const Step& current,
                                          const MergeAction& merge) const;
  const ActionRecord& record(std::size_t t, const Action& action,
                             std::optional<RejectReason> rejection,
                             Bytes bytes_delta, std::optional<ItemId> id);

  Bytes budget_bytes_;
  Bytes bytes_used_ = 0;
  ItemId next_id_ = 1;
  std::map<ItemId, MemoryItem> items_;
  std::vector<ActionRecord> log_;
};

// One canonical-JSON line per record, for debugging.
void write_action_log(std::ostream& out, const std::vector<ActionRecord>& log);

}  // namespace wpb
