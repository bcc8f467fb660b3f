#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "wpb/episode.hpp"
#include "wpb/memstore.hpp"

namespace wpb {

// What a policy sees at step t: the current step as exposed by its track and
// a read-only view of memory.
struct PolicyView {
  std::size_t t = 0;
  const Step& step;
  const MemoryState& memory;
};

struct PolicyParams {
  std::size_t stride = 10;  // uniform_sample
  double tau = 0.5;         // priority_threshold

  void validate() const;
};

class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string_view name() const = 0;
  // True for policies that read the privileged priority field.
  virtual bool privileged() const { return false; }
  virtual std::vector<Action> decide(const PolicyView& view) = 0;
};

// Registered baselines, unprivileged first.
const std::vector<std::string>& policy_names();
bool is_known_policy(std::string_view name);
bool is_privileged_policy(std::string_view name);

// Throws std::invalid_argument for unknown names or invalid params.
std::unique_ptr<Policy> make_policy(std::string_view name,
                                    const PolicyParams& params = {});

class NoMemory final : public Policy {
 public:
  std::string_view name() const override { return "no_mem"; }
  std::vector<Action> decide(const PolicyView& view) override;
};

class FifoStoreAll final : public Policy {
 public:
  std::string_view name() const override { return "fifo_store_all"; }
  std::vector<Action> decide(const PolicyView& view) override;
};

class LastKb final : public Policy {
 public:
  std::string_view name() const override { return "last_kb"; }
  std::vector<Action> decide(const PolicyView& view) override;
};

class UniformSample final : public Policy {
 public:
  explicit UniformSample(std::size_t stride) : stride_(stride) {}
  std::string_view name() const override { return "uniform_sample"; }
  std::vector<Action> decide(const PolicyView& view) override;

 private:
  std::size_t stride_;
};

class MergeAggressive final : public Policy {
 public:
  std::string_view name() const override { return "merge_aggressive"; }
  std::vector<Action> decide(const PolicyView& view) override;
};

class PriorityThreshold final : public Policy {
 public:
  explicit PriorityThreshold(double tau) : tau_(tau) {}
  std::string_view name() const override { return "priority_threshold"; }
  bool privileged() const override { return true; }
  std::vector<Action> decide(const PolicyView& view) override;

 private:
  double tau_;
};

// Keeps the highest-priority items, evicting the lowest recorded priority
// (ties: oldest timestep, then smallest id). Priorities are recorded by
// timestep for every step this instance chose to write.
class PriorityGreedy final : public Policy {
 public:
  std::string_view name() const override { return "priority_greedy"; }
  bool privileged() const override { return true; }
  std::vector<Action> decide(const PolicyView& view) override;

 private:
  std::map<std::size_t, double> recorded_;
};

// Evict-oldest-then-WRITE plan shared by last_kb and merge_aggressive.
std::vector<Action> plan_last_kb(const PolicyView& view);

}  // namespace wpb
