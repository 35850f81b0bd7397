#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "acerac/policy.hpp"
#include "acerac/rng.hpp"

namespace acerac {

/// One environment step as stored for replay.
struct ReplayRecord {
  VectorXd state;
  VectorXd raw_action;                // unclipped; raw_action - mean is the executed xi
  double reward = 0.0;
  VectorXd mean;                      // A(s; theta) when the action was taken
  double log_behavior_density = 0.0;  // ln p(a_t | xi_{t-1}, s_t) at execution time
  bool episode_start = false;
  bool terminal = false;              // episode ended in an absorbing state
  bool truncated = false;             // episode ended on the time limit
  VectorXd final_state;               // s_{t+1}; required iff terminal or truncated

  bool ends_episode() const { return terminal || truncated; }
};

/// Ring buffer of steps serving n-step windows that never cross an episode
/// boundary.
///
/// Start index j is servable iff steps j..j+n-1 belong to one episode and are
/// all held, s_{j+n} is known (record j+n of the same episode, or the final
/// state of step j+n-1), and for mid-episode j the preceding step j-1 is
/// still held (it is needed to re-derive xi_{j-1} under new parameters).
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int n, Eigen::Index state_dim, Eigen::Index action_dim);

  /// Appends a step, evicting the oldest at capacity. Throws if the record
  /// does not start an episode right after one ended.
  void push(const ReplayRecord& rec);

  std::size_t size() const { return static_cast<std::size_t>(total_ - oldest()); }
  std::size_t capacity() const { return capacity_; }
  int n() const { return n_; }
  std::uint64_t total_pushed() const { return total_; }
  std::size_t valid_windows() const { return valid_.size(); }
  bool ready() const { return !valid_.empty(); }

  /// Uniform over servable start indices; nullopt when none exist.
  std::optional<SequenceWindow> sample_window(Rng& rng) const;

  /// Servable start indices (global step numbers), ascending.
  const std::deque<std::uint64_t>& valid_starts() const { return valid_; }
  SequenceWindow window_at(std::uint64_t j) const;
  bool is_valid_start(std::uint64_t j) const;

  /// Binary snapshot: "ACRPLY01" header, geometry, then packed records.
  void save(const std::string& path) const;
  static ReplayBuffer load(const std::string& path);

 private:
  std::uint64_t oldest() const { return total_ > capacity_ ? total_ - capacity_ : 0; }
  std::size_t slot(std::uint64_t g) const { return static_cast<std::size_t>(g % capacity_); }
  bool held(std::uint64_t g) const { return g >= oldest() && g < total_; }
  bool ends(std::uint64_t g) const { return flags_[slot(g)] & (kTerminal | kTruncated); }
  bool starts(std::uint64_t g) const { return flags_[slot(g)] & kStart; }
  void write_slot(std::size_t s, const ReplayRecord& rec, std::uint64_t episode);
  void rebuild_index();

  static constexpr std::uint8_t kStart = 1;
  static constexpr std::uint8_t kTerminal = 2;
  static constexpr std::uint8_t kTruncated = 4;

  std::size_t capacity_;
  int n_;
  Eigen::Index sdim_;
  Eigen::Index adim_;
  std::uint64_t total_ = 0;
  std::uint64_t current_episode_ = 0;

  // Flat per-slot storage, grown up to capacity.
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> means_;
  std::vector<double> final_states_;
  std::vector<double> rewards_;
  std::vector<double> log_densities_;
  std::vector<std::uint8_t> flags_;
  std::vector<std::uint64_t> episode_;  // global index of the episode's first step

  std::deque<std::uint64_t> valid_;
};

}  // namespace acerac
