#pragma once

#include <cstdint>

#include "acerac/policy.hpp"
#include "acerac/rng.hpp"

namespace fixture {

using acerac::Rng;
using acerac::SequenceWindow;
using Eigen::VectorXd;

// A window with arbitrary (not policy-generated) contents.
inline SequenceWindow random_window(Rng& rng, int n, int sdim, int adim, bool start, bool terminal,
                                    double action_scale = 1.0) {
  SequenceWindow w;
  for (int k = 0; k < n; ++k) {
    w.states.push_back(rng.normal_vector(sdim));
    w.actions.push_back(action_scale * rng.normal_vector(adim));
    w.rewards.push_back(rng.normal());
  }
  w.next_state = rng.normal_vector(sdim);
  w.start_of_episode = start;
  w.terminal = terminal;
  if (!start) {
    w.prev_state = rng.normal_vector(sdim);
    w.prev_action = action_scale * rng.normal_vector(adim);
    w.j_offset = 1 + static_cast<std::int64_t>(rng.index(50));
  }
  w.behavior_log_density = rng.uniform(-3.0, 0.0) * n * adim;
  return w;
}

}  // namespace fixture
