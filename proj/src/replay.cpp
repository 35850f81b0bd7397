#include "acerac/replay.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <stdexcept>

#include "binary_io.hpp"

namespace acerac {

namespace {

constexpr std::array<char, 8> kSnapshotMagic = {'A', 'C', 'R', 'P', 'L', 'Y', '0', '1'};

void put(std::vector<double>& buf, std::size_t slot, Eigen::Index width, const VectorXd& v) {
  const std::size_t base = slot * static_cast<std::size_t>(width);
  if (buf.size() < base + width) buf.resize(base + width);
  std::copy(v.data(), v.data() + width, buf.begin() + static_cast<std::ptrdiff_t>(base));
}

VectorXd get(const std::vector<double>& buf, std::size_t slot, Eigen::Index width) {
  return Eigen::Map<const VectorXd>(buf.data() + slot * static_cast<std::size_t>(width), width);
}

template <typename T>
void put_scalar(std::vector<T>& buf, std::size_t slot, T v) {
  if (buf.size() <= slot) buf.resize(slot + 1);
  buf[slot] = v;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, int n, Eigen::Index state_dim,
                           Eigen::Index action_dim)
    : capacity_(capacity), n_(n), sdim_(state_dim), adim_(action_dim) {
  if (n < 1) throw std::invalid_argument("ReplayBuffer: n must be >= 1");
  if (capacity < static_cast<std::size_t>(n) + 2) {
    throw std::invalid_argument("ReplayBuffer: capacity must be at least n + 2");
  }
  if (state_dim <= 0 || action_dim <= 0) {
    throw std::invalid_argument("ReplayBuffer: dimensions must be positive");
  }
}

void ReplayBuffer::write_slot(std::size_t s, const ReplayRecord& rec, std::uint64_t episode) {
  put(states_, s, sdim_, rec.state);
  put(actions_, s, adim_, rec.raw_action);
  put(means_, s, adim_, rec.mean);
  put(final_states_, s, sdim_,
      rec.ends_episode() ? rec.final_state : VectorXd::Zero(sdim_).eval());
  put_scalar(rewards_, s, rec.reward);
  put_scalar(log_densities_, s, rec.log_behavior_density);
  std::uint8_t f = 0;
  if (rec.episode_start) f |= kStart;
  if (rec.terminal) f |= kTerminal;
  if (rec.truncated) f |= kTruncated;
  put_scalar(flags_, s, f);
  put_scalar(episode_, s, episode);
}

void ReplayBuffer::push(const ReplayRecord& rec) {
  if (rec.state.size() != sdim_ || rec.raw_action.size() != adim_ || rec.mean.size() != adim_) {
    throw std::invalid_argument("ReplayBuffer::push: record dimensions do not match buffer");
  }
  if (rec.ends_episode() && rec.final_state.size() != sdim_) {
    throw std::invalid_argument("ReplayBuffer::push: episode-ending record lacks final_state");
  }
  const std::uint64_t g = total_;
  if (g > 0 && ends(g - 1) && !rec.episode_start) {
    throw std::invalid_argument("ReplayBuffer::push: record after an episode end must start one");
  }
  if (rec.episode_start || g == 0) current_episode_ = g;

  if (total_ >= capacity_) {
    const std::uint64_t evicted = total_ - capacity_;
    while (!valid_.empty() && valid_.front() <= evicted) valid_.pop_front();
    // A mid-episode window right after the evicted step loses its predecessor.
    if (!valid_.empty() && valid_.front() == evicted + 1 && !starts(evicted + 1)) {
      valid_.pop_front();
    }
  }
  write_slot(slot(g), rec, current_episode_);
  ++total_;

  const auto n = static_cast<std::uint64_t>(n_);
  for (std::uint64_t j : {g + 1 >= n + 1 ? g - n : UINT64_MAX, g + 1 >= n ? g + 1 - n : UINT64_MAX}) {
    if (j == UINT64_MAX) continue;
    if (!valid_.empty() && j <= valid_.back()) continue;
    if (is_valid_start(j)) valid_.push_back(j);
  }
}

bool ReplayBuffer::is_valid_start(std::uint64_t j) const {
  const auto n = static_cast<std::uint64_t>(n_);
  if (!held(j) || j + n > total_) return false;
  if (!starts(j) && (j == 0 || !held(j - 1))) return false;
  const std::uint64_t ep = episode_[slot(j)];
  const std::uint64_t last = j + n - 1;
  if (episode_[slot(last)] != ep) return false;
  if (ends(last)) return true;
  return last + 1 < total_ && episode_[slot(last + 1)] == ep;
}

SequenceWindow ReplayBuffer::window_at(std::uint64_t j) const {
  if (!is_valid_start(j)) throw std::out_of_range("ReplayBuffer::window_at: not a servable start");
  SequenceWindow w;
  w.states.reserve(n_);
  w.actions.reserve(n_);
  w.rewards.reserve(n_);
  for (int k = 0; k < n_; ++k) {
    const std::size_t s = slot(j + k);
    w.states.push_back(get(states_, s, sdim_));
    w.actions.push_back(get(actions_, s, adim_));
    w.rewards.push_back(rewards_[s]);
    w.behavior_log_density += log_densities_[s];
  }
  const std::uint64_t last = j + n_ - 1;
  if (ends(last)) {
    w.next_state = get(final_states_, slot(last), sdim_);
    w.terminal = flags_[slot(last)] & kTerminal;
  } else {
    w.next_state = get(states_, slot(last + 1), sdim_);
  }
  w.start_of_episode = starts(j);
  w.j_offset = static_cast<std::int64_t>(j - episode_[slot(j)]);
  if (!w.start_of_episode) {
    w.prev_state = get(states_, slot(j - 1), sdim_);
    w.prev_action = get(actions_, slot(j - 1), adim_);
  }
  return w;
}

std::optional<SequenceWindow> ReplayBuffer::sample_window(Rng& rng) const {
  if (valid_.empty()) return std::nullopt;
  return window_at(valid_[rng.index(valid_.size())]);
}

void ReplayBuffer::rebuild_index() {
  valid_.clear();
  for (std::uint64_t j = oldest(); j < total_; ++j) {
    if (is_valid_start(j)) valid_.push_back(j);
  }
}

void ReplayBuffer::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("ReplayBuffer::save: cannot open " + path);
  os.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  io::write_le<std::uint64_t>(os, capacity_);
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(n_));
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(sdim_));
  io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(adim_));
  io::write_le<std::uint64_t>(os, total_);
  io::write_le<std::uint64_t>(os, current_episode_);
  for (std::uint64_t g = oldest(); g < total_; ++g) {
    const std::size_t s = slot(g);
    for (Eigen::Index i = 0; i < sdim_; ++i) io::write_f64(os, states_[s * sdim_ + i]);
    for (Eigen::Index i = 0; i < adim_; ++i) io::write_f64(os, actions_[s * adim_ + i]);
    for (Eigen::Index i = 0; i < adim_; ++i) io::write_f64(os, means_[s * adim_ + i]);
    for (Eigen::Index i = 0; i < sdim_; ++i) io::write_f64(os, final_states_[s * sdim_ + i]);
    io::write_f64(os, rewards_[s]);
    io::write_f64(os, log_densities_[s]);
    io::write_le<std::uint8_t>(os, flags_[s]);
    io::write_le<std::uint64_t>(os, episode_[s]);
  }
  if (!os) throw std::runtime_error("ReplayBuffer::save: write failed");
}

ReplayBuffer ReplayBuffer::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ReplayBuffer::load: cannot open " + path);
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kSnapshotMagic) throw std::runtime_error("ReplayBuffer::load: bad magic");
  const auto capacity = io::read_le<std::uint64_t>(is);
  const auto n = io::read_le<std::uint32_t>(is);
  const auto sdim = io::read_le<std::uint32_t>(is);
  const auto adim = io::read_le<std::uint32_t>(is);
  ReplayBuffer buf(capacity, static_cast<int>(n), sdim, adim);
  buf.total_ = io::read_le<std::uint64_t>(is);
  buf.current_episode_ = io::read_le<std::uint64_t>(is);
  for (std::uint64_t g = buf.oldest(); g < buf.total_; ++g) {
    ReplayRecord rec;
    rec.state.resize(sdim);
    rec.raw_action.resize(adim);
    rec.mean.resize(adim);
    rec.final_state.resize(sdim);
    for (auto& v : rec.state) v = io::read_f64(is);
    for (auto& v : rec.raw_action) v = io::read_f64(is);
    for (auto& v : rec.mean) v = io::read_f64(is);
    for (auto& v : rec.final_state) v = io::read_f64(is);
    rec.reward = io::read_f64(is);
    rec.log_behavior_density = io::read_f64(is);
    const auto f = io::read_le<std::uint8_t>(is);
    rec.episode_start = f & kStart;
    rec.terminal = f & kTerminal;
    rec.truncated = f & kTruncated;
    const auto ep = io::read_le<std::uint64_t>(is);
    buf.write_slot(buf.slot(g), rec, ep);
  }
  buf.rebuild_index();
  return buf;
}

}  // namespace acerac
