#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>

#include "acerac/replay.hpp"

using namespace acerac;

namespace {

struct Pushed {
  std::uint64_t episode;
  bool start;
  bool ends;
};

ReplayRecord record(Rng& rng, int sdim, int adim, bool start, bool terminal, bool truncated) {
  ReplayRecord r;
  r.state = rng.normal_vector(sdim);
  r.raw_action = rng.normal_vector(adim);
  r.mean = rng.normal_vector(adim);
  r.reward = rng.normal();
  r.log_behavior_density = rng.uniform(-2.0, 0.0);
  r.episode_start = start;
  r.terminal = terminal;
  r.truncated = truncated;
  if (terminal || truncated) r.final_state = rng.normal_vector(sdim);
  return r;
}

// Brute-force servability over the full push history.
std::vector<std::uint64_t> expected_starts(const std::vector<Pushed>& hist, std::size_t capacity, int n) {
  const std::uint64_t total = hist.size();
  const std::uint64_t oldest = total > capacity ? total - capacity : 0;
  auto held = [&](std::uint64_t g) { return g >= oldest && g < total; };
  std::vector<std::uint64_t> out;
  for (std::uint64_t j = oldest; j < total; ++j) {
    bool ok = true;
    for (int k = 0; k < n; ++k) {
      const std::uint64_t g = j + k;
      if (!held(g) || hist[g].episode != hist[j].episode) ok = false;
      else if (k < n - 1 && hist[g].ends) ok = false;
    }
    if (!ok) continue;
    if (!hist[j].start && !held(j - 1)) continue;
    const std::uint64_t last = j + n - 1;
    if (!hist[last].ends && !(held(last + 1) && hist[last + 1].episode == hist[j].episode)) continue;
    out.push_back(j);
  }
  return out;
}

}  // namespace

TEST_CASE("servable windows match the brute-force count under eviction") {
  Rng rng(51);
  for (int n : {1, 2, 5}) {
    for (std::size_t capacity : {std::size_t(7), std::size_t(20), std::size_t(1000)}) {
      ReplayBuffer buf(capacity, n, 2, 1);
      std::vector<Pushed> hist;
      std::uint64_t ep = 0;
      for (int e = 0; e < 30; ++e) {
        const int len = 1 + static_cast<int>(rng.index(12));
        const bool term = rng.uniform() < 0.5;
        ep = hist.size();
        for (int t = 0; t < len; ++t) {
          const bool last = t == len - 1;
          buf.push(record(rng, 2, 1, t == 0, last && term, last && !term));
          hist.push_back({ep, t == 0, last});
          const auto want = expected_starts(hist, capacity, n);
          REQUIRE(std::vector<std::uint64_t>(buf.valid_starts().begin(), buf.valid_starts().end()) == want);
        }
      }
    }
  }
}

TEST_CASE("window count for whole episodes") {
  Rng rng(52);
  const int n = 3;
  ReplayBuffer buf(10000, n, 1, 1);
  std::size_t want = 0;
  for (int len : {1, 2, 3, 4, 10, 25}) {
    for (int t = 0; t < len; ++t) buf.push(record(rng, 1, 1, t == 0, false, t == len - 1));
    want += len >= n ? len - n + 1 : 0;
  }
  CHECK(buf.valid_windows() == want);
}

TEST_CASE("windows never cross episodes and carry their context") {
  Rng rng(53);
  const int n = 4;
  ReplayBuffer buf(200, n, 2, 2);
  std::vector<ReplayRecord> recs;
  for (int e = 0; e < 10; ++e) {
    for (int t = 0; t < 9; ++t) {
      recs.push_back(record(rng, 2, 2, t == 0, t == 8 && e % 2 == 0, t == 8 && e % 2 == 1));
      buf.push(recs.back());
    }
  }
  for (std::uint64_t j : buf.valid_starts()) {
    const SequenceWindow w = buf.window_at(j);
    CHECK(w.j_offset == static_cast<std::int64_t>(j % 9));
    CHECK(w.start_of_episode == (j % 9 == 0));
    double lp = 0;
    for (int k = 0; k < n; ++k) {
      CHECK(w.states[k] == recs[j + k].state);
      CHECK(w.actions[k] == recs[j + k].raw_action);
      lp += recs[j + k].log_behavior_density;
    }
    CHECK(w.behavior_log_density == doctest::Approx(lp).epsilon(1e-14));
    const auto& last = recs[j + n - 1];
    if (last.ends_episode()) {
      CHECK(w.next_state == last.final_state);
      CHECK(w.terminal == last.terminal);
    } else {
      CHECK(w.next_state == recs[j + n].state);
      CHECK_FALSE(w.terminal);
    }
    if (!w.start_of_episode) CHECK(w.prev_action == recs[j - 1].raw_action);
  }
}

TEST_CASE("uniform sampling over servable windows") {
  Rng rng(54);
  ReplayBuffer buf(500, 2, 1, 1);
  for (int t = 0; t < 600; ++t) buf.push(record(rng, 1, 1, t % 40 == 0, false, t % 40 == 39));
  const int N = 30000;
  Rng draw(55);
  std::map<std::uint64_t, int> by_start;
  for (int i = 0; i < N; ++i) {
    const auto w = buf.sample_window(draw);
    REQUIRE(w.has_value());
    by_start[static_cast<std::uint64_t>(std::llround(w->rewards[0] * 1e6))]++;
  }
  const double k = static_cast<double>(buf.valid_windows());
  REQUIRE(by_start.size() == buf.valid_windows());
  double chi2 = 0;
  for (const auto& [s, c] : by_start) chi2 += (c - N / k) * (c - N / k) / (N / k);
  const boost::math::chi_squared dist(k - 1);
  CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.01);
}

TEST_CASE("snapshot round trip") {
  Rng rng(56);
  ReplayBuffer buf(30, 3, 2, 1);
  for (int t = 0; t < 47; ++t) buf.push(record(rng, 2, 1, t % 11 == 0, false, t % 11 == 10));
  const auto path = (std::filesystem::temp_directory_path() / "acerac_replay_test.bin").string();
  buf.save(path);
  const ReplayBuffer back = ReplayBuffer::load(path);
  std::remove(path.c_str());
  REQUIRE(back.valid_starts() == buf.valid_starts());
  for (std::uint64_t j : buf.valid_starts()) {
    const auto a = buf.window_at(j), b = back.window_at(j);
    CHECK(a.behavior_log_density == b.behavior_log_density);
    CHECK(a.next_state == b.next_state);
  }
}

TEST_CASE("push and construction errors") {
  Rng rng(57);
  CHECK_THROWS(ReplayBuffer(3, 2, 1, 1));
  ReplayBuffer buf(10, 2, 1, 1);
  CHECK_FALSE(buf.sample_window(rng).has_value());
  buf.push(record(rng, 1, 1, true, false, true));
  CHECK_THROWS(buf.push(record(rng, 1, 1, false, false, false)));
  ReplayRecord no_final = record(rng, 1, 1, true, true, false);
  no_final.final_state.resize(0);
  CHECK_THROWS(buf.push(no_final));
  CHECK_THROWS(buf.push(record(rng, 2, 1, true, false, false)));
  CHECK_THROWS_AS(buf.window_at(0), std::out_of_range);
}
