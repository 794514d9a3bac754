#include <gtest/gtest.h>

#include <random>

#include "tomato/pipeline.hpp"
#include "tomato/spikesim.hpp"

using namespace tomato;

namespace {

Recording noise_recording(std::size_t sites, std::size_t samples, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> data(sites * samples);
  for (double& v : data) v = g(rng);
  return Recording(sites, samples, 15000.0, std::move(data));
}

void inject(Recording& rec, std::size_t site, std::size_t valley, double amplitude) {
  const auto shape = standard_shape(45);
  auto x = rec.site(site);
  for (std::size_t t = 0; t < 45; ++t) x[valley - 15 + t] += amplitude * shape[t];
}

}  // namespace

TEST(Mad, GaussianScaleNearOne) {
  const auto n = mad_normalize(noise_recording(4, 20000, 1.0, 1));
  for (double s : n.scale) {
    EXPECT_GE(s, 0.95);
    EXPECT_LE(s, 1.05);
  }
}

TEST(Mad, SitesAreScaledIndependently) {
  auto rec = noise_recording(2, 20000, 1.0, 2);
  for (double& v : rec.site(1)) v *= 5.0;
  const auto n = mad_normalize(rec);
  EXPECT_NEAR(n.scale[1] / n.scale[0], 5.0, 0.3);
  for (std::size_t t = 0; t < 10; ++t) {
    EXPECT_DOUBLE_EQ(n.recording.site(1)[t], rec.site(1)[t] / n.scale[1]);
  }
}

TEST(Mad, SecondPassIsIdentity) {
  const auto once = mad_normalize(noise_recording(3, 5001, 2.0, 3));
  const auto twice = mad_normalize(once.recording);
  for (double s : twice.scale) EXPECT_NEAR(s, 1.0, 1e-9);
  for (std::size_t i = 0; i < once.recording.data.size(); i += 97) {
    EXPECT_NEAR(once.recording.data[i], twice.recording.data[i], 1e-9);
  }
}

TEST(Mad, ConstantSiteIsAnError) {
  Recording rec(2, 100, 15000.0, std::vector<double>(200, 3.0));
  try {
    mad_normalize(rec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_input);
  }
}

TEST(Detect, AllZeroRecordingHasNoEvents) {
  const Recording rec(4, 1000, 15000.0, std::vector<double>(4000, 0.0));
  const auto ev = detect_events(rec, 4.0);
  EXPECT_EQ(ev.events.rows(), 0u);
  EXPECT_TRUE(ev.times.empty());
}

TEST(Detect, SingleInjectedSpike) {
  auto rec = noise_recording(4, 3000, 0.3, 4);
  const auto noise = rec;
  inject(rec, 1, 1000, 10.0);
  const auto ev = detect_events(rec, 4.0);
  ASSERT_EQ(ev.times.size(), 1u);
  EXPECT_EQ(ev.times[0], 1000u);
  ASSERT_EQ(ev.events.cols(), 180u);
  const auto shape = standard_shape(45);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t t = 0; t < 45; ++t) {
      const double injected = s == 1 ? 10.0 * shape[t] : 0.0;
      EXPECT_NEAR(ev.events(0, s * 45 + t), injected + noise.site(s)[985 + t], 1e-12);
    }
  }
}

TEST(Detect, DeadTimeKeepsTheLargerSpike) {
  auto rec = noise_recording(2, 3000, 0.2, 5);
  inject(rec, 0, 1000, 6.0);
  inject(rec, 1, 1020, 9.0);
  inject(rec, 0, 2000, 8.0);
  const auto ev = detect_events(rec, 4.0);
  ASSERT_EQ(ev.times.size(), 2u);
  EXPECT_EQ(ev.times[0], 1020u);
  EXPECT_EQ(ev.times[1], 2000u);
}

TEST(Detect, PositiveExtremaCountToo) {
  auto rec = noise_recording(1, 2000, 0.2, 6);
  inject(rec, 0, 1000, -8.0);  // upward spike
  const auto ev = detect_events(rec, 4.0);
  ASSERT_EQ(ev.times.size(), 1u);
  EXPECT_EQ(ev.times[0], 1000u);
}

TEST(Detect, BorderEventsDropped) {
  auto rec = noise_recording(1, 2000, 0.2, 7);
  inject(rec, 0, 15, 8.0);
  rec.site(0)[1990] = 9.0;
  const auto ev = detect_events(rec, 4.0, Window{20, 30});
  EXPECT_TRUE(ev.times.empty());
}

TEST(Detect, WindowInvariantsAndDeterminism) {
  auto rec = noise_recording(4, 60000, 1.0, 8);
  std::mt19937_64 rng(9);
  for (std::size_t t = 200; t + 200 < 60000; t += 150 + rng() % 300) inject(rec, rng() % 4, t, 8.0 + (rng() % 8));
  const auto norm = mad_normalize(rec);
  const Window w{12, 33};
  const auto a = detect_events(norm.recording, 4.0, w);
  const auto b = detect_events(norm.recording, 4.0, w);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.events, b.events);
  ASSERT_GT(a.times.size(), 100u);
  EXPECT_EQ(a.events.cols(), 4u * w.length());
  for (std::size_t i = 1; i < a.times.size(); ++i) EXPECT_GE(a.times[i] - a.times[i - 1], w.length());
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    EXPECT_GE(a.times[i], w.pre);
    EXPECT_LE(a.times[i] + w.post, 60000u);
    bool above = false;
    for (std::size_t s = 0; s < 4; ++s) above = above || std::abs(norm.recording.site(s)[a.times[i]]) > 4.0;
    EXPECT_TRUE(above);
  }
}

TEST(Detect, RejectsBadArguments) {
  const auto rec = noise_recording(1, 100, 1.0, 1);
  EXPECT_THROW(detect_events(rec, 0.0), Error);
  EXPECT_THROW(detect_events(rec, 4.0, Window{60, 60}), Error);
  EXPECT_THROW(detect_events(rec, 4.0, Window{10, 0}), Error);
}

TEST(Raster, OneEventAtOneSecond) {
  EventSet ev;
  ev.events = EventMatrix(1, 1, {0.0});
  ev.times = {15000};
  ClusterLabeling labels{{0}, {0}};
  const auto r = build_raster(ev, labels, 15000.0);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0], std::vector<double>{1.0});
  EXPECT_EQ(r.spike_count(), 1u);
}

TEST(Raster, RowsPerClusterAndMisalignment) {
  EventSet ev;
  ev.events = EventMatrix(3, 1, {0.0, 0.0, 0.0});
  ev.times = {100, 200, 300};
  const auto r = build_raster(ev, ClusterLabeling{{1, 0, 1}, {1, 0}}, 100.0);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0], std::vector<double>{2.0});
  EXPECT_EQ(r.rows[1], (std::vector<double>{1.0, 3.0}));
  EXPECT_THROW(build_raster(ev, ClusterLabeling{{0, 0}, {0}}, 100.0), Error);
}

TEST(RecordingType, ValidatesShape) {
  EXPECT_THROW(Recording(2, 3, 15000.0, std::vector<double>(5, 0.0)), Error);
  EXPECT_THROW(Recording(1, 3, 0.0, std::vector<double>(3, 0.0)), Error);
  EXPECT_THROW(Recording(1, 1, 15000.0, {std::nan("")}), Error);
}
