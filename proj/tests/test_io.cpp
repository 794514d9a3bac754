#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "tomato/io.hpp"

using namespace tomato;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tomato_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

EventMatrix random_events(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 3.0);
  EventMatrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) m(i, j) = g(rng);
  }
  return m;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

}  // namespace

TEST_F(IoTest, EventsRoundTripBothFormats) {
  const auto m = random_events(17, 180);
  io::write_events(dir_ / "e.csv", m);
  io::write_events(dir_ / "e.bin", m);
  EXPECT_EQ(io::read_events(dir_ / "e.csv"), m);
  EXPECT_EQ(io::read_events(dir_ / "e.bin"), m);
}

TEST_F(IoTest, CsvHeaderAndErrors) {
  write_text(dir_ / "h.csv", "a,b\n1,2\n3,4\n");
  EXPECT_EQ(io::read_events(dir_ / "h.csv", true), EventMatrix(2, 2, {1, 2, 3, 4}));
  EXPECT_EQ(code_of([&] { io::read_events(dir_ / "h.csv"); }), Errc::parse);
  write_text(dir_ / "ragged.csv", "1,2\n3\n");
  EXPECT_EQ(code_of([&] { io::read_events(dir_ / "ragged.csv"); }), Errc::parse);
  EXPECT_EQ(code_of([&] { io::read_events(dir_ / "missing.csv"); }), Errc::io);
  write_text(dir_ / "short.bin", "abc");
  EXPECT_EQ(code_of([&] { io::read_events(dir_ / "short.bin"); }), Errc::parse);
}

TEST_F(IoTest, LabelsDensityAndTruth) {
  io::write_labels(dir_ / "l.csv", {3, 0, 2});
  EXPECT_EQ(io::read_labels(dir_ / "l.csv"), (std::vector<std::size_t>{3, 0, 2}));
  const DensityEstimate d{{-1.5, 2.25, 0.1}, DensityScale::log, Estimator::log_dtm};
  io::write_density(dir_ / "d.csv", d);
  EXPECT_EQ(io::read_density(dir_ / "d.csv").values, d.values);

  GroundTruth t;
  t.labels = {1, 0, 1};
  t.is_superposition = {false, true, false};
  io::write_ground_truth(dir_ / "t.csv", t);
  std::vector<bool> sup;
  EXPECT_EQ(io::read_ground_truth(dir_ / "t.csv", &sup), t.labels);
  EXPECT_EQ(sup, t.is_superposition);

  write_text(dir_ / "bad_labels.csv", "1\n-2\n");
  EXPECT_EQ(code_of([&] { io::read_labels(dir_ / "bad_labels.csv"); }), Errc::parse);
}

TEST_F(IoTest, DiagramJsonRoundTrip) {
  PersistenceDiagram d;
  d.points = {{20, -kInf, 0}, {17, 14, 3}, {9, 8, 9}};
  const auto back = io::diagram_from_json(io::diagram_json(d));
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.points[i].birth, d.points[i].birth);
    EXPECT_EQ(back.points[i].death, d.points[i].death);
  }
  io::write_json(dir_ / "d.json", io::diagram_json(d));
  EXPECT_EQ(io::read_json(dir_ / "d.json"), io::diagram_json(d));
  write_text(dir_ / "broken.json", "{");
  EXPECT_EQ(code_of([&] { io::read_json(dir_ / "broken.json"); }), Errc::parse);
}

TEST_F(IoTest, RecordingFormats) {
  std::vector<double> data(3 * 50);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = 0.5 * static_cast<double>(i) - 7.0;
  const Recording rec(3, 50, 20000.0, data);
  io::write_recording_bin(dir_ / "r.bin", rec);
  const auto back = io::read_recording(dir_ / "r.bin", 1.0);
  EXPECT_EQ(back.data, rec.data);
  EXPECT_EQ(back.n_sites, 3u);
  EXPECT_EQ(back.sampling_rate_hz, 20000.0);

  {
    std::ofstream csv(dir_ / "r.csv");
    csv << "s0,s1,s2\n";
    for (std::size_t t = 0; t < 50; ++t) csv << rec.site(0)[t] << ',' << rec.site(1)[t] << ',' << rec.site(2)[t] << '\n';
  }
  EXPECT_EQ(io::read_recording(dir_ / "r.csv", 20000.0, true).data, rec.data);

  std::vector<fs::path> sites;
  for (std::size_t s = 0; s < 3; ++s) {
    sites.push_back(dir_ / ("site" + std::to_string(s) + ".dat"));
    std::ofstream out(sites.back(), std::ios::binary);
    out.write(reinterpret_cast<const char*>(rec.site(s).data()), 50 * sizeof(double));
  }
  EXPECT_EQ(io::read_recording_sites(sites, 20000.0).data, rec.data);
}

TEST_F(IoTest, ConfusionAndRasterFiles) {
  const auto m = confusion(std::vector<std::size_t>{0, 0, 1}, std::vector<std::size_t>{4, 4, 2});
  io::write_confusion_csv(dir_ / "c.csv", m);
  std::ifstream in(dir_ / "c.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "neuron,4,2");
  const auto summary = io::evaluation_json(m);
  EXPECT_EQ(summary["diagonal_weight"].get<double>(), 1.0);
  EXPECT_EQ(summary["n_identified"].get<std::size_t>(), 2u);

  Raster r;
  r.rows = {{0.5}, {0.25, 1.0}};
  io::write_raster_csv(dir_ / "r.csv", r);
  std::ifstream rin(dir_ / "r.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(rin, line)) lines.push_back(line);
  EXPECT_EQ(lines, (std::vector<std::string>{"cluster_id,time_seconds", "0,0.5", "1,0.25", "1,1"}));
}
