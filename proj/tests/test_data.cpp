#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "ltcal/csv_io.hpp"
#include "ltcal/dataset.hpp"
#include "ltcal/errors.hpp"
#include "ltcal/metrics.hpp"
#include "ltcal/rng.hpp"
#include "ltcal/synth.hpp"

using namespace ltcal;
using namespace ltcal::data;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ltcal_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("dataset construction validates labels, widths, emptiness") {
  CHECK_THROWS_AS(LogitsDataset({}, 2, "empty"), InvalidInputError);

  std::vector<LogitRecord> bad_label;
  bad_label.push_back({3, core::LogitVector({0.0, 1.0})});
  CHECK_THROWS_AS(LogitsDataset(std::move(bad_label), 2, "bad"), InvalidInputError);

  std::vector<LogitRecord> bad_width;
  bad_width.push_back({0, core::LogitVector({0.0, 1.0, 2.0})});
  CHECK_THROWS_AS(LogitsDataset(std::move(bad_width), 2, "bad"), InvalidInputError);
}

TEST_CASE("load_csv: three-row file") {
  TempDir dir;
  const auto path = dir.path / "small.csv";
  write_file(path, "label,z0,z1\n0,0.25,-1.5\n1,2,3\n0,-0.125,0.75\n");
  const auto ds = load_csv(path);
  CHECK(ds.size() == 3);
  CHECK(ds.num_classes() == 2);
  CHECK(ds[0].label == 0);
  CHECK(ds[1].logits[1] == 3.0);
  CHECK(ds.name() == "small");
}

TEST_CASE("load_csv: crlf accepted") {
  TempDir dir;
  const auto path = dir.path / "crlf.csv";
  write_file(path, "label,z0,z1\r\n0,1,2\r\n1,3,4\r\n");
  CHECK(load_csv(path).size() == 2);
}

TEST_CASE("load_csv: errors carry the line number") {
  TempDir dir;
  const auto bad_label = dir.path / "bad_label.csv";
  write_file(bad_label, "label,z0,z1\n0,0.1,0.2\n5,0.1,0.2\n");
  CHECK_THROWS_WITH_AS(load_csv(bad_label),
                       doctest::Contains("line 3"), InvalidInputError);

  const auto bad_value = dir.path / "bad_value.csv";
  write_file(bad_value, "label,z0,z1\n0,nan,0.2\n");
  CHECK_THROWS_WITH_AS(load_csv(bad_value), doctest::Contains("line 2"), InvalidInputError);

  const auto short_row = dir.path / "short_row.csv";
  write_file(short_row, "label,z0,z1\n0,0.1\n");
  CHECK_THROWS_WITH_AS(load_csv(short_row), doctest::Contains("line 2"), InvalidInputError);

  const auto bad_header = dir.path / "bad_header.csv";
  write_file(bad_header, "label,z0,logit1\n0,0.1,0.2\n");
  CHECK_THROWS_AS(load_csv(bad_header), InvalidInputError);

  CHECK_THROWS_AS(load_csv(dir.path / "does_not_exist.csv"), IoError);
}

TEST_CASE("csv round trip reproduces every value exactly") {
  TempDir dir;
  Rng rng(2024);
  std::vector<LogitRecord> records;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> z(3);
    for (double& x : z) {
      x = (2.0 * rng.next_unit() - 1.0) * std::pow(10.0, 30.0 * (rng.next_unit() - 0.5));
    }
    records.push_back({static_cast<int>(rng.next_index(3)), core::LogitVector(std::move(z))});
  }
  const LogitsDataset ds(std::move(records), 3, "roundtrip");

  const auto path = dir.path / "roundtrip.csv";
  save_csv(ds, path);
  const auto back = load_csv(path);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back[i].label == ds[i].label);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(back[i].logits[j] == ds[i].logits[j]);  // bitwise
    }
  }

  // a second save must produce identical bytes
  const auto path2 = dir.path / "roundtrip2.csv";
  save_csv(back, path2);
  CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("split: pinned sizes, determinism, stratification") {
  Rng rng(9);
  std::vector<LogitRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back({i % 2, core::LogitVector({rng.next_gaussian(), rng.next_gaussian()})});
  }
  const LogitsDataset ds(std::move(records), 2, "ten");

  const auto [fit, eval] = split(ds, 0.5, 77);
  CHECK(fit.size() == 5);
  CHECK(eval.size() == 5);

  const auto [fit2, eval2] = split(ds, 0.5, 77);
  for (std::size_t i = 0; i < fit.size(); ++i) {
    CHECK(fit[i].label == fit2[i].label);
    CHECK(fit[i].logits[0] == fit2[i].logits[0]);
  }
  CHECK(eval.size() == eval2.size());

  CHECK_THROWS_AS(split(ds, 0.0, 1), InvalidInputError);
  CHECK_THROWS_AS(split(ds, 1.0, 1), InvalidInputError);
  CHECK_THROWS_AS(split(ds, 0.01, 1), InvalidInputError);  // fit side would be empty
}

TEST_CASE("split: a single-sample class lands in the fit side") {
  Rng rng(10);
  std::vector<LogitRecord> records;
  records.push_back({2, core::LogitVector({0.0, 0.0, 5.0})});  // lone class-2 sample
  for (int i = 0; i < 20; ++i) {
    records.push_back(
        {i % 2, core::LogitVector({rng.next_gaussian(), rng.next_gaussian(), 0.0})});
  }
  const LogitsDataset ds(std::move(records), 3, "lone");
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto [fit, eval] = split(ds, 0.5, seed);
    std::size_t lone_in_fit = 0;
    for (const auto& r : fit.records()) lone_in_fit += (r.label == 2) ? 1 : 0;
    CHECK(lone_in_fit == 1);
    // every class with >= 2 samples is represented in the fit side
    const auto counts = class_counts(fit);
    CHECK(counts[0] >= 1);
    CHECK(counts[1] >= 1);
  }
}

TEST_CASE("class_stats: hand-computed example") {
  // class 0: two records predicted 0 with conf 0.9 (one correct, one labeled 1)
  const double logit = std::log(9.0);  // softmax([log 9, 0]) = [0.9, 0.1]
  std::vector<LogitRecord> records;
  records.push_back({0, core::LogitVector({logit, 0.0})});
  records.push_back({1, core::LogitVector({logit, 0.0})});
  const LogitsDataset ds(std::move(records), 2, "hand");

  const auto stats = class_stats(ds);
  REQUIRE(stats.size() == 2);
  CHECK(stats[0].count == 1);
  CHECK(stats[1].count == 1);
  // both records predicted class 0 with confidence 0.9
  CHECK(stats[0].mean_confidence.value() == doctest::Approx(0.9).epsilon(1e-12));
  CHECK_FALSE(stats[1].mean_confidence.has_value());  // nothing predicted as class 1
  CHECK(stats[0].accuracy.value() == 1.0);
  CHECK(stats[1].accuracy.value() == 0.0);
  CHECK(stats[0].mean_max_logit.value() == doctest::Approx(logit));
}

TEST_CASE("class_stats: perfect predictions give accuracy one and counts sum to N") {
  Rng rng(11);
  std::vector<LogitRecord> records;
  for (int i = 0; i < 30; ++i) {
    const int label = static_cast<int>(rng.next_index(3));
    std::vector<double> z(3, 0.0);
    z[static_cast<std::size_t>(label)] = 60.0;
    records.push_back({label, core::LogitVector(std::move(z))});
  }
  const LogitsDataset ds(std::move(records), 3, "perfect");
  const auto stats = class_stats(ds);
  std::size_t total = 0;
  for (const auto& s : stats) {
    total += s.count;
    if (s.count > 0) {
      CHECK(s.accuracy.value() == 1.0);
      CHECK(s.mean_confidence.value() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK(total == ds.size());
}

TEST_CASE("imbalance_factor: pinned values and zero-count error") {
  Rng rng(12);
  auto make = [&](std::size_t n0, std::size_t n1, int c) {
    std::vector<LogitRecord> records;
    for (std::size_t i = 0; i < n0; ++i) {
      records.push_back({0, core::LogitVector({rng.next_gaussian(), 0.0})});
    }
    for (std::size_t i = 0; i < n1; ++i) {
      records.push_back({1, core::LogitVector({0.0, rng.next_gaussian()})});
    }
    return LogitsDataset(std::move(records), c, "if");
  };
  CHECK(imbalance_factor(make(100, 100, 2)) == 1.0);
  CHECK(imbalance_factor(make(100, 10, 2)) == 10.0);

  std::vector<LogitRecord> records;
  records.push_back({0, core::LogitVector({0.0, 0.0, 0.0})});
  records.push_back({1, core::LogitVector({0.0, 0.0, 0.0})});
  const LogitsDataset missing(std::move(records), 3, "missing");  // class 2 empty
  CHECK_THROWS_AS(imbalance_factor(missing), InvalidInputError);
}

TEST_CASE("gen_synthetic: counts, determinism, validation") {
  SynthConfig cfg;
  cfg.num_classes = 2;
  cfg.imbalance_factor = 1.0;
  cfg.head_count = 50;
  cfg.seed = 3;
  const auto ds = gen_synthetic(cfg);
  const auto counts = class_counts(ds);
  CHECK(counts == std::vector<std::size_t>{50, 50});

  TempDir dir;
  save_csv(gen_synthetic(cfg), dir.path / "a.csv");
  save_csv(gen_synthetic(cfg), dir.path / "b.csv");
  CHECK(read_file(dir.path / "a.csv") == read_file(dir.path / "b.csv"));

  SynthConfig bad = cfg;
  bad.imbalance_factor = 0.5;
  CHECK_THROWS_AS(gen_synthetic(bad), InvalidInputError);
  bad = cfg;
  bad.noise_scale = 0.0;
  CHECK_THROWS_AS(gen_synthetic(bad), InvalidInputError);
  bad = cfg;
  bad.num_classes = 1;
  CHECK_THROWS_AS(gen_synthetic(bad), InvalidInputError);
}

TEST_CASE("gen_synthetic: long-tail profile is monotone and hits the target IF") {
  SynthConfig cfg;
  cfg.num_classes = 10;
  cfg.imbalance_factor = 100.0;
  cfg.head_count = 500;
  cfg.seed = 7;
  const auto counts = synth_class_counts(cfg);
  for (std::size_t c = 1; c < counts.size(); ++c) {
    CHECK(counts[c] <= counts[c - 1]);
  }
  const double realized =
      static_cast<double>(counts.front()) / static_cast<double>(counts.back());
  CHECK(realized == doctest::Approx(100.0).epsilon(0.25));  // rounding of the tail count
}

TEST_CASE("gen_synthetic: separable limit is fully confident and correct") {
  SynthConfig cfg;
  cfg.num_classes = 4;
  cfg.imbalance_factor = 1.0;
  cfg.head_count = 50;
  cfg.class_separation = 40.0;
  cfg.overconfidence_boost = 1.0;
  cfg.noise_scale = 1e-6;
  cfg.seed = 19;
  const auto ds = gen_synthetic(cfg);
  for (const auto& r : ds.records()) {
    const auto probs = core::softmax_values(r.logits.span());
    const auto pred = core::argmax_tiebreak(probs);
    CHECK(static_cast<int>(pred) == r.label);
    CHECK(probs[pred] > 0.999999);
  }
}

TEST_CASE("seed-7 long-tail fixture is measurably miscalibrated") {
  SynthConfig cfg;
  cfg.num_classes = 10;
  cfg.imbalance_factor = 100.0;
  cfg.head_count = 500;
  cfg.class_separation = 1.2;
  cfg.overconfidence_boost = 2.5;
  cfg.noise_scale = 1.0;
  cfg.seed = 7;
  const auto ds = gen_synthetic(cfg);
  CHECK(imbalance_factor(ds) == doctest::Approx(100.0).epsilon(0.01));

  const auto [fit, eval] = split(ds, 0.5, 7);
  std::vector<core::ProbVector> probs;
  for (const auto& r : eval.records()) probs.push_back(core::softmax(r.logits));
  const double raw_ece = metrics::ece(eval, probs, 15);
  CHECK(raw_ece > 5.0);
  // regression fixture, recorded at first build
  CHECK(raw_ece == doctest::Approx(30.4246960909).epsilon(1e-9));
}
