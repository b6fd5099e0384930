#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ltcal/errors.hpp"
#include "ltcal/metrics.hpp"
#include "ltcal/rng.hpp"

using namespace ltcal;
using namespace ltcal::metrics;

namespace {

// Confidence/correctness pairs drive everything; build 2-class records whose
// max softmax probability equals the wanted confidence and whose label makes
// the prediction right or wrong.
data::LogitsDataset from_conf(const std::vector<double>& conf, const std::vector<bool>& correct,
                              const char* name = "made") {
  std::vector<data::LogitRecord> records;
  for (std::size_t i = 0; i < conf.size(); ++i) {
    const double p = conf[i];
    const double margin = std::log(p / (1.0 - p));  // softmax([m, 0])[0] = p
    records.push_back({correct[i] ? 0 : 1, core::LogitVector({margin, 0.0})});
  }
  return data::LogitsDataset(std::move(records), 2, name);
}

std::vector<core::ProbVector> raw_probs(const data::LogitsDataset& ds) {
  std::vector<core::ProbVector> probs;
  for (const auto& r : ds.records()) probs.push_back(core::softmax(r.logits));
  return probs;
}

struct Sample {
  double conf;
  bool correct;
};

std::vector<Sample> sample_view(const data::LogitsDataset& ds,
                                const std::vector<core::ProbVector>& probs) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto pred = core::argmax_tiebreak(probs[i].span());
    out.push_back({probs[i][pred], static_cast<int>(pred) == ds[i].label});
  }
  return out;
}

// Literal equal-width transcription: independent of the library path.
double brute_force_ece(const std::vector<Sample>& samples, int bins) {
  const double n = static_cast<double>(samples.size());
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    double acc = 0.0, conf = 0.0, count = 0.0;
    for (const Sample& s : samples) {
      int k = static_cast<int>(std::floor(s.conf * bins));
      if (k > bins - 1) k = bins - 1;
      if (k == b) {
        count += 1.0;
        acc += s.correct ? 1.0 : 0.0;
        conf += s.conf;
      }
    }
    if (count > 0.0) {
      total += (count / n) * std::abs(acc / count - conf / count);
    }
  }
  return total * 100.0;
}

// Literal equal-count transcription using the documented tie/remainder rules.
double brute_force_esbin(const std::vector<Sample>& samples, int bins) {
  const std::size_t n = samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return samples[a].conf < samples[b].conf; });
  const std::size_t q = n / static_cast<std::size_t>(bins);
  const std::size_t r = n % static_cast<std::size_t>(bins);
  double total = 0.0;
  std::size_t pos = 0;
  for (int b = 0; b < bins; ++b) {
    const std::size_t size = q + (static_cast<std::size_t>(b) < r ? 1 : 0);
    double acc = 0.0, conf = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
      const Sample& s = samples[order[pos + k]];
      acc += s.correct ? 1.0 : 0.0;
      conf += s.conf;
    }
    pos += size;
    const double m = static_cast<double>(size);
    total += (m / static_cast<double>(n)) * std::abs(acc / m - conf / m);
  }
  return total * 100.0;
}

data::LogitsDataset random_dataset(Rng& rng, std::size_t n, int c) {
  std::vector<data::LogitRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> z(static_cast<std::size_t>(c));
    for (double& x : z) x = 3.0 * rng.next_gaussian();
    records.push_back(
        {static_cast<int>(rng.next_index(static_cast<std::size_t>(c))),
         core::LogitVector(std::move(z))});
  }
  return data::LogitsDataset(std::move(records), c, "random");
}

}  // namespace

TEST_CASE("accuracy: pinned fractions") {
  const auto all = from_conf({0.9, 0.8, 0.7}, {true, true, true});
  CHECK(accuracy(all, raw_probs(all)) == 1.0);
  const auto none = from_conf({0.9, 0.8, 0.7}, {false, false, false});
  CHECK(accuracy(none, raw_probs(none)) == 0.0);
  const auto some = from_conf({0.9, 0.8, 0.7, 0.6}, {true, true, true, false});
  CHECK(accuracy(some, raw_probs(some)) == 0.75);

  std::vector<core::ProbVector> short_probs = raw_probs(some);
  short_probs.pop_back();
  CHECK_THROWS_AS(accuracy(some, short_probs), InvalidInputError);
}

TEST_CASE("ece: pinned examples") {
  // four samples with confidence 0.8, three correct: |0.75 - 0.8| * 100 = 5
  const auto ds = from_conf({0.8, 0.8, 0.8, 0.8}, {true, true, true, false});
  CHECK(ece(ds, raw_probs(ds), 15) == doctest::Approx(5.0).epsilon(1e-12));

  // confidence exactly 1.0: the competing logit underflows to zero mass
  std::vector<data::LogitRecord> certain;
  certain.push_back({0, core::LogitVector({800.0, 0.0})});
  certain.push_back({0, core::LogitVector({900.0, 0.0})});
  const data::LogitsDataset perfect(std::move(certain), 2, "certain");
  CHECK(ece(perfect, raw_probs(perfect), 10) == 0.0);
}

TEST_CASE("esbin_ece: pinned examples and single-bin collapse") {
  const auto ds = from_conf({0.8, 0.8, 0.8, 0.8}, {true, true, true, false});
  CHECK(esbin_ece(ds, raw_probs(ds), 1) == doctest::Approx(5.0).epsilon(1e-12));
  // B=1 equals ECE at B=1 exactly
  CHECK(esbin_ece(ds, raw_probs(ds), 1) == ece(ds, raw_probs(ds), 1));
  CHECK_THROWS_AS(esbin_ece(ds, raw_probs(ds), 5), InvalidInputError);  // B > N
}

TEST_CASE("both metrics match their literal transcriptions on random data") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.next_index(100);
    const int c = 2 + static_cast<int>(rng.next_index(4));
    const auto ds = random_dataset(rng, n, c);
    const auto probs = raw_probs(ds);
    const auto samples = sample_view(ds, probs);
    for (int bins : {1, 5, 10, 15}) {
      CHECK(std::abs(ece(ds, probs, bins) - brute_force_ece(samples, bins)) <= 1e-12);
      if (static_cast<std::size_t>(bins) <= n) {
        CHECK(std::abs(esbin_ece(ds, probs, bins) - brute_force_esbin(samples, bins)) <= 1e-12);
      }
    }
    CHECK(ece(ds, probs, 1) == esbin_ece(ds, probs, 1));  // exact
  }
}

TEST_CASE("metrics stay inside [0, 100] and ignore sample order") {
  Rng rng(78);
  const auto ds = random_dataset(rng, 64, 3);
  const auto probs = raw_probs(ds);
  const double e = ece(ds, probs, 15);
  const double es = esbin_ece(ds, probs, 15);
  CHECK(e >= 0.0);
  CHECK(e <= 100.0);
  CHECK(es >= 0.0);
  CHECK(es <= 100.0);

  // reverse the dataset; metrics must not move (confidences distinct a.s.)
  std::vector<data::LogitRecord> rev(ds.records().rbegin(), ds.records().rend());
  const auto ds_rev = data::LogitsDataset(std::move(rev), 3, "reversed");
  const auto probs_rev = raw_probs(ds_rev);
  CHECK(ece(ds_rev, probs_rev, 15) == doctest::Approx(e).epsilon(1e-12));
  CHECK(esbin_ece(ds_rev, probs_rev, 15) == doctest::Approx(es).epsilon(1e-12));
}

TEST_CASE("mean_nll: pinned values and brute force") {
  std::vector<data::LogitRecord> records;
  records.push_back({0, core::LogitVector({0.0, 0.0})});
  records.push_back({1, core::LogitVector({0.0, 0.0})});
  const data::LogitsDataset ds(std::move(records), 2, "uniform");
  CHECK(mean_nll(ds) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  std::vector<data::LogitRecord> sharp;
  sharp.push_back({0, core::LogitVector({80.0, 0.0})});
  sharp.push_back({1, core::LogitVector({0.0, 80.0})});
  const data::LogitsDataset near(std::move(sharp), 2, "near");
  CHECK(mean_nll(near) < 1e-30);

  Rng rng(79);
  const auto rnd = random_dataset(rng, 50, 4);
  double by_hand = 0.0;
  for (const auto& r : rnd.records()) by_hand += core::nll(r.logits, r.label);
  by_hand /= static_cast<double>(rnd.size());
  CHECK(std::abs(mean_nll(rnd) - by_hand) <= 1e-12);
}

TEST_CASE("reliability rows: conservation and exact metric recomputation") {
  Rng rng(80);
  const auto ds = random_dataset(rng, 83, 3);
  const auto probs = raw_probs(ds);

  for (auto mode : {binning::BinMode::kEqualWidth, binning::BinMode::kEqualCount}) {
    const auto rows = reliability_data(ds, probs, 15, mode);
    std::size_t total = 0;
    for (const auto& r : rows) {
      total += r.count;
      CHECK(r.accuracy >= 0.0);
      CHECK(r.accuracy <= 1.0);
      CHECK(r.confidence >= 0.0);
      CHECK(r.confidence <= 1.0);
      CHECK(r.lo <= r.hi);
    }
    CHECK(total == ds.size());
    const double metric = mode == binning::BinMode::kEqualWidth ? ece(ds, probs, 15)
                                                                : esbin_ece(ds, probs, 15);
    CHECK(ece_from_rows(rows, ds.size()) == metric);  // same aggregation path, exact
  }

  // single bin reproduces the global averages
  const auto one = reliability_data(ds, probs, 1, binning::BinMode::kEqualWidth);
  REQUIRE(one.size() == 1);
  CHECK(one[0].count == ds.size());
  CHECK(one[0].accuracy == doctest::Approx(accuracy(ds, probs)).epsilon(1e-14));
}

TEST_CASE("bernoulli-consistent confidences drive both metrics toward zero") {
  Rng rng(81);
  const std::size_t n = 20000;
  std::vector<double> conf(n);
  std::vector<bool> correct(n);
  for (std::size_t i = 0; i < n; ++i) {
    conf[i] = 0.5 + 0.499 * rng.next_unit();
    correct[i] = rng.next_unit() < conf[i];
  }
  const auto ds = from_conf(conf, correct, "bernoulli");
  const auto probs = raw_probs(ds);
  CHECK(ece(ds, probs, 15) < 1.5);
  CHECK(esbin_ece(ds, probs, 15) < 1.5);
}
