#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ltcal/core_math.hpp"
#include "ltcal/errors.hpp"
#include "ltcal/rng.hpp"

using ltcal::InvalidInputError;
using ltcal::Rng;
using namespace ltcal::core;

namespace {

// Brute-force softmax without the max shift; safe for small logits only.
std::vector<double> naive_softmax(const std::vector<double>& z) {
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i]);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

std::vector<double> random_logits(Rng& rng, std::size_t c, double scale) {
  std::vector<double> z(c);
  for (double& x : z) x = scale * (2.0 * rng.next_unit() - 1.0);
  return z;
}

}  // namespace

TEST_CASE("softmax: pinned examples") {
  const auto p1 = softmax(LogitVector({0.0, 0.0}));
  CHECK(p1[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p1[1] == doctest::Approx(0.5).epsilon(1e-15));

  const auto p2 = softmax(LogitVector({std::log(2.0), 0.0}));
  CHECK(p2[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(p2[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const auto p3 = softmax(LogitVector({1000.0, 1000.0, 1000.0}));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(p3[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("softmax: sums to one and is shift invariant") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = 2 + rng.next_index(9);
    const auto z = random_logits(rng, c, 1e4);
    const auto p = softmax(LogitVector(z));
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) sum += p[i];
    CHECK(std::abs(sum - 1.0) <= 1e-12);

    const double shift = 100.0 * (2.0 * rng.next_unit() - 1.0);
    auto shifted = z;
    for (double& x : shifted) x += shift;
    const auto q = softmax(LogitVector(shifted));
    for (std::size_t i = 0; i < c; ++i) {
      CHECK(std::abs(p[i] - q[i]) <= 1e-12);
    }
  }
}

TEST_CASE("log_softmax: pinned examples and softmax agreement") {
  const auto l1 = log_softmax(LogitVector({0.0, 0.0}));
  CHECK(l1[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(l1[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));

  const auto l2 = log_softmax(LogitVector({1000.0, 0.0}));
  CHECK(std::abs(l2[0]) < 1e-300);
  CHECK(l2[1] == doctest::Approx(-1000.0).epsilon(1e-12));

  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto z = random_logits(rng, 5, 3.0);
    const auto l = log_softmax(LogitVector(z));
    const auto direct = naive_softmax(z);
    double expsum = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(std::abs(std::exp(l[i]) - direct[i]) <= 1e-12);
      expsum += std::exp(l[i]);
    }
    CHECK(std::abs(expsum - 1.0) <= 1e-10);
  }
}

TEST_CASE("nll: pinned examples, positivity, limit") {
  CHECK(nll(LogitVector({0.0, 0.0}), 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(nll(LogitVector({10.0, -10.0}), 0) == doctest::Approx(2.061e-9).epsilon(1e-3));

  // brute-force check against -log softmax
  const std::vector<double> z{1.0, 2.0, 3.0};
  const double expected = -std::log(naive_softmax(z)[2]);
  CHECK(nll(LogitVector(z), 2) == doctest::Approx(expected).epsilon(1e-14));

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = random_logits(rng, 4, 50.0);
    const int label = static_cast<int>(rng.next_index(4));
    CHECK(nll(LogitVector(v), label) >= 0.0);
  }

  // nll -> 0 as the true-class margin grows
  double prev = nll(LogitVector({0.0, 0.0}), 0);
  for (double margin : {5.0, 20.0, 100.0}) {
    const double cur = nll(LogitVector({margin, 0.0}), 0);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(prev < 1e-40);

  CHECK_THROWS_AS(nll(LogitVector({0.0, 0.0}), 2), InvalidInputError);
  CHECK_THROWS_AS(nll(LogitVector({0.0, 0.0}), -1), InvalidInputError);
}

TEST_CASE("scale_logits: scalar, elementwise, validation") {
  const auto s1 = scale_logits(LogitVector({2.0, 4.0}), 1.0);
  CHECK(s1[0] == 2.0);
  CHECK(s1[1] == 4.0);

  const auto s2 = scale_logits(LogitVector({2.0, 4.0}), 2.0);
  CHECK(s2[0] == 1.0);
  CHECK(s2[1] == 2.0);

  const std::vector<double> temps{2.0, 4.0};
  const auto s3 = scale_logits(LogitVector({2.0, 4.0}), temps);
  CHECK(s3[0] == 1.0);
  CHECK(s3[1] == 1.0);

  CHECK_THROWS_AS(scale_logits(LogitVector({1.0, 2.0}), 0.0), InvalidInputError);
  CHECK_THROWS_AS(scale_logits(LogitVector({1.0, 2.0}), -1.5), InvalidInputError);
  const std::vector<double> bad{1.0, -2.0};
  CHECK_THROWS_AS(scale_logits(LogitVector({1.0, 2.0}), bad), InvalidInputError);
}

TEST_CASE("scalar temperature scaling preserves argmax") {
  Rng rng(42);
  for (int trial = 0; trial < 500; ++trial) {
    const auto z = random_logits(rng, 2 + rng.next_index(6), 10.0);
    const double t = std::exp(4.0 * (2.0 * rng.next_unit() - 1.0));
    const LogitVector lv(z);
    CHECK(argmax_tiebreak(lv.span()) == argmax_tiebreak(scale_logits(lv, t).span()));
  }
}

TEST_CASE("argmax_tiebreak: examples and tie rule") {
  CHECK(argmax_tiebreak(std::vector<double>{1.0, 3.0, 2.0}) == 1);
  CHECK(argmax_tiebreak(std::vector<double>{5.0, 5.0}) == 0);
  CHECK(argmax_tiebreak(std::vector<double>{-1.0}) == 0);
  CHECK_THROWS_AS(argmax_tiebreak(std::vector<double>{}), InvalidInputError);
}

TEST_CASE("logit and probability vectors reject invalid input") {
  CHECK_THROWS_AS(LogitVector({1.0}), InvalidInputError);
  CHECK_THROWS_AS(LogitVector({1.0, std::nan("")}), InvalidInputError);
  CHECK_THROWS_AS(LogitVector({1.0, std::numeric_limits<double>::infinity()}),
                  InvalidInputError);
  CHECK_THROWS_AS(ProbVector({0.5, 0.6}), InvalidInputError);
  CHECK_THROWS_AS(ProbVector({-0.1, 1.1}), InvalidInputError);
}

TEST_CASE("predict returns argmax and its probability") {
  const auto p = softmax(LogitVector({0.0, 2.0, 1.0}));
  const Prediction pred = predict(p);
  CHECK(pred.predicted_class == 1);
  CHECK(pred.confidence == p[1]);
}
