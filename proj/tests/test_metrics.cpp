#include <doctest.h>

#include <stdexcept>

#include "mandera/metrics.hpp"

using namespace mandera;

TEST_CASE("metrics on perfect detection") {
  auto m = metrics({30, 0, 0, 70});
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.accuracy == 1.0);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("metrics on a mixed confusion table") {
  auto m = metrics({28, 2, 2, 68});
  CHECK(m.precision == doctest::Approx(28.0 / 30.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(28.0 / 30.0).epsilon(1e-12));
  CHECK(m.accuracy == doctest::Approx(0.96).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(28.0 / 30.0).epsilon(1e-12));
}

TEST_CASE("metrics zero-denominator conventions") {
  auto m = metrics({0, 0, 30, 70});
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.accuracy == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(m.f1 == 0.0);
}

TEST_CASE("confusion_from_labels counts all four cells") {
  std::vector<int> truth = {1, 1, 0, 0, 1};
  std::vector<int> pred = {1, 0, 1, 0, 1};
  auto c = confusion_from_labels(truth, pred);
  CHECK(c.tp == 2);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 1);
  std::vector<int> short_pred = {1};
  CHECK_THROWS_AS(confusion_from_labels(truth, short_pred), std::invalid_argument);
}
