#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "cml/local_map.hpp"
#include "doctest.h"

using namespace cml;

TEST_CASE("doubling map evaluation") {
  auto map = doubling_map();
  CHECK(map.lambda_min == 2.0);
  CHECK(std::abs(eval(map, 0.3) - 0.6) <= 1e-12);
  CHECK(eval(map, 0.0) == 0.0);
  CHECK(eval(map, 0.5) == 0.0);
  CHECK(eval(map, 0.75) == 0.5);
  CHECK(eval(map, 1.0) == 1.0);
}

TEST_CASE("decimal map evaluation") {
  auto map = decimal_map();
  CHECK(map.lambda_min == 10.0);
  CHECK(std::abs(eval(map, 0.37) - 0.7) <= 1e-12);
  CHECK(eval(map, 0.05) == 0.5);
  // 0.1 in binary sits just above 1/10; the value must still be near 0
  CHECK(std::abs(eval(map, 0.1)) <= 1e-12);
  CHECK(std::abs(eval(map, 0.99) - 0.9) <= 1e-12);
}

TEST_CASE("evaluation outside the unit interval fails") {
  auto map = doubling_map();
  CHECK_THROWS_AS(eval(map, -0.1), std::domain_error);
  CHECK_THROWS_AS(eval(map, 1.5), std::domain_error);
  CHECK_THROWS_AS(preimages(map, -0.2), std::domain_error);
  CHECK_THROWS_AS(preimages(map, 1.2), std::domain_error);
}

TEST_CASE("map construction validation") {
  // gap between branch domains
  CHECK_THROWS_AS(make_map({{0.0, 0.4, 2.0, 0.0}, {0.5, 1.0, 2.0, -1.0}}),
                  std::invalid_argument);
  // not expanding
  CHECK_THROWS_AS(make_map({{0.0, 1.0, 1.0, 0.0}}), std::invalid_argument);
  // image escapes [0,1]
  CHECK_THROWS_AS(make_map({{0.0, 1.0, 2.0, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(make_map({}), std::invalid_argument);
  CHECK_THROWS_AS(preset_map("unknown"), std::invalid_argument);

  auto tent = make_map({{0.0, 0.25, 4.0, 0.0}, {0.25, 1.0, -4.0 / 3, 4.0 / 3}});
  CHECK(tent.lambda_min == doctest::Approx(4.0 / 3).epsilon(1e-12));
}

TEST_CASE("doubling preimages") {
  auto map = doubling_map();
  auto pre = preimages(map, 0.6);
  REQUIRE(pre.size() == 2);
  CHECK(pre[0].first == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(pre[1].first == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(pre[0].second == 0.5);
  CHECK(pre[1].second == 0.5);
}

TEST_CASE("decimal preimages") {
  auto map = decimal_map();
  auto pre = preimages(map, 0.0);
  REQUIRE(pre.size() == 10);
  double wsum = 0.0;
  for (int k = 0; k < 10; ++k) {
    CHECK(pre[k].first == doctest::Approx(k / 10.0).epsilon(1e-12));
    CHECK(pre[k].second == doctest::Approx(0.1));
    wsum += pre[k].second;
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
  // y = 1 has only the closure point x = 1
  auto top = preimages(map, 1.0);
  REQUIRE(top.size() == 1);
  CHECK(top[0].first == 1.0);
}

TEST_CASE("preimages with a contracting-orientation branch") {
  auto map = make_map({{0.0, 1.0 / 3, 3.0, 0.0},
                       {1.0 / 3, 2.0 / 3, -3.0, 2.0},
                       {2.0 / 3, 1.0, 3.0, -2.0}});
  auto pre = preimages(map, 0.5);
  REQUIRE(pre.size() == 3);
  CHECK(pre[0].first == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(pre[1].first == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pre[2].first == doctest::Approx(5.0 / 6).epsilon(1e-12));
  for (auto& [x, w] : pre) {
    CHECK(w == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(eval(map, x) == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("markov grid detection") {
  auto d2 = doubling_map();
  auto d10 = decimal_map();
  CHECK(is_markov_for_grid(d2, 4));
  CHECK(is_markov_for_grid(d2, 2));
  CHECK_FALSE(is_markov_for_grid(d2, 3));
  CHECK(is_markov_for_grid(d10, 10));
  CHECK(is_markov_for_grid(d10, 20));
  CHECK_FALSE(is_markov_for_grid(d10, 7));
  auto thirds = make_map({{0.0, 1.0 / 3, 3.0, 0.0},
                          {1.0 / 3, 2.0 / 3, -3.0, 2.0},
                          {2.0 / 3, 1.0, 3.0, -2.0}});
  CHECK(is_markov_for_grid(thirds, 3));
  CHECK_FALSE(is_markov_for_grid(thirds, 2));
  CHECK_THROWS_AS(is_markov_for_grid(d2, 0), std::invalid_argument);
}
