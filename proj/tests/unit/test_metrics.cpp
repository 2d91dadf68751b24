#include <random>

#include "../oracles.hpp"
#include "doctest.h"
#include "scribsup/distance.hpp"
#include "scribsup/metrics.hpp"

using namespace scribsup;

namespace {

LabelVolume block(Shape s, Spacing sp, int x0, int x1, int y0, int y1, int z0, int z1) {
  LabelVolume v(s, sp, 2);
  for (int z = z0; z <= z1; ++z)
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) v(x, y, z) = 1;
  return v;
}

}  // namespace

TEST_CASE("dice") {
  const Shape s{8, 8, 1};
  const auto a = block(s, {1, 1, 1}, 2, 4, 2, 4, 0, 0);
  const auto b = block(s, {1, 1, 1}, 3, 5, 2, 4, 0, 0);
  const auto far = block(s, {1, 1, 1}, 6, 7, 6, 7, 0, 0);
  CHECK(dice(a, a, 1) == 1.0);
  CHECK(dice(a, far, 1) == 0.0);
  CHECK(dice(a, b, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(dice(b, a, 1) == dice(a, b, 1));
  const LabelVolume empty(s, {1, 1, 1}, 2);
  CHECK(dice(empty, empty, 1) == 1.0);
  CHECK(dice(empty, a, 1) == 0.0);
  CHECK_THROWS_AS(dice(a, LabelVolume({8, 8, 2}, {1, 1, 1}, 2), 1), Error);
}

TEST_CASE("precision") {
  const Shape s{8, 8, 1};
  const auto gt = block(s, {1, 1, 1}, 0, 5, 0, 0, 0, 0);
  auto pred = block(s, {1, 1, 1}, 0, 5, 1, 1, 0, 0);
  CHECK(*precision(pred, gt, 1) == 0.0);
  pred = block(s, {1, 1, 1}, 0, 2, 0, 0, 0, 0);
  CHECK(*precision(pred, gt, 1) == 1.0);
  // TP = 6, FP = 3
  pred = block(s, {1, 1, 1}, 0, 8 - 1, 0, 0, 0, 0);
  pred(7, 0, 0) = 0;
  pred(6, 7, 0) = 1;
  pred(5, 7, 0) = 1;
  CHECK(*precision(pred, gt, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(!precision(LabelVolume(s, {1, 1, 1}, 2), gt, 1).has_value());
}

TEST_CASE("hd95 on simple configurations") {
  const Shape s{5, 5, 6};
  const Spacing sp{1, 1, 2};
  const auto a = block(s, sp, 0, 4, 0, 4, 1, 1);
  const auto b = block(s, sp, 0, 4, 0, 4, 4, 4);
  CHECK(*hd95(a, a, 1) == 0.0);
  CHECK(*hd95(a, b, 1) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(*hd95(a, b, 1) == doctest::Approx(oracle::percentile95_brute(oracle::pooled_distances_brute(a, b, 1, sp))));
  CHECK(!hd95(a, LabelVolume(s, sp, 2), 1).has_value());
}

TEST_CASE("hd95 matches the all-pairs oracle on random blobs") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    const Shape s{static_cast<int>(4 + rng() % 9), static_cast<int>(4 + rng() % 9), static_cast<int>(2 + rng() % 11)};
    const Spacing sp{0.5 + (rng() % 10) / 10.0, 0.5 + (rng() % 10) / 10.0, 1.0 + (rng() % 30) / 10.0};
    const auto p = oracle::random_blobs(rng, s, sp, 3, 3);
    const auto g = oracle::random_blobs(rng, s, sp, 3, 3);
    for (int c = 1; c < 3; ++c) {
      const auto d = oracle::pooled_distances_brute(p, g, c, sp);
      const auto h = hd95(p, g, c, sp);
      CHECK(h.has_value() == !d.empty());
      if (d.empty()) continue;
      const double want = oracle::percentile95_brute(d);
      CHECK(std::abs(*h - want) < 1e-9);
      CHECK(*h <= *std::max_element(d.begin(), d.end()) + 1e-12);
      CHECK(std::abs(*hd95(g, p, c, sp) - *h) < 1e-9);
      const Spacing twice{2 * sp.x, 2 * sp.y, 2 * sp.z};
      CHECK(std::abs(*hd95(p, g, c, twice) - 2 * *h) < 1e-9);
    }
  }
}

TEST_CASE("squared EDT against brute force") {
  std::mt19937_64 rng(23);
  const Shape s{7, 6, 5};
  const Spacing sp{0.8, 1.1, 3.0};
  std::vector<std::uint8_t> f(s.voxels(), 0);
  for (int k = 0; k < 6; ++k) f[rng() % f.size()] = 1;
  const auto d = squared_edt(s, sp, f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto p = s.coords(i);
    double best = 1e300;
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (!f[j]) continue;
      const auto q = s.coords(j);
      const double dx = (p[0] - q[0]) * sp.x, dy = (p[1] - q[1]) * sp.y, dz = (p[2] - q[2]) * sp.z;
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    CHECK(std::abs(d[i] - best) < 1e-9);
  }
  const auto none = squared_edt(s, sp, std::vector<std::uint8_t>(s.voxels(), 0));
  CHECK(std::isinf(none[0]));
}

TEST_CASE("boundary voxels include the image border") {
  const Shape s{3, 3, 3};
  std::vector<std::uint8_t> all(27, 1);
  CHECK(boundary_voxels(s, all).size() == 26);
}

TEST_CASE("percentile interpolation") {
  CHECK(percentile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(percentile({5}, 0.95) == 5.0);
  CHECK(percentile({0, 10}, 0.95) == doctest::Approx(9.5));
}

TEST_CASE("evaluate flags undefined entries") {
  const Shape s{6, 6, 2};
  LabelVolume gt(s, {1, 1, 1}, 3);
  LabelVolume pred(s, {1, 1, 1}, 3);
  gt(1, 1, 0) = 1;
  pred(1, 1, 0) = 1;
  gt(4, 4, 1) = 2;  // class 2 missing in the prediction
  const auto r = evaluate(pred, gt);
  REQUIRE(r.per_class.size() == 2);
  CHECK(r.per_class[0].dice == 1.0);
  CHECK(*r.per_class[0].hd95_mm == 0.0);
  CHECK(r.per_class[1].dice == 0.0);
  CHECK(!r.per_class[1].hd95_mm.has_value());
  CHECK(!r.per_class[1].precision.has_value());
  CHECK(*r.mean_dice == 0.5);
  CHECK(*r.mean_hd95_mm == 0.0);
  CHECK(*r.mean_precision == 1.0);
  CHECK(r.undefined.size() == 2);
}
