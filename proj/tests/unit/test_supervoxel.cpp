#include <map>
#include <random>
#include <set>

#include "../oracles.hpp"
#include "doctest.h"
#include "scribsup/supervoxel.hpp"

using namespace scribsup;

namespace {

std::map<int, std::size_t> sizes(const SupervoxelMap& m) {
  std::map<int, std::size_t> out;
  for (auto id : m.ids) ++out[id];
  return out;
}

}  // namespace

TEST_CASE("uniform 12^3 with k=8 gives eight equal blocks") {
  const Volume v({12, 12, 12}, {1, 1, 1}, 0.5f);
  const SupervoxelMap m = slic3d(v, {8, 10.0, 10, 0.0});
  CHECK(m.count == 8);
  CHECK(m.is_partition());
  for (const auto& [id, n] : sizes(m)) CHECK(n == 216);
  CHECK(oracle::ids_six_connected(m.shape, m.ids));
}

TEST_CASE("two-region volume splits at the step") {
  Volume v({16, 8, 8}, {1, 1, 1});
  for (int z = 0; z < 8; ++z)
    for (int y = 0; y < 8; ++y)
      for (int x = 8; x < 16; ++x) v(x, y, z) = 1.0f;
  const SlicParams prm{2, 0.1, 10, 0.0};
  const SupervoxelMap m = slic3d(v, prm);
  REQUIRE(m.count == 2);
  for (int z = 0; z < 8; ++z)
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 16; ++x) CHECK(m.ids[v.shape().index(x, y, z)] == (x < 8 ? m.ids[0] : 1 - m.ids[0]));

  // every voxel sits with its nearest centre by D
  const SlicClustering c = slic3d_cluster(v, prm);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = v.shape().coords(i);
    const double own = slic_distance(c.centers[static_cast<std::size_t>(c.labels[i])], p[0], p[1], p[2],
                                      c.intensities[i], v.spacing(), c.step_mm, prm.compactness);
    for (const auto& ctr : c.centers) {
      CHECK(own <= slic_distance(ctr, p[0], p[1], p[2], c.intensities[i], v.spacing(), c.step_mm, prm.compactness) + 1e-12);
    }
  }
}

TEST_CASE("nearest-centre consistency on a random volume") {
  std::mt19937_64 rng(11);
  const Volume v = oracle::random_volume(rng, {14, 13, 9}, {1.0, 1.0, 2.5});
  const SlicParams prm{20, 5.0, 6, 0.0};
  const SlicClustering c = slic3d_cluster(v, prm);
  const double S = c.step_mm;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = v.shape().coords(i);
    const double own = slic_distance(c.centers[static_cast<std::size_t>(c.labels[i])], p[0], p[1], p[2],
                                      c.intensities[i], v.spacing(), S, prm.compactness);
    for (const auto& ctr : c.centers) {
      const bool in_window = std::abs(p[0] - ctr.x) * v.spacing().x <= S && std::abs(p[1] - ctr.y) * v.spacing().y <= S &&
                             std::abs(p[2] - ctr.z) * v.spacing().z <= S;
      if (!in_window) continue;
      CHECK(own <= slic_distance(ctr, p[0], p[1], p[2], c.intensities[i], v.spacing(), S, prm.compactness) + 1e-12);
    }
  }
}

TEST_CASE("k equal to the voxel count") {
  std::mt19937_64 rng(2);
  const Volume v = oracle::random_volume(rng, {4, 3, 2}, {1, 1, 1});
  const SupervoxelMap m = slic3d(v, {24, 10.0, 10, 0.0});
  CHECK(m.count == 24);
  std::set<int> ids(m.ids.begin(), m.ids.end());
  CHECK(ids.size() == 24);
  CHECK_THROWS_AS(slic3d(v, {25, 10.0, 10, 0.0}), Error);
  try {
    slic3d(v, {25, 10.0, 10, 0.0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::KTooLarge);
  }
}

TEST_CASE("anisotropic spacing shortens supervoxels in z") {
  const Volume v({24, 24, 24}, {1, 1, 4}, 0.3f);
  const SupervoxelMap m = slic3d(v, {27, 10.0, 10, 0.0});
  CHECK(m.is_partition());
  std::map<int, std::array<int, 6>> box;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto p = v.shape().coords(i);
    auto [it, fresh] = box.try_emplace(m.ids[i], std::array<int, 6>{p[0], p[0], p[1], p[1], p[2], p[2]});
    auto& b = it->second;
    b[0] = std::min(b[0], p[0]); b[1] = std::max(b[1], p[0]);
    b[4] = std::min(b[4], p[2]); b[5] = std::max(b[5], p[2]);
  }
  for (const auto& [id, b] : box) {
    const double ex = b[1] - b[0] + 1, ez = b[5] - b[4] + 1;
    CHECK(std::abs(ez - ex / 4.0) <= 1.0);
  }
}

TEST_CASE("step follows physical volume") {
  CHECK(slic_step_mm({10, 10, 10}, {1, 1, 1}, 1) == doctest::Approx(10.0));
  CHECK(slic_step_mm({16, 16, 4}, {1, 1, 4}, 8) == doctest::Approx(8.0));
}

TEST_CASE("determinism") {
  std::mt19937_64 rng(5);
  const Volume v = oracle::random_volume(rng, {20, 18, 6}, {1, 1, 3});
  const SlicParams prm{30, 10.0, 10, 0.0};
  CHECK(slic3d(v, prm).ids == slic3d(v, prm).ids);
}

TEST_CASE("enforce_connectivity") {
  SUBCASE("connected map is a fixpoint up to renumbering") {
    SupervoxelMap m{{4, 2, 1}, {1, 1, 1}, {5, 5, 3, 3, 5, 5, 3, 3}, 0};
    m.count = 6;  // ids need not be dense on input
    const auto out = enforce_connectivity(m);
    CHECK(out.count == 2);
    CHECK(out.ids == std::vector<std::int32_t>{0, 0, 1, 1, 0, 0, 1, 1});
  }
  SUBCASE("small island is absorbed by its host") {
    SupervoxelMap m{{6, 6, 6}, {1, 1, 1}, std::vector<std::int32_t>(216, 0), 2};
    m.ids[m.shape.index(2, 2, 2)] = 1;
    m.ids[m.shape.index(3, 2, 2)] = 1;
    // a second region of class 1 large enough to survive
    for (int z = 0; z < 6; ++z)
      for (int y = 0; y < 6; ++y) m.ids[m.shape.index(5, y, z)] = 1;
    const auto out = enforce_connectivity(m, 3.0);
    CHECK(out.count == 2);
    CHECK(out.ids[m.shape.index(2, 2, 2)] == out.ids[0]);
    CHECK(out.ids[m.shape.index(3, 2, 2)] == out.ids[0]);
    CHECK(out.ids[m.shape.index(5, 0, 0)] != out.ids[0]);
    CHECK(oracle::ids_six_connected(out.shape, out.ids));
  }
  SUBCASE("checkerboard") {
    SupervoxelMap m{{6, 6, 4}, {1, 1, 1}, std::vector<std::int32_t>(144), 2};
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
      const auto p = m.shape.coords(i);
      m.ids[i] = (p[0] + p[1] + p[2]) % 2;
    }
    const auto out = enforce_connectivity(m);
    CHECK(out.is_partition());
    CHECK(oracle::ids_six_connected(out.shape, out.ids));
    const auto merged = enforce_connectivity(m, 2.0);
    CHECK(merged.is_partition());
    CHECK(oracle::ids_six_connected(merged.shape, merged.ids));
    CHECK(merged.count < out.count);
  }
}

TEST_CASE("label volume conversion") {
  SupervoxelMap m{{3, 1, 1}, {1, 1, 1}, {0, 1, 2}, 3};
  const LabelVolume l = to_label_volume(m);
  CHECK(l.values() == std::vector<std::uint16_t>{0, 1, 2});
  CHECK(from_label_volume(l).ids == m.ids);
  const LabelVolume sparse({3, 1, 1}, {1, 1, 1}, 50, std::vector<std::uint16_t>{40, 7, 40});
  const auto back = from_label_volume(sparse);
  CHECK(back.count == 2);
  CHECK(back.ids == std::vector<std::int32_t>{1, 0, 1});
}
