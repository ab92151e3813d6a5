#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "scenefit/database.hpp"
#include "scenefit/synthetic.hpp"

using namespace scenefit;
using namespace scenefit::testing;

namespace {

Scenelet simple_scenelet(std::mt19937_64& rng, const std::string& scene, const Vec2& origin,
                         bool with_chair) {
  Scenelet s;
  for (int i = 0; i < 7; ++i) {
    SkeletonFrame f = standing_frame({0.12 * i, uniform(rng, -0.05, 0.05)}, 0.0);
    for (Vec3& j : f.joints) {
      j += Vec3{uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05)};
    }
    s.frames.push_back(f);
  }
  s.center = 3;
  s.source_scene = scene;
  s.local_frame.world_from_local = Placement{origin.x(), origin.y(), 0.0, 0.0};
  if (with_chair) {
    s.objects.push_back(make_box_object(
        "chair", Placement{uniform(rng, -0.4, 0.4), uniform(rng, -0.4, 0.4), 0, 0},
        Vec3{0.25, 0.25, 0.4}));
  }
  s.id = scene + "/x";
  return s;
}

}  // namespace

TEST_CASE("scenelet density is a plain kernel sum") {
  std::mt19937_64 rng(3);
  DatabaseParams params;
  const double h = params.density_bandwidth;
  const double peak = 1.0 / (2.0 * kPi * h * h);

  SUBCASE("a single scenelet sits at the kernel peak") {
    SceneletDatabase db(params);
    db.add(simple_scenelet(rng, "a", {0, 0}, true));
    db.records()[0].charness.density = scenelet_density(db, 0);
    CHECK(db[0].charness.density == doctest::Approx(peak));
  }

  SUBCASE("two coincident origins double the density") {
    SceneletDatabase db(params);
    db.add(simple_scenelet(rng, "a", {1, 2}, true));
    db.add(simple_scenelet(rng, "a", {1, 2}, false));
    CHECK(scenelet_density(db, 0) == doctest::Approx(2.0 * peak));
  }

  SUBCASE("different scenes never mix") {
    SceneletDatabase db(params);
    db.add(simple_scenelet(rng, "a", {0, 0}, true));
    db.add(simple_scenelet(rng, "b", {0, 0}, true));
    CHECK(scenelet_density(db, 0) == doctest::Approx(peak));
  }

  SUBCASE("random origins match direct summation") {
    SceneletDatabase db(params);
    std::vector<Vec2> origins;
    for (int i = 0; i < 8; ++i) {
      origins.emplace_back(uniform(rng, -3, 3), uniform(rng, -3, 3));
      db.add(simple_scenelet(rng, "a", origins.back(), i % 2 == 0));
    }
    for (int i = 0; i < 8; ++i) {
      double expected = 0.0;
      for (const Vec2& o : origins) {
        expected += std::exp(-(o - origins[i]).squaredNorm() / (2.0 * h * h)) /
                    (2.0 * kPi * h * h);
      }
      CHECK(scenelet_density(db, i) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("charness bins") {
  std::mt19937_64 rng(5);

  SUBCASE("a single-scenelet database reproduces its own histogram") {
    SceneletDatabase db;
    db.add(simple_scenelet(rng, "a", {0, 0}, true));
    db.finalize();
    const auto& rec = db[0];
    REQUIRE(rec.objects.histograms.count("chair") == 1);
    REQUIRE(rec.charness.bins.count("chair") == 1);
    for (int j = 0; j < 25; ++j) {
      CHECK(rec.charness.bins.at("chair")[j] ==
            doctest::Approx(rec.objects.histograms.at("chair")[j]).epsilon(1e-12));
    }
  }

  SUBCASE("identical scenelets yield the shared histogram") {
    SceneletDatabase db;
    std::mt19937_64 fixed(7);
    const Scenelet proto = simple_scenelet(fixed, "a", {0, 0}, true);
    for (int i = 0; i < 4; ++i) {
      Scenelet copy = proto;
      copy.local_frame.world_from_local = Placement{0.5 * i, 0.0, 0.0, 0.0};
      db.add(copy);
    }
    db.finalize();
    for (int j = 0; j < 25; ++j) {
      CHECK(db[0].charness.bins.at("chair")[j] ==
            doctest::Approx(db[0].objects.histograms.at("chair")[j]).epsilon(1e-9));
    }
  }

  SUBCASE("a small database matches the direct-summation oracle") {
    SceneletDatabase db;
    for (int i = 0; i < 5; ++i) {
      db.add(simple_scenelet(rng, i < 3 ? "a" : "b",
                             {uniform(rng, -2, 2), uniform(rng, -2, 2)}, i % 2 == 0));
    }
    db.finalize();
    const double sigma = db.params().charness_sigma;

    for (size_t l = 0; l < db.size(); ++l) {
      for (const std::string& cat : db.params().categories) {
        for (int j = 0; j < 25; ++j) {
          double num = 0.0, den = 0.0;
          for (size_t k = 0; k < db.size(); ++k) {
            const double d = descriptor_distance(db[k].motion, db[l].motion);
            const double g = std::exp(-d * d / (2.0 * sigma * sigma));
            const double w = g / db[k].charness.density;
            const auto it = db[k].objects.histograms.find(cat);
            const double phi = it == db[k].objects.histograms.end() ? 0.0 : it->second[j];
            num += phi * w;
            den += w;
          }
          const double expected = num / den;
          const auto it = db[l].charness.bins.find(cat);
          const double got = it == db[l].charness.bins.end() ? 0.0 : it->second[j];
          CHECK(got == doctest::Approx(expected).epsilon(1e-9));
        }
      }
    }
  }

  SUBCASE("bins are convex combinations of the histograms") {
    SceneletDatabase db;
    for (int i = 0; i < 6; ++i) {
      db.add(simple_scenelet(rng, "a", {uniform(rng, -2, 2), uniform(rng, -2, 2)}, true));
    }
    db.finalize();
    for (size_t l = 0; l < db.size(); ++l) {
      for (int j = 0; j < 25; ++j) {
        double lo = 1e9, hi = -1e9;
        for (size_t k = 0; k < db.size(); ++k) {
          const double phi = db[k].objects.histograms.at("chair")[j];
          lo = std::min(lo, phi);
          hi = std::max(hi, phi);
        }
        const double h = db[l].charness.bins.at("chair")[j];
        CHECK(h >= lo - 1e-9);
        CHECK(h <= hi + 1e-9);
      }
    }
  }

  SUBCASE("duplicating a scene's scenelets leaves charness unchanged") {
    std::mt19937_64 fixed(11);
    std::vector<Scenelet> scenelets;
    for (int i = 0; i < 4; ++i) {
      scenelets.push_back(
          simple_scenelet(fixed, "a", {uniform(fixed, -2, 2), uniform(fixed, -2, 2)}, true));
    }
    scenelets.push_back(simple_scenelet(fixed, "b", {0, 0}, true));

    SceneletDatabase base;
    for (const Scenelet& s : scenelets) base.add(s);
    base.finalize();

    SceneletDatabase doubled;
    for (const Scenelet& s : scenelets) doubled.add(s);
    for (const Scenelet& s : scenelets) {
      if (s.source_scene == "a") doubled.add(s);  // duplicate scene a verbatim
    }
    doubled.finalize();

    for (size_t l = 0; l < base.size(); ++l) {
      for (const auto& [cat, bins] : base[l].charness.bins) {
        REQUIRE(doubled[l].charness.bins.count(cat) == 1);
        for (int j = 0; j < 25; ++j) {
          CHECK(bins[j] == doctest::Approx(doubled[l].charness.bins.at(cat)[j]).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("scenelet charness is the max bin") {
  CharnessRecord rec;
  CHECK(scenelet_charness(rec) == 0.0);

  rec.bins["chair"] = {};
  rec.bins["chair"][7] = 0.7;
  rec.bins["chair"][3] = 0.4;
  rec.bins["table"] = {};
  rec.bins["table"][12] = 0.65;
  CHECK(scenelet_charness(rec) == doctest::Approx(0.7));

  // Scan-max oracle on random records.
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    CharnessRecord r;
    double expected = 0.0;
    for (const std::string& cat : {"a", "b", "c"}) {
      std::array<double, 25> bins{};
      for (double& b : bins) {
        b = uniform(rng, 0, 1);
        expected = std::max(expected, b);
      }
      r.bins[cat] = bins;
    }
    CHECK(scenelet_charness(r) == doctest::Approx(expected));
  }
}

TEST_CASE("database build runs end to end on synthetic recordings") {
  RecordingTemplate tmpl;
  tmpl.name = "room0";
  tmpl.fps = 30.0;
  tmpl.start = {-2.5, 0.0};
  tmpl.objects = {make_box_object("chair", Placement{1.0, 0.0, 0.0, kPi}, {0.25, 0.25, 0.22}),
                  make_box_object("table", Placement{1.0, 1.2, 0.0, 0.0}, {0.6, 0.4, 0.35})};
  tmpl.actions = {SitAt{0, 1.5}, WalkTo{{-2.0, 1.5}}};
  const Recording rec = make_recording(tmpl, 1);
  REQUIRE(rec.frames.size() > 20);

  const SceneletDatabase db = build_database({rec});
  REQUIRE(db.size() > 0);
  bool any_chair = false;
  for (const SceneletRecord& r : db.records()) {
    CHECK(r.charness.density > 0.0);
    CHECK(r.charness.scenelet_charness >= 0.0);
    CHECK(r.charness.scenelet_charness <= 1.0);
    if (r.objects.histograms.count("chair")) any_chair = true;
  }
  CHECK(any_chair);
}
