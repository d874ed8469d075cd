// tests/georegion_test.cpp
//
// Copyright 2026 The accentkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include "accentkit/error.hpp"
#include "accentkit/georegion.hpp"
#include "doctest.h"

using namespace accentkit;
using namespace accentkit::geo;

namespace {

// The membership rule written out directly on raw degrees.
bool OracleContains(double lat_min, double lat_max, double west, double east,
                    double lat, double lon) {
  if (!(lat_min <= lat && lat <= lat_max)) return false;
  if (west > east) return lon >= west || lon < east;
  return west <= lon && lon < east;
}

}  // namespace

TEST_CASE("longitude normalization") {
  CHECK(NormalizeLon(190.0) == -170.0);
  CHECK(NormalizeLon(180.0) == -180.0);
  CHECK(NormalizeLon(-180.0) == -180.0);
  CHECK(NormalizeLon(-190.0) == 170.0);
  CHECK(NormalizeLon(540.0) == -180.0);
  CHECK(NormalizeLon(-74.0) == -74.0);
  CHECK(Coordinate(0, 190).lon() == -170.0);

  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(-5000.0, 5000.0);
  for (int i = 0; i < 10000; ++i) {
    double x = u(eng);
    double n = NormalizeLon(x);
    CHECK(n >= -180.0);
    CHECK(n < 180.0);
    CHECK(NormalizeLon(n) == n);
  }
}

TEST_CASE("coordinate validation") {
  CHECK_NOTHROW(Coordinate(90, 0));
  CHECK_NOTHROW(Coordinate(-90, 0));
  CHECK_THROWS_AS(Coordinate(95, 0), ValidationError);
  CHECK_THROWS_AS(Coordinate(NAN, 0), ValidationError);
  CHECK_THROWS_AS(Coordinate(0, INFINITY), ValidationError);
}

TEST_CASE("contains examples") {
  BoundingBox us(25, 50, -125, -65);
  CHECK(Contains(us, Coordinate(40.7, -74.0)));
  CHECK_FALSE(Contains(us, Coordinate(40.7, -65.0)));
  CHECK(Contains(us, Coordinate(40.7, -125.0)));
  CHECK(Contains(us, Coordinate(50.0, -100.0)));
  CHECK(Contains(us, Coordinate(25.0, -100.0)));

  BoundingBox nz(-50, -30, 160, -170);
  CHECK(nz.wraps());
  CHECK(Contains(nz, Coordinate(-41.3, 174.8)));
  CHECK(Contains(nz, Coordinate(-41.3, -175.0)));
  CHECK(Contains(nz, Coordinate(-41.3, 180.0)));
  CHECK_FALSE(Contains(nz, Coordinate(-41.3, -170.0)));
  CHECK_FALSE(Contains(nz, Coordinate(-41.3, 150.0)));
}

TEST_CASE("east edge at the antimeridian does not wrap") {
  BoundingBox b(0, 10, 170, 180);
  CHECK_FALSE(b.wraps());
  CHECK(b.lon_east() == 180.0);
  CHECK(Contains(b, Coordinate(5, 179.9)));
  CHECK_FALSE(Contains(b, Coordinate(5, 180.0)));  // normalizes to -180
  BoundingBox whole(-90, 90, -180, 180);
  CHECK(Contains(whole, Coordinate(90, -180)));
  CHECK(Contains(whole, Coordinate(-90, 179.999)));
}

TEST_CASE("contains agrees with the inequality definition") {
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> ulat(-90, 90), ulon(-180, 180);
  auto pick_lat = [&]() {
    switch (eng() % 8) {
      case 0: return 90.0;
      case 1: return -90.0;
      default: return std::round(ulat(eng) * 4) / 4;  // hit edges often
    }
  };
  auto pick_lon = [&]() {
    switch (eng() % 8) {
      case 0: return -180.0;
      case 1: return 179.75;
      default: return std::round(ulon(eng) * 4) / 4;
    }
  };
  size_t disagreements = 0, wrapping = 0, inside = 0;
  for (int i = 0; i < 10000; ++i) {
    double a = pick_lat(), b = pick_lat();
    double lat_min = std::min(a, b), lat_max = std::max(a, b);
    double west = pick_lon(), east = pick_lon();
    if (east == -180.0) east = 180.0;
    BoundingBox box(lat_min, lat_max, west, east);
    double lat = pick_lat(), lon = pick_lon();
    bool expect = OracleContains(lat_min, lat_max, west, east, lat, lon);
    if (Contains(box, Coordinate(lat, lon)) != expect) ++disagreements;
    wrapping += west > east;
    inside += expect;
  }
  CHECK(disagreements == 0);
  CHECK(wrapping > 1000);
  CHECK(inside > 500);
}

TEST_CASE("assign priority and matches") {
  RegionSet rs({{"US", {BoundingBox(25, 50, -125, -65)}},
                {"Canada", {BoundingBox(45, 70, -140, -50)}}});
  Assignment both = Assign(rs, Coordinate(47, -100));
  REQUIRE(both.accent);
  CHECK(*both.accent == "US");
  CHECK(both.all_matches == std::vector<std::string>{"US", "Canada"});

  Assignment none = Assign(rs, Coordinate(0, 0));
  CHECK_FALSE(none.accent);
  CHECK(none.all_matches.empty());

  Assignment ca = Assign(rs, Coordinate(60, -100));
  CHECK(*ca.accent == "Canada");
  CHECK(ca.all_matches == std::vector<std::string>{"Canada"});
}

TEST_CASE("assign label is the first of all_matches") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> ulat(-90, 90), ulon(-180, 180);
  std::vector<Region> regions;
  for (int r = 0; r < 6; ++r) {
    std::vector<BoundingBox> boxes;
    for (int k = 0; k < 2; ++k) {
      double a = ulat(eng), b = ulat(eng);
      boxes.emplace_back(std::min(a, b), std::max(a, b), ulon(eng), ulon(eng));
    }
    regions.push_back({"r" + std::to_string(r), boxes});
  }
  RegionSet rs(regions);
  for (int i = 0; i < 2000; ++i) {
    Coordinate c(ulat(eng), ulon(eng));
    Assignment a = Assign(rs, c);
    CHECK(a.accent.has_value() == !a.all_matches.empty());
    if (a.accent) CHECK(*a.accent == a.all_matches.front());
    size_t expected = 0;
    for (const Region &r : rs.regions()) {
      bool any = false;
      for (const BoundingBox &b : r.boxes) any = any || Contains(b, c);
      expected += any;
    }
    CHECK(a.all_matches.size() == expected);
  }
}

TEST_CASE("parse regions") {
  RegionSet rs = ParseRegions(
      R"({"regions":[{"accent":"US","boxes":[{"lat_min":25,"lat_max":50,"lon_west":-125,"lon_east":-65}]}]})");
  REQUIRE(rs.size() == 1);
  CHECK(rs.regions()[0].accent == "US");
  CHECK(rs.regions()[0].boxes.size() == 1);

  RegionSet wrap = ParseRegions(
      R"({"regions":[{"accent":"NZ","boxes":[{"lat_min":-50,"lat_max":-30,"lon_west":170,"lon_east":-160}]}]})");
  CHECK(wrap.regions()[0].boxes[0].wraps());

  RegionSet norm = ParseRegions(
      R"({"regions":[{"accent":"X","boxes":[{"lat_min":0,"lat_max":1,"lon_west":180,"lon_east":-180}]}]})");
  CHECK(norm.regions()[0].boxes[0].lon_west() == -180.0);
  CHECK(norm.regions()[0].boxes[0].lon_east() == 180.0);
  CHECK_FALSE(norm.regions()[0].boxes[0].wraps());
  CHECK_THROWS_AS(ParseRegions(
      R"({"regions":[{"accent":"X","boxes":[{"lat_min":0,"lat_max":1,"lon_west":0,"lon_east":190}]}]})"),
      ValidationError);

  CHECK(ParseRegions(R"({"regions":[]})").empty());
}

TEST_CASE("parse regions errors name the accent and field") {
  auto message = [](const char *text) {
    try {
      ParseRegions(text);
    } catch (const ValidationError &e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  std::string m = message(
      R"({"regions":[{"accent":"US","boxes":[{"lat_min":60,"lat_max":50,"lon_west":-125,"lon_east":-65}]}]})");
  CHECK(m.find("lat_min > lat_max") != std::string::npos);
  CHECK(m.find("US") != std::string::npos);
  CHECK(m.find("boxes[0]") != std::string::npos);

  m = message(
      R"({"regions":[{"accent":"US","boxes":[{"lat_min":0,"lat_max":1,"lon_west":0,"lon_east":1}]},
                     {"accent":"US","boxes":[{"lat_min":0,"lat_max":1,"lon_west":0,"lon_east":1}]}]})");
  CHECK(m.find("duplicate") != std::string::npos);

  m = message(
      R"({"regions":[{"accent":"India","boxes":[{"lat_min":0,"lat_max":91,"lon_west":0,"lon_east":1}]}]})");
  CHECK(m.find("India") != std::string::npos);
  CHECK(m.find("lat_max") != std::string::npos);

  m = message(
      R"({"regions":[{"accent":"India","boxes":[{"lat_min":0,"lat_max":1,"lon_west":0}]}]})");
  CHECK(m.find("lon_east") != std::string::npos);

  CHECK(message("{not json") != "no error");
  CHECK(message(R"({"regions":[{"accent":"A","boxes":[]}]})").find("A") != std::string::npos);
  CHECK(message(R"({"regions":[{"accent":"","boxes":[]}]})") != "no error");
  CHECK(message(R"({"regions":[],"aliases":{"x":"Nowhere"}})") != "no error");
}

TEST_CASE("label resolution") {
  RegionSet rs = ParseRegions(
      R"({"regions":[{"accent":"US","boxes":[{"lat_min":0,"lat_max":1,"lon_west":0,"lon_east":1}]}],
          "aliases":{"United States English":"US"}})");
  CHECK(rs.Resolve("US") == "US");
  CHECK(rs.Resolve("  us ") == "US");
  CHECK(rs.Resolve("united states ENGLISH") == "US");
  CHECK_FALSE(rs.Resolve("Canada"));
  CHECK_FALSE(rs.Resolve("   "));
}

TEST_CASE("regions json round trip") {
  RegionSet rs = ParseRegions(
      R"({"regions":[{"accent":"B","boxes":[{"lat_min":-50,"lat_max":-30,"lon_west":170,"lon_east":-160},
                                            {"lat_min":1,"lat_max":2,"lon_west":3,"lon_east":4}]},
                     {"accent":"A","boxes":[{"lat_min":0,"lat_max":1,"lon_west":0,"lon_east":1}]}],
          "aliases":{"bee":"B"}})");
  RegionSet back = ParseRegions(RegionsToJson(rs));
  REQUIRE(back.size() == 2);
  CHECK(back.regions()[0].accent == "B");
  CHECK(back.regions()[1].accent == "A");
  CHECK(back.regions()[0].boxes[0].lon_west() == 170.0);
  CHECK(back.regions()[0].boxes[1].lat_max() == 2.0);
  CHECK(back.aliases() == rs.aliases());
  CHECK(RegionsToJson(back) == RegionsToJson(rs));
}
