// include/accentkit/georegion.hpp
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

#ifndef ACCENTKIT_GEOREGION_HPP_
#define ACCENTKIT_GEOREGION_HPP_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace accentkit::geo {

// Maps any finite longitude into [-180, 180).
double NormalizeLon(double lon);

// A predicted utterance location. Longitude is normalized on construction.
class Coordinate {
 public:
  // Throws ValidationError if lat is outside [-90, 90] or either value is
  // not finite.
  Coordinate(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

 private:
  double lat_;
  double lon_;
};

// Axis-aligned lat/lon box. Latitude membership is closed, longitude is
// half-open [west, east). A box with west > east crosses the antimeridian.
class BoundingBox {
 public:
  // lon_west is normalized into [-180, 180), lon_east into (-180, 180].
  // Throws ValidationError on lat_min > lat_max or out-of-range degrees.
  BoundingBox(double lat_min, double lat_max, double lon_west, double lon_east);

  double lat_min() const { return lat_min_; }
  double lat_max() const { return lat_max_; }
  double lon_west() const { return lon_west_; }
  double lon_east() const { return lon_east_; }
  bool wraps() const { return lon_west_ > lon_east_; }

 private:
  double lat_min_, lat_max_, lon_west_, lon_east_;
};

bool Contains(const BoundingBox &box, const Coordinate &c);

struct Region {
  std::string accent;
  std::vector<BoundingBox> boxes;  // ORed together
};

struct Assignment {
  std::optional<std::string> accent;     // first match in RegionSet order
  std::vector<std::string> all_matches;  // every matching accent, in order
};

// Ordered accent regions. Order is the priority used to resolve overlaps.
class RegionSet {
 public:
  RegionSet() = default;
  // Throws ValidationError on duplicate/empty labels or an accent without
  // boxes, and on aliases pointing at unknown accents.
  explicit RegionSet(std::vector<Region> regions,
                     std::map<std::string, std::string> aliases = {});

  const std::vector<Region> &regions() const { return regions_; }
  const std::map<std::string, std::string> &aliases() const { return aliases_; }
  size_t size() const { return regions_.size(); }
  bool empty() const { return regions_.empty(); }

  // Index of the region named exactly `accent`, or nullptr.
  const Region *Find(std::string_view accent) const;

  // Resolves a free-text accent label (e.g. a CommonVoice self-report) to a
  // region name: trimmed, case-insensitive, through the alias table first.
  std::optional<std::string> Resolve(std::string_view label) const;

 private:
  std::vector<Region> regions_;
  std::map<std::string, std::string> aliases_;
  // folded key -> region name, covering both names and aliases
  std::map<std::string, std::string> lookup_;
};

Assignment Assign(const RegionSet &regions, const Coordinate &c);

// Parses the region config JSON:
//   {"regions":[{"accent":s,"boxes":[{"lat_min":x,"lat_max":x,
//                                     "lon_west":x,"lon_east":x}]}],
//    "aliases":{label:accent}}            (aliases optional)
// Errors carry the accent name and the JSON field path.
RegionSet ParseRegions(std::string_view config_text);

// Inverse of ParseRegions (normalized longitudes are written back).
std::string RegionsToJson(const RegionSet &regions);

// Trim ASCII whitespace and fold ASCII case.
std::string FoldLabel(std::string_view label);

}  // namespace accentkit::geo

#endif  // ACCENTKIT_GEOREGION_HPP_
