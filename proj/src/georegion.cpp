// src/georegion.cpp
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

#include "accentkit/georegion.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "accentkit/error.hpp"
#include "json.hpp"

namespace accentkit::geo {

namespace {

using nlohmann::json;

std::string Quote(std::string_view s) {
  return "\"" + std::string(s) + "\"";
}

double RequireNumber(const json &obj, const std::string &key,
                     const std::string &path) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ValidationError(path + "." + key + ": missing field");
  if (!it->is_number())
    throw ValidationError(path + "." + key + ": expected a number");
  return it->get<double>();
}

}  // namespace

double NormalizeLon(double lon) {
  if (lon >= -180.0 && lon < 180.0) return lon;
  double r = std::fmod(lon + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r - 180.0;
}

Coordinate::Coordinate(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon))
    throw ValidationError("coordinate is not finite");
  if (lat < -90.0 || lat > 90.0) {
    std::ostringstream os;
    os << "latitude " << lat << " out of range [-90, 90]";
    throw ValidationError(os.str());
  }
  lat_ = lat;
  lon_ = NormalizeLon(lon);
}

BoundingBox::BoundingBox(double lat_min, double lat_max, double lon_west,
                         double lon_east) {
  for (double v : {lat_min, lat_max, lon_west, lon_east})
    if (!std::isfinite(v)) throw ValidationError("box value is not finite");
  if (lat_min < -90.0 || lat_min > 90.0)
    throw ValidationError("lat_min out of range [-90, 90]");
  if (lat_max < -90.0 || lat_max > 90.0)
    throw ValidationError("lat_max out of range [-90, 90]");
  if (lon_west < -180.0 || lon_west > 180.0)
    throw ValidationError("lon_west out of range [-180, 180]");
  if (lon_east < -180.0 || lon_east > 180.0)
    throw ValidationError("lon_east out of range [-180, 180]");
  if (lat_min > lat_max) throw ValidationError("lat_min > lat_max");
  lat_min_ = lat_min;
  lat_max_ = lat_max;
  lon_west_ = NormalizeLon(lon_west);
  // East edge lives in (-180, 180] so that an edge at the antimeridian does
  // not turn a box into a wrapping one.
  lon_east_ = NormalizeLon(lon_east);
  if (lon_east_ == -180.0) lon_east_ = 180.0;
}

bool Contains(const BoundingBox &box, const Coordinate &c) {
  if (c.lat() < box.lat_min() || c.lat() > box.lat_max()) return false;
  if (box.wraps()) return c.lon() >= box.lon_west() || c.lon() < box.lon_east();
  return c.lon() >= box.lon_west() && c.lon() < box.lon_east();
}

std::string FoldLabel(std::string_view label) {
  const char *ws = " \t\r\n\f\v";
  size_t b = label.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  size_t e = label.find_last_not_of(ws);
  std::string out(label.substr(b, e - b + 1));
  for (char &ch : out)
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  return out;
}

RegionSet::RegionSet(std::vector<Region> regions,
                     std::map<std::string, std::string> aliases)
    : regions_(std::move(regions)), aliases_(std::move(aliases)) {
  std::set<std::string> seen;
  for (size_t i = 0; i < regions_.size(); ++i) {
    const Region &r = regions_[i];
    if (r.accent.empty())
      throw ValidationError("regions[" + std::to_string(i) +
                            "].accent: empty accent label");
    if (!seen.insert(r.accent).second)
      throw ValidationError("regions[" + std::to_string(i) +
                            "].accent: duplicate accent label " +
                            Quote(r.accent));
    if (r.boxes.empty())
      throw ValidationError("regions[" + std::to_string(i) + "] (accent " +
                            Quote(r.accent) + ").boxes: no boxes");
    // Names win over aliases; the first of two names folding alike wins.
    lookup_.emplace(FoldLabel(r.accent), r.accent);
  }
  for (const auto &[label, target] : aliases_) {
    if (!seen.count(target))
      throw ValidationError("aliases." + label + ": unknown accent " +
                            Quote(target));
    lookup_.emplace(FoldLabel(label), target);
  }
}

const Region *RegionSet::Find(std::string_view accent) const {
  for (const Region &r : regions_)
    if (r.accent == accent) return &r;
  return nullptr;
}

std::optional<std::string> RegionSet::Resolve(std::string_view label) const {
  std::string key = FoldLabel(label);
  if (key.empty()) return std::nullopt;
  auto it = lookup_.find(key);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Assignment Assign(const RegionSet &regions, const Coordinate &c) {
  Assignment out;
  for (const Region &r : regions.regions()) {
    for (const BoundingBox &b : r.boxes) {
      if (Contains(b, c)) {
        out.all_matches.push_back(r.accent);
        break;
      }
    }
  }
  if (!out.all_matches.empty()) out.accent = out.all_matches.front();
  return out;
}

RegionSet ParseRegions(std::string_view config_text) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::parse_error &e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("$: expected a JSON object");
  auto rit = doc.find("regions");
  if (rit == doc.end()) throw ValidationError("regions: missing field");
  if (!rit->is_array()) throw ValidationError("regions: expected an array");

  std::vector<Region> regions;
  std::set<std::string> seen;
  for (size_t i = 0; i < rit->size(); ++i) {
    const json &jr = (*rit)[i];
    std::string path = "regions[" + std::to_string(i) + "]";
    if (!jr.is_object()) throw ValidationError(path + ": expected an object");
    auto ait = jr.find("accent");
    if (ait == jr.end() || !ait->is_string())
      throw ValidationError(path + ".accent: expected a string");
    Region region;
    region.accent = ait->get<std::string>();
    if (region.accent.empty())
      throw ValidationError(path + ".accent: empty accent label");
    if (!seen.insert(region.accent).second)
      throw ValidationError(path + ".accent: duplicate accent label " +
                            Quote(region.accent));
    std::string named = path + " (accent " + Quote(region.accent) + ")";
    auto bit = jr.find("boxes");
    if (bit == jr.end() || !bit->is_array())
      throw ValidationError(named + ".boxes: expected an array");
    if (bit->empty()) throw ValidationError(named + ".boxes: no boxes");
    for (size_t j = 0; j < bit->size(); ++j) {
      const json &jb = (*bit)[j];
      std::string bpath = named + ".boxes[" + std::to_string(j) + "]";
      if (!jb.is_object()) throw ValidationError(bpath + ": expected an object");
      double lat_min = RequireNumber(jb, "lat_min", bpath);
      double lat_max = RequireNumber(jb, "lat_max", bpath);
      double lon_west = RequireNumber(jb, "lon_west", bpath);
      double lon_east = RequireNumber(jb, "lon_east", bpath);
      try {
        region.boxes.emplace_back(lat_min, lat_max, lon_west, lon_east);
      } catch (const ValidationError &e) {
        throw ValidationError(bpath + ": " + e.what());
      }
    }
    regions.push_back(std::move(region));
  }

  std::map<std::string, std::string> aliases;
  if (auto al = doc.find("aliases"); al != doc.end()) {
    if (!al->is_object()) throw ValidationError("aliases: expected an object");
    for (auto it = al->begin(); it != al->end(); ++it) {
      if (!it.value().is_string())
        throw ValidationError("aliases." + it.key() + ": expected a string");
      aliases.emplace(it.key(), it.value().get<std::string>());
    }
  }
  return RegionSet(std::move(regions), std::move(aliases));
}

std::string RegionsToJson(const RegionSet &regions) {
  nlohmann::ordered_json doc;
  doc["regions"] = nlohmann::ordered_json::array();
  for (const Region &r : regions.regions()) {
    nlohmann::ordered_json jr;
    jr["accent"] = r.accent;
    jr["boxes"] = nlohmann::ordered_json::array();
    for (const BoundingBox &b : r.boxes) {
      jr["boxes"].push_back({{"lat_min", b.lat_min()},
                             {"lat_max", b.lat_max()},
                             {"lon_west", b.lon_west()},
                             {"lon_east", b.lon_east()}});
    }
    doc["regions"].push_back(std::move(jr));
  }
  if (!regions.aliases().empty()) {
    nlohmann::ordered_json al = nlohmann::ordered_json::object();
    for (const auto &[k, v] : regions.aliases()) al[k] = v;
    doc["aliases"] = std::move(al);
  }
  return doc.dump(2);
}

}  // namespace accentkit::geo
