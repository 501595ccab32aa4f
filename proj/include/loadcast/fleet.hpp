#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "loadcast/errors.hpp"

namespace loadcast {

// ---------------------------------------------------------------------------
// Domain constants and types
// ---------------------------------------------------------------------------

inline constexpr int kRailcarTypes = 10;
inline constexpr int kContainerLengths = 2;
inline constexpr int kInputDim = 12;  // 10 railcar-type counts + 2 container-length counts

enum class ContainerLength : uint8_t { L40 = 0, L53 = 1 };

inline constexpr int feet(ContainerLength l) { return l == ContainerLength::L40 ? 40 : 53; }
inline constexpr int index_of(ContainerLength l) { return static_cast<int>(l); }
inline constexpr std::array<ContainerLength, 2> kLengths{ContainerLength::L40, ContainerLength::L53};

inline const char* name_of(ContainerLength l) { return l == ContainerLength::L40 ? "L40" : "L53"; }

// Representative per-length container constants (median tare / net capacity
// conditional on length) plus the probability that a container travels empty.
struct ContainerSpec {
    ContainerLength length{ContainerLength::L40};
    double tare_kg = 0;
    double net_capacity_kg = 0;
    double empty_probability = 0;

    double max_gross_kg() const { return tare_kg + net_capacity_kg; }
};

struct Container {
    int32_t id = 0;
    ContainerLength length{ContainerLength::L40};
    std::optional<double> gross_weight_kg;  // unknown at prediction time
};

// One railcar platform: a bottom and a top slot plus the weight rules that
// govern what may be stacked on it.
struct PlatformType {
    int length_ft = 40;            // 40 or 53
    double capacity_kg = 0;        // combined gross weight limit (bottom + top)
    double tare_kg = 0;            // platform own weight
    bool top_53_capable = false;   // whether the top slot accepts 53 ft boxes
    double com_threshold_m = 0;    // centre-of-mass height limit
    double h_bottom_m = 0;         // bottom slot centroid height
    double h_top_m = 0;            // top slot centroid height
    double h_tare_m = 0;           // platform tare centroid height

    bool operator==(const PlatformType&) const = default;
};

struct LoadingPattern {
    std::optional<ContainerLength> bottom;
    std::optional<ContainerLength> top;

    bool empty() const { return !bottom && !top; }
    int slots() const { return (bottom ? 1 : 0) + (top ? 1 : 0); }
    int container_feet() const {
        return (bottom ? feet(*bottom) : 0) + (top ? feet(*top) : 0);
    }
    bool operator==(const LoadingPattern&) const = default;
};

struct RailcarType {
    int id = 0;  // 1..10, dense
    std::vector<PlatformType> platforms;

    int slot_count() const { return 2 * static_cast<int>(platforms.size()); }
    int total_length_ft() const {
        int total = 0;
        for (const auto& p : platforms) total += p.length_ft;
        return total;
    }
};

struct Fleet {
    std::vector<RailcarType> railcar_types;             // exactly 10, ids 1..10
    std::array<ContainerSpec, 2> container_specs{};     // indexed by ContainerLength

    const ContainerSpec& spec(ContainerLength l) const { return container_specs[index_of(l)]; }
    const RailcarType& type(int id) const { return railcar_types.at(static_cast<size_t>(id - 1)); }
};

// ---------------------------------------------------------------------------
// Pattern enumeration and weight feasibility
// ---------------------------------------------------------------------------

// All feasible (bottom, top) length combinations for one platform:
//   (a) the bottom container must not exceed the platform length,
//   (b) a 53 ft box needs a 53-capable slot (bottom of a 53 ft platform;
//       top slots per top_53_capable; on a 40 ft platform a 53 ft top rides
//       over a 40 ft bottom),
//   (c) an occupied top requires an occupied bottom.
// Order is canonical: the empty pattern first, then sorted by (bottom, top)
// with absent-top before L40 before L53. Pattern indices elsewhere in the
// library refer to positions in this vector.
inline std::vector<LoadingPattern> enumerate_patterns(const PlatformType& platform) {
    std::vector<LoadingPattern> out;
    out.push_back({});  // empty
    for (ContainerLength bottom : kLengths) {
        if (feet(bottom) > platform.length_ft) continue;
        out.push_back({bottom, std::nullopt});
        for (ContainerLength top : kLengths) {
            if (top == ContainerLength::L53) {
                if (!platform.top_53_capable) continue;
                if (platform.length_ft == 40 && bottom != ContainerLength::L40) continue;
            }
            out.push_back({bottom, top});
        }
    }
    std::sort(out.begin() + 1, out.end(), [](const LoadingPattern& a, const LoadingPattern& b) {
        auto key = [](const LoadingPattern& p) {
            int bottom = p.bottom ? index_of(*p.bottom) : -1;
            int top = p.top ? 1 + index_of(*p.top) : 0;
            return std::pair{bottom, top};
        };
        return key(a) < key(b);
    });
    return out;
}

// Weight feasibility for one platform under a given pattern. Weights must be
// supplied for exactly the occupied slots (zero otherwise). The centre of
// mass is the weighted centroid of the platform tare and loaded boxes:
//   (tare*h_tare + b*h_bottom + t*h_top) / (tare + b + t) <= com_threshold
// An unloaded platform is always feasible.
inline bool pattern_weight_feasible(const LoadingPattern& pattern, double bottom_weight_kg,
                                    double top_weight_kg, const PlatformType& platform) {
    if (bottom_weight_kg < 0 || top_weight_kg < 0)
        throw InvalidInputError("pattern_weight_feasible: negative container weight");
    if (!pattern.bottom && bottom_weight_kg != 0)
        throw InvalidInputError("pattern_weight_feasible: weight supplied for unoccupied bottom slot");
    if (!pattern.top && top_weight_kg != 0)
        throw InvalidInputError("pattern_weight_feasible: weight supplied for unoccupied top slot");
    double load = bottom_weight_kg + top_weight_kg;
    if (load == 0) return true;
    if (load > platform.capacity_kg) return false;
    double com = (platform.tare_kg * platform.h_tare_m + bottom_weight_kg * platform.h_bottom_m +
                  top_weight_kg * platform.h_top_m) /
                 (platform.tare_kg + load);
    return com <= platform.com_threshold_m;
}

// Heaviest top weight that can ever satisfy the COM constraint on this
// platform, assuming the most favourable bottom ballast <= max_bottom_kg.
// Used by the solver for pruning; exact when h_bottom >= threshold (then the
// best ballast is irrelevant or harmful and the cap is closed-form).
inline double com_top_weight_cap(const PlatformType& p, double max_bottom_kg) {
    double up = p.h_top_m - p.com_threshold_m;
    if (up <= 0) return p.capacity_kg;  // top height under the threshold: COM never binds from above
    double ballast = p.h_bottom_m <= p.com_threshold_m ? max_bottom_kg : 0.0;
    double cap = (p.tare_kg * (p.com_threshold_m - p.h_tare_m) +
                  ballast * (p.com_threshold_m - p.h_bottom_m)) /
                 up;
    return std::max(cap, 0.0);
}

// s_j = number of slots on railcar type j (two per platform)
inline std::array<int, kRailcarTypes> slots_of(const Fleet& fleet) {
    std::array<int, kRailcarTypes> out{};
    for (int j = 0; j < kRailcarTypes; ++j) out[j] = fleet.railcar_types[j].slot_count();
    return out;
}

// Eq. (1) weights: s_j for the railcar coordinates, 1 for the two container
// coordinates.
inline std::array<int, kInputDim> metric_weights(const Fleet& fleet) {
    std::array<int, kInputDim> w{};
    auto slots = slots_of(fleet);
    for (int j = 0; j < kRailcarTypes; ++j) w[j] = slots[j];
    w[10] = w[11] = 1;
    return w;
}

// ---------------------------------------------------------------------------
// JSON config
// ---------------------------------------------------------------------------

namespace fleet_detail {

inline double require_number(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError("fleet config: " + where + ": missing or non-numeric field '" + key + "'");
    return j[key].get<double>();
}

inline bool require_bool(const nlohmann::json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_boolean())
        throw ConfigError("fleet config: " + where + ": missing or non-boolean field '" + key + "'");
    return j[key].get<bool>();
}

}  // namespace fleet_detail

inline Fleet fleet_from_json(const nlohmann::json& j) {
    using fleet_detail::require_bool;
    using fleet_detail::require_number;

    if (!j.is_object()) throw ConfigError("fleet config: top level must be a JSON object");
    if (!j.contains("railcar_types") || !j["railcar_types"].is_array())
        throw ConfigError("fleet config: missing 'railcar_types' array");
    if (!j.contains("container_specs") || !j["container_specs"].is_object())
        throw ConfigError("fleet config: missing 'container_specs' object");

    Fleet fleet;
    const auto& types = j["railcar_types"];
    if (types.size() != kRailcarTypes)
        throw ConfigError("fleet config: expected exactly 10 railcar types, got " +
                          std::to_string(types.size()));

    std::array<bool, kRailcarTypes> seen{};
    std::vector<RailcarType> parsed;
    for (const auto& tj : types) {
        RailcarType t;
        std::string where = "railcar type";
        if (!tj.contains("id") || !tj["id"].is_number_integer())
            throw ConfigError("fleet config: railcar type without integer 'id'");
        t.id = tj["id"].get<int>();
        where += " " + std::to_string(t.id);
        if (t.id < 1 || t.id > kRailcarTypes)
            throw ConfigError("fleet config: " + where + ": id must be in 1..10");
        if (seen[t.id - 1]) throw ConfigError("fleet config: duplicate railcar type id " + std::to_string(t.id));
        seen[t.id - 1] = true;

        if (!tj.contains("platforms") || !tj["platforms"].is_array())
            throw ConfigError("fleet config: " + where + ": missing 'platforms' array");
        const auto& pl = tj["platforms"];
        if (pl.empty() || pl.size() > 5)
            throw ConfigError("fleet config: " + where + ": platform count must be 1..5, got " +
                              std::to_string(pl.size()));
        int pidx = 0;
        for (const auto& pj : pl) {
            PlatformType p;
            std::string pw = where + " platform " + std::to_string(pidx++);
            p.length_ft = static_cast<int>(require_number(pj, "length_ft", pw));
            if (p.length_ft != 40 && p.length_ft != 53)
                throw ConfigError("fleet config: " + pw + ": length_ft must be 40 or 53");
            p.capacity_kg = require_number(pj, "capacity_kg", pw);
            if (p.capacity_kg <= 0) throw ConfigError("fleet config: " + pw + ": capacity_kg must be > 0");
            p.tare_kg = require_number(pj, "tare_kg", pw);
            if (p.tare_kg <= 0) throw ConfigError("fleet config: " + pw + ": tare_kg must be > 0");
            p.top_53_capable = require_bool(pj, "top_53_capable", pw);
            p.com_threshold_m = require_number(pj, "com_threshold_m", pw);
            p.h_bottom_m = require_number(pj, "h_bottom_m", pw);
            p.h_top_m = require_number(pj, "h_top_m", pw);
            p.h_tare_m = require_number(pj, "h_tare_m", pw);
            if (p.h_top_m <= p.h_bottom_m)
                throw ConfigError("fleet config: " + pw + ": h_top_m must exceed h_bottom_m");
            t.platforms.push_back(p);
        }
        parsed.push_back(std::move(t));
    }
    std::sort(parsed.begin(), parsed.end(), [](const RailcarType& a, const RailcarType& b) { return a.id < b.id; });
    fleet.railcar_types = std::move(parsed);

    const auto& specs = j["container_specs"];
    for (ContainerLength l : kLengths) {
        const char* key = name_of(l);
        if (!specs.contains(key))
            throw ConfigError(std::string("fleet config: container_specs missing '") + key + "'");
        const auto& sj = specs[key];
        ContainerSpec s;
        s.length = l;
        s.tare_kg = require_number(sj, "tare_kg", std::string("container_specs.") + key);
        s.net_capacity_kg = require_number(sj, "net_capacity_kg", std::string("container_specs.") + key);
        s.empty_probability = require_number(sj, "empty_probability", std::string("container_specs.") + key);
        if (s.tare_kg <= 0)
            throw ConfigError(std::string("fleet config: container_specs.") + key + ": tare_kg must be > 0");
        if (s.net_capacity_kg <= 0)
            throw ConfigError(std::string("fleet config: container_specs.") + key +
                              ": net_capacity_kg must be > 0");
        if (s.empty_probability < 0 || s.empty_probability > 1)
            throw ConfigError(std::string("fleet config: container_specs.") + key +
                              ": empty_probability must be in [0, 1]");
        fleet.container_specs[index_of(l)] = s;
    }
    return fleet;
}

inline nlohmann::json fleet_to_json(const Fleet& fleet) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["railcar_types"] = nlohmann::json::array();
    for (const auto& t : fleet.railcar_types) {
        nlohmann::json tj;
        tj["id"] = t.id;
        tj["platforms"] = nlohmann::json::array();
        for (const auto& p : t.platforms) {
            tj["platforms"].push_back({{"length_ft", p.length_ft},
                                       {"capacity_kg", p.capacity_kg},
                                       {"tare_kg", p.tare_kg},
                                       {"top_53_capable", p.top_53_capable},
                                       {"com_threshold_m", p.com_threshold_m},
                                       {"h_bottom_m", p.h_bottom_m},
                                       {"h_top_m", p.h_top_m},
                                       {"h_tare_m", p.h_tare_m}});
        }
        j["railcar_types"].push_back(tj);
    }
    for (ContainerLength l : kLengths) {
        const auto& s = fleet.spec(l);
        j["container_specs"][name_of(l)] = {{"tare_kg", s.tare_kg},
                                            {"net_capacity_kg", s.net_capacity_kg},
                                            {"empty_probability", s.empty_probability}};
    }
    return j;
}

inline Fleet load_fleet_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open fleet config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("fleet config '" + path + "': invalid JSON: " + e.what());
    }
    return fleet_from_json(j);
}

// FNV-1a over the canonical (sorted-key) JSON dump; used to stamp datasets
// and checkpoints with the fleet they were produced from.
inline uint64_t fnv1a64(const void* data, size_t size, uint64_t h = 0xCBF29CE484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline uint64_t fleet_hash(const Fleet& fleet) {
    std::string dump = fleet_to_json(fleet).dump();
    return fnv1a64(dump.data(), dump.size());
}

// ---------------------------------------------------------------------------
// Shipped default fleet (synthetic)
// ---------------------------------------------------------------------------

// The paper does not publish railcar characteristics, so these ten types are
// synthetic: plausible platform counts/lengths with per-type variation in
// capacity, tare and 53-capability. The COM geometry deliberately sets
// h_bottom_m == com_threshold_m, which turns the COM rule into a per-platform
// top-weight cap: a max-gross box can never ride on top (so top slots do go
// unused under weight pressure), yet feasibility stays monotone in both
// weights.
inline constexpr const char* kDefaultFleetJson = R"json({
  "schema_version": 1,
  "comment": "synthetic default fleet; values are not measurements of any real railcar census",
  "railcar_types": [
    {"id": 1, "platforms": [
      {"length_ft": 40, "capacity_kg": 48000.0, "tare_kg": 10500.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]},
    {"id": 2, "platforms": [
      {"length_ft": 53, "capacity_kg": 50000.0, "tare_kg": 12000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]},
    {"id": 3, "platforms": [
      {"length_ft": 40, "capacity_kg": 48500.0, "tare_kg": 11000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 48500.0, "tare_kg": 11000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]},
    {"id": 4, "platforms": [
      {"length_ft": 40, "capacity_kg": 47500.0, "tare_kg": 10500.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 47500.0, "tare_kg": 10500.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 47500.0, "tare_kg": 10500.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]},
    {"id": 5, "platforms": [
      {"length_ft": 53, "capacity_kg": 50500.0, "tare_kg": 12500.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 50500.0, "tare_kg": 12500.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 50500.0, "tare_kg": 12500.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]},
    {"id": 6, "platforms": [
      {"length_ft": 53, "capacity_kg": 50000.0, "tare_kg": 12000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 48000.0, "tare_kg": 11000.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 50000.0, "tare_kg": 12000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]},
    {"id": 7, "platforms": [
      {"length_ft": 40, "capacity_kg": 49000.0, "tare_kg": 11500.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 49000.0, "tare_kg": 11500.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 49000.0, "tare_kg": 11500.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 49000.0, "tare_kg": 11500.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]},
    {"id": 8, "platforms": [
      {"length_ft": 53, "capacity_kg": 51000.0, "tare_kg": 12500.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 51000.0, "tare_kg": 12500.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 51000.0, "tare_kg": 12500.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 51000.0, "tare_kg": 12500.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]},
    {"id": 9, "platforms": [
      {"length_ft": 40, "capacity_kg": 48000.0, "tare_kg": 11000.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 48000.0, "tare_kg": 11000.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 48000.0, "tare_kg": 11000.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 48000.0, "tare_kg": 11000.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 40, "capacity_kg": 48000.0, "tare_kg": 11000.0, "top_53_capable": false,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]},
    {"id": 10, "platforms": [
      {"length_ft": 53, "capacity_kg": 52000.0, "tare_kg": 13000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 52000.0, "tare_kg": 13000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 52000.0, "tare_kg": 13000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 52000.0, "tare_kg": 13000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5},
      {"length_ft": 53, "capacity_kg": 52000.0, "tare_kg": 13000.0, "top_53_capable": true,
       "com_threshold_m": 3.1, "h_bottom_m": 3.1, "h_top_m": 4.9, "h_tare_m": 0.5}]}
  ],
  "container_specs": {
    "L40": {"tare_kg": 3700.0, "net_capacity_kg": 26800.0, "empty_probability": 0.15},
    "L53": {"tare_kg": 4900.0, "net_capacity_kg": 25500.0, "empty_probability": 0.15}
  }
})json";

inline const Fleet& default_fleet() {
    static const Fleet fleet = fleet_from_json(nlohmann::json::parse(kDefaultFleetJson));
    return fleet;
}

}  // namespace loadcast
