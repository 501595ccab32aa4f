#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "loadcast/errors.hpp"
#include "loadcast/fleet.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

// ---------------------------------------------------------------------------
// Instance types
// ---------------------------------------------------------------------------

// The available input x_av: counts of railcars per type and containers per
// length. Everything the predictors see.
struct InstanceSketch {
    std::array<int, kRailcarTypes> railcar_counts{};
    std::array<int, kContainerLengths> container_counts{};

    int total_containers() const { return container_counts[0] + container_counts[1]; }
    int total_platforms(const Fleet& fleet) const {
        int total = 0;
        for (int j = 0; j < kRailcarTypes; ++j)
            total += railcar_counts[j] * static_cast<int>(fleet.railcar_types[j].platforms.size());
        return total;
    }
    int total_slots(const Fleet& fleet) const { return 2 * total_platforms(fleet); }

    std::array<int, kInputDim> as_vector() const {
        std::array<int, kInputDim> v{};
        for (int j = 0; j < kRailcarTypes; ++j) v[j] = railcar_counts[j];
        v[10] = container_counts[0];
        v[11] = container_counts[1];
        return v;
    }
    bool operator==(const InstanceSketch&) const = default;
};

// Sketch plus the per-container gross weights (the unavailable features),
// grouped by length. weights[l][i] is the gross weight of container i of
// length l; container ids used by the solver are (l == L40 ? i : n40 + i).
struct FullInstance {
    InstanceSketch sketch;
    std::array<std::vector<double>, kContainerLengths> weights;

    int container_count() const { return sketch.total_containers(); }
};

// ---------------------------------------------------------------------------
// Data classes (Table 1) and sampling plans
// ---------------------------------------------------------------------------

enum class ClassTag : uint8_t { A = 0, B = 1, C = 2, D = 3, Custom = 255 };

struct DataClass {
    ClassTag tag = ClassTag::Custom;
    int container_lo = 0, container_hi = 0;
    int platform_lo = 0, platform_hi = 0;

    static DataClass standard(ClassTag t) {
        switch (t) {
            case ClassTag::A: return {t, 1, 150, 1, 50};
            case ClassTag::B: return {t, 151, 300, 1, 50};
            case ClassTag::C: return {t, 1, 150, 51, 100};
            case ClassTag::D: return {t, 151, 300, 51, 100};
            default: throw ConfigError("DataClass::standard: tag must be A, B, C or D");
        }
    }
    static DataClass custom(int c_lo, int c_hi, int p_lo, int p_hi) {
        if (c_lo < 0 || c_hi < c_lo || p_lo < 0 || p_hi < p_lo)
            throw ConfigError("DataClass::custom: malformed ranges");
        return {ClassTag::Custom, c_lo, c_hi, p_lo, p_hi};
    }
    bool contains(const InstanceSketch& s, const Fleet& fleet) const {
        int c = s.total_containers(), p = s.total_platforms(fleet);
        return c >= container_lo && c <= container_hi && p >= platform_lo && p <= platform_hi;
    }
    std::string label() const {
        switch (tag) {
            case ClassTag::A: return "A";
            case ClassTag::B: return "B";
            case ClassTag::C: return "C";
            case ClassTag::D: return "D";
            default:
                return "custom[" + std::to_string(container_lo) + "," + std::to_string(container_hi) +
                       "]x[" + std::to_string(platform_lo) + "," + std::to_string(platform_hi) + "]";
        }
    }
};

enum class Protocol : uint8_t { OneStage = 0, TwoStage = 1 };

struct SamplingPlan {
    Protocol protocol = Protocol::OneStage;
    int second_stage_draws = 100;
    uint64_t seed = 0;
    DataClass data_class;
};

// Container weight distribution: non-empty loads are uniform between
// load_ratio_low/high of the length's net capacity; the per-instance empty
// proportion is drawn from a per-length interval. Default intervals are
// centred on each ContainerSpec's empty_probability with half-width 0.10
// (0.15 -> [0.05, 0.25]); the values are synthetic.
struct WeightModel {
    double load_ratio_low = 0.10;
    double load_ratio_high = 0.90;
    std::array<std::pair<double, double>, kContainerLengths> empty_probability_bounds{};

    static WeightModel for_fleet(const Fleet& fleet, double half_width = 0.10) {
        WeightModel m;
        for (ContainerLength l : kLengths) {
            double p = fleet.spec(l).empty_probability;
            m.empty_probability_bounds[index_of(l)] = {std::max(0.0, p - half_width),
                                                       std::min(1.0, p + half_width)};
        }
        return m;
    }
    void validate() const {
        if (!(0 <= load_ratio_low && load_ratio_low < load_ratio_high && load_ratio_high <= 1))
            throw ConfigError("WeightModel: load ratios must satisfy 0 <= low < high <= 1");
        for (auto [lo, hi] : empty_probability_bounds)
            if (!(0 <= lo && lo <= hi && hi <= 1))
                throw ConfigError("WeightModel: empty probability bounds must lie in [0, 1]");
    }
};

// ---------------------------------------------------------------------------
// Sketch sampling
// ---------------------------------------------------------------------------

// Samples x_av uniformly: total containers and total platforms uniform over
// the admissible totals of the class, then a uniformly random composition
// achieving each total. Railcar compositions (solutions of
// sum_j n_j * platforms_j = total) are drawn exactly uniformly by a counting
// DP with backward sampling.
class SketchSampler {
public:
    SketchSampler(const Fleet& fleet, const DataClass& cls) : cls_(cls) {
        for (int j = 0; j < kRailcarTypes; ++j)
            platforms_per_type_[j] = static_cast<int>(fleet.railcar_types[j].platforms.size());

        int t_max = cls.platform_hi;
        ways_.assign(kRailcarTypes + 1, std::vector<u128>(t_max + 1, 0));
        ways_[0][0] = 1;
        for (int j = 1; j <= kRailcarTypes; ++j) {
            int p = platforms_per_type_[j - 1];
            for (int t = 0; t <= t_max; ++t) {
                u128 acc = 0;
                for (int c = 0; c * p <= t; ++c) acc += ways_[j - 1][t - c * p];
                ways_[j][t] = acc;
            }
        }
        for (int t = cls.platform_lo; t <= cls.platform_hi; ++t)
            if (ways_[kRailcarTypes][t] > 0) admissible_platform_totals_.push_back(t);
        if (admissible_platform_totals_.empty())
            throw ConfigError("sample_sketch: platform range [" + std::to_string(cls.platform_lo) + ", " +
                              std::to_string(cls.platform_hi) + "] is unattainable with this fleet");
        if (cls.container_hi < cls.container_lo)
            throw ConfigError("sample_sketch: empty container range");
    }

    InstanceSketch sample(rng::Stream& rng) const {
        InstanceSketch s;
        // containers: uniform total, then uniform split across the two lengths
        int total_containers =
            static_cast<int>(rng.uniform_int(cls_.container_lo, cls_.container_hi));
        int n40 = static_cast<int>(rng.uniform_int(0, total_containers));
        s.container_counts = {n40, total_containers - n40};

        // platforms: uniform admissible total, then uniform composition
        int t = admissible_platform_totals_[rng.next_below(admissible_platform_totals_.size())];
        for (int j = kRailcarTypes; j >= 1; --j) {
            int p = platforms_per_type_[j - 1];
            u128 r = rng.next_u128_below(ways_[j][t]);
            int c = 0;
            while (true) {
                u128 w = ways_[j - 1][t - c * p];
                if (r < w) break;
                r -= w;
                ++c;
            }
            s.railcar_counts[j - 1] = c;
            t -= c * p;
        }
        return s;
    }

    const std::vector<int>& admissible_platform_totals() const { return admissible_platform_totals_; }

private:
    using u128 = unsigned __int128;
    DataClass cls_;
    std::array<int, kRailcarTypes> platforms_per_type_{};
    std::vector<std::vector<u128>> ways_;
    std::vector<int> admissible_platform_totals_;
};

// ---------------------------------------------------------------------------
// Weight sampling
// ---------------------------------------------------------------------------

// Three steps, separately per length: draw the empty proportion and mark that
// fraction of containers (rounded, chosen uniformly) empty; draw each
// non-empty load uniformly in [low, high] * net_capacity; gross = tare + load
// (empty boxes weigh their tare).
inline FullInstance sample_weights(const InstanceSketch& sketch, const WeightModel& model,
                                   const Fleet& fleet, rng::Stream& rng) {
    model.validate();
    FullInstance inst;
    inst.sketch = sketch;
    for (ContainerLength l : kLengths) {
        int li = index_of(l);
        int n = sketch.container_counts[li];
        const auto& spec = fleet.spec(l);
        auto [plo, phi] = model.empty_probability_bounds[li];
        double p_empty = rng.uniform_real(plo, phi);
        int n_empty = std::clamp(static_cast<int>(std::llround(p_empty * n)), 0, n);

        std::vector<char> empty(n, 0);
        // partial Fisher-Yates: uniformly choose n_empty indices
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < n_empty; ++i) {
            size_t j = i + rng.next_below(static_cast<uint64_t>(n - i));
            std::swap(idx[i], idx[j]);
            empty[idx[i]] = 1;
        }

        auto& w = inst.weights[li];
        w.resize(n);
        for (int i = 0; i < n; ++i) {
            if (empty[i]) {
                w[i] = spec.tare_kg;
            } else {
                double load = rng.uniform_real(model.load_ratio_low * spec.net_capacity_kg,
                                               model.load_ratio_high * spec.net_capacity_kg);
                w[i] = spec.tare_kg + load;
            }
        }
    }
    return inst;
}

// ---------------------------------------------------------------------------
// Index-addressable generation (1S and 2S)
// ---------------------------------------------------------------------------

struct Cohort {
    InstanceSketch sketch;
    std::vector<FullInstance> members;  // identical sketch, independent weights
};

// Pure function of (fleet, class, seed, index): instance i / cohort c can be
// produced by any worker in any order with identical results.
class InstanceGenerator {
public:
    InstanceGenerator(const Fleet& fleet, const DataClass& cls, uint64_t seed)
        : fleet_(&fleet),
          sampler_(fleet, cls),
          model_(WeightModel::for_fleet(fleet)),
          base_(rng::Stream(seed)) {}

    InstanceGenerator(const Fleet& fleet, const DataClass& cls, uint64_t seed, WeightModel model)
        : fleet_(&fleet), sampler_(fleet, cls), model_(model), base_(rng::Stream(seed)) {}

    InstanceSketch sketch_at(uint64_t index) const {
        auto rng = base_.derive(index, 0);
        return sampler_.sample(rng);
    }
    // 1S record i
    FullInstance instance_at(uint64_t index) const {
        auto rng = base_.derive(index, 1);
        return sample_weights(sketch_at(index), model_, *fleet_, rng);
    }
    // 2S cohort c, member m: shared sketch, per-member weight stream
    FullInstance member_at(uint64_t cohort, uint64_t member) const {
        auto rng = base_.derive(cohort, 1 + member);
        return sample_weights(sketch_at(cohort), model_, *fleet_, rng);
    }
    Cohort cohort_at(uint64_t cohort, int k) const {
        Cohort c;
        c.sketch = sketch_at(cohort);
        c.members.reserve(static_cast<size_t>(k));
        for (int m = 0; m < k; ++m) c.members.push_back(member_at(cohort, static_cast<uint64_t>(m)));
        return c;
    }

    const WeightModel& weight_model() const { return model_; }

private:
    const Fleet* fleet_;
    SketchSampler sampler_;
    WeightModel model_;
    rng::Stream base_;
};

inline std::vector<FullInstance> generate_1S(int n, const DataClass& cls, const Fleet& fleet,
                                             uint64_t seed) {
    InstanceGenerator gen(fleet, cls, seed);
    std::vector<FullInstance> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(gen.instance_at(static_cast<uint64_t>(i)));
    return out;
}

inline std::vector<Cohort> generate_2S(int n_first, int k, const DataClass& cls, const Fleet& fleet,
                                       uint64_t seed) {
    if (k < 1) throw InvalidInputError("generate_2S: second-stage draw count must be >= 1");
    InstanceGenerator gen(fleet, cls, seed);
    std::vector<Cohort> out;
    out.reserve(static_cast<size_t>(n_first));
    for (int c = 0; c < n_first; ++c) out.push_back(gen.cohort_at(static_cast<uint64_t>(c), k));
    return out;
}

// ---------------------------------------------------------------------------
// Railcar input aggregation (median capacities/tares conditional on type)
// ---------------------------------------------------------------------------

struct RailcarObservation {
    double capacity_kg = 0;
    double tare_kg = 0;
};

namespace sampling_detail {
inline double lower_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
}
}  // namespace sampling_detail

// Replaces every platform's capacity and tare in `base` with the per-type
// lower median of the raw observations. Geometry and slot capability come
// from the template fleet.
inline Fleet aggregate_railcar_inputs(const Fleet& base,
                                      const std::map<int, std::vector<RailcarObservation>>& raw) {
    Fleet out = base;
    for (auto& t : out.railcar_types) {
        auto it = raw.find(t.id);
        if (it == raw.end() || it->second.empty())
            throw ConfigError("aggregate_railcar_inputs: no observations for railcar type " +
                              std::to_string(t.id));
        std::vector<double> caps, tares;
        caps.reserve(it->second.size());
        tares.reserve(it->second.size());
        for (const auto& obs : it->second) {
            caps.push_back(obs.capacity_kg);
            tares.push_back(obs.tare_kg);
        }
        double cap = sampling_detail::lower_median(std::move(caps));
        double tare = sampling_detail::lower_median(std::move(tares));
        for (auto& p : t.platforms) {
            p.capacity_kg = cap;
            p.tare_kg = tare;
        }
    }
    return out;
}

}  // namespace loadcast
