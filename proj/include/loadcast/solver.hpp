#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <unordered_map>
#include <vector>

#include "loadcast/errors.hpp"
#include "loadcast/fleet.hpp"
#include "loadcast/sampling.hpp"

namespace loadcast {

// ---------------------------------------------------------------------------
// Solution types
// ---------------------------------------------------------------------------

// Priorities: maximize containers loaded, then minimize total length of used
// railcars, then maximize total length of loaded containers.
struct LexObjective {
    int loaded_containers = 0;
    int used_railcar_length_ft = 0;
    int loaded_container_length_ft = 0;

    bool operator==(const LexObjective&) const = default;
};

inline bool lex_better(const LexObjective& a, const LexObjective& b) {
    if (a.loaded_containers != b.loaded_containers) return a.loaded_containers > b.loaded_containers;
    if (a.used_railcar_length_ft != b.used_railcar_length_ft)
        return a.used_railcar_length_ft < b.used_railcar_length_ft;
    return a.loaded_container_length_ft > b.loaded_container_length_ft;
}

// M strictly dominating both lower-priority spans; asserted in solve_lpp.
inline int64_t scalarization_constant(const InstanceSketch& sketch, const Fleet& fleet) {
    int64_t max_used_len = 0;
    for (int j = 0; j < kRailcarTypes; ++j)
        max_used_len += int64_t(sketch.railcar_counts[j]) * fleet.railcar_types[j].total_length_ft();
    int64_t max_feet = 53LL * sketch.total_containers();
    return max_used_len + max_feet + 1;
}

// M^2 * loaded - M * used_length + loaded_feet; orders identically to
// lex_better whenever M exceeds both spans.
inline int64_t lex_scalarize(const LexObjective& o, int64_t m) {
    return m * m * o.loaded_containers - m * o.used_railcar_length_ft + o.loaded_container_length_ft;
}

// Container ids are global: 40 ft boxes take 0..n40-1 (their index in
// weights[L40]), 53 ft boxes take n40..n40+n53-1.
struct PlatformLoad {
    int pattern_index = 0;          // into enumerate_patterns(platform)
    int32_t bottom_container = -1;  // global container id, -1 if slot empty
    int32_t top_container = -1;
};

struct RailcarLoad {
    std::vector<PlatformLoad> platforms;
};

struct DetailedSolution {
    std::array<std::vector<RailcarLoad>, kRailcarTypes> railcars;
    LexObjective objective;
    std::array<int, kContainerLengths> loaded_per_length{};
    std::array<int, kRailcarTypes> used_railcars{};
    bool proven_optimal = true;  // false when a node limit stopped the search
};

struct SolverConfig {
    double gap = 0.0;  // 0 = exact; otherwise accept within this relative scalarized gap
    std::optional<uint64_t> node_limit;
};

struct SolveInfo {
    uint64_t nodes = 0;
    bool optimal = true;
};

// ---------------------------------------------------------------------------
// Search internals
// ---------------------------------------------------------------------------

namespace solver_detail {

struct PatternInfo {
    LoadingPattern pattern;
    int slots = 0;
    int container_feet = 0;
    int bottom = -1;  // -1 none, else index_of(length)
    int top = -1;
};

struct PatternSet {
    std::vector<PatternInfo> infos;
    std::vector<int> visit_order;  // fullest-first for fast incumbents
};

struct PlatRef {
    int type_idx = 0;
    int car_idx = 0;
    int plat_idx = 0;
    const PlatformType* pt = nullptr;
    const PatternSet* patterns = nullptr;
    int car_global = 0;
    int car_length_ft = 0;
    int car_remaining_platforms = 0;  // this platform included
    // true per-slot upper weight caps, clipped by the platform capacity;
    // -1 marks a length the slot can never hold
    double top_cap[2] = {-1, -1};
    double bottom_cap[2] = {-1, -1};
};

// Per-length weight pool sorted heaviest-first (ties by lower original id),
// matching the canonical "heavier container first" rule.
struct Pool {
    std::vector<double> weight;  // descending
    std::vector<int32_t> id;     // global container ids
    std::vector<char> taken;

    int size() const { return static_cast<int>(weight.size()); }
};

// Sorted-caps dominance check: the k lightest remaining containers must fit
// the k tightest slot caps, for every k. Exact feasibility when weight rules
// decompose into per-slot caps, a sound necessary condition otherwise.
inline bool hall_ok(const std::vector<double>& caps_ascending, const Pool& pool) {
    size_t need = caps_ascending.size();
    size_t avail = 0;
    for (const auto t : pool.taken)
        if (!t) ++avail;
    if (need > avail) return false;
    size_t ci = 0;
    for (int i = pool.size() - 1; i >= 0 && ci < need; --i) {  // ascending weight
        if (pool.taken[i]) continue;
        if (pool.weight[i] > caps_ascending[ci]) return false;
        ++ci;
    }
    return ci == need;
}

inline void sorted_insert(std::vector<double>& v, double x) {
    v.insert(std::upper_bound(v.begin(), v.end(), x), x);
}
inline void sorted_erase(std::vector<double>& v, double x) {
    v.erase(std::lower_bound(v.begin(), v.end(), x));
}

class Search {
public:
    Search(const FullInstance& inst, const Fleet& fleet, const SolverConfig& cfg)
        : inst_(inst), fleet_(fleet), cfg_(cfg) {
        n40_ = inst.sketch.container_counts[0];
        n53_ = inst.sketch.container_counts[1];
        build_pools();
        build_platforms();
        build_suffix_stats();
        m_ = scalarization_constant(inst.sketch, fleet);
        int64_t len_span = 0;
        for (int j = 0; j < kRailcarTypes; ++j)
            len_span += int64_t(inst.sketch.railcar_counts[j]) * fleet.railcar_types[j].total_length_ft();
        int64_t feet_span = 53LL * inst.sketch.total_containers();
        if (!(m_ > len_span && m_ > feet_span))
            throw InvalidInputError("solver: scalarization constant does not dominate objective spans");
    }

    DetailedSolution run(SolveInfo* info) {
        // phase 1: optimize. The all-empty solution is always feasible.
        best_vector_.assign(plats_.size(), 0);
        best_obj_ = LexObjective{0, 0, 0};
        best_scal_ = 0;
        cur_vector_.assign(plats_.size(), 0);
        dfs_optimize(0);

        // phase 2: rebuild the canonical representative of the optimum by
        // descending in pattern-index order, pinned to the proven value.
        // Skipped in gap mode (the incumbent is returned as found) and after
        // an abort (the incumbent may not be reproducible as an exact target).
        if (cfg_.gap == 0 && !aborted_) {
            target_scal_ = best_scal_;
            if (!dfs_canonical(0))
                throw InvalidInputError("solver: internal error, optimum not reproducible");
        }
        DetailedSolution sol = extract(best_vector_);
        sol.objective = best_obj_;
        sol.proven_optimal = !aborted_;
        if (info) {
            info->nodes = nodes_;
            info->optimal = !aborted_;
        }
        return sol;
    }

private:
    const FullInstance& inst_;
    const Fleet& fleet_;
    SolverConfig cfg_;
    int n40_ = 0, n53_ = 0;
    int64_t m_ = 0;

    Pool pools_[2];
    std::vector<PatternSet> pattern_sets_;
    std::vector<PlatRef> plats_;

    // flattened railcars in canonical order
    std::vector<int> car_len_, car_slots_;
    // exact min total length of railcars >= g covering at least k slots
    std::vector<std::vector<int32_t>> min_len_for_slots_;
    std::vector<int> suffix_car_slots_;
    static constexpr int32_t kInfLen = std::numeric_limits<int32_t>::max() / 4;

    // suffix statistics over the flat platform order
    std::vector<int> suffix_plats_, suffix_b53_, suffix_t53_;
    int toppable_[2] = {0, 0};
    bool decomposable_ = true;  // per-slot caps fully capture weight feasibility

    // distinct top-cap values per length (cap buckets) for the memo key
    std::vector<double> bucket_caps_[2];
    std::vector<int> pool_fit_[2];  // containers of length l not above bucket cap b

    // search state
    std::vector<uint8_t> cur_vector_, best_vector_;
    LexObjective best_obj_;
    int64_t best_scal_ = 0;
    int64_t target_scal_ = 0;
    int cur_count_ = 0, cur_len_ = 0, cur_feet_ = 0;
    int demand_[2] = {0, 0};
    int top_demand_[2] = {0, 0};
    std::vector<double> prefix_caps_[2];  // ascending caps of demanded slots
    std::array<std::vector<int>, 2> bucket_top_demand_;
    std::vector<char> car_used_;
    std::vector<char> applied_newly_used_;
    uint64_t nodes_ = 0;
    bool aborted_ = false;

    // Transposition memo at railcar boundaries: in decomposable
    // configurations the achievable completion from a boundary depends only
    // on (position, demanded counts per length, demanded tops per cap
    // bucket); equal-objective plateaus collapse onto the same key.
    struct MemoKey {
        std::array<uint16_t, 16> v{};
        bool operator==(const MemoKey&) const = default;
    };
    struct MemoKeyHash {
        size_t operator()(const MemoKey& k) const {
            return static_cast<size_t>(fnv1a64(k.v.data(), sizeof(k.v)));
        }
    };
    std::unordered_map<MemoKey, int64_t, MemoKeyHash> memo_;

    MemoKey memo_key(int pos) const {
        MemoKey k;
        size_t i = 0;
        k.v[i++] = static_cast<uint16_t>(pos);
        k.v[i++] = static_cast<uint16_t>(demand_[0]);
        k.v[i++] = static_cast<uint16_t>(demand_[1]);
        for (int li = 0; li < 2; ++li)
            for (int b : bucket_top_demand_[li]) k.v[i++] = static_cast<uint16_t>(b);
        return k;
    }

    void build_pools() {
        for (int li = 0; li < 2; ++li) {
            double tare = fleet_.container_specs[li].tare_kg;
            auto& pool = pools_[li];
            int n = static_cast<int>(inst_.weights[li].size());
            std::vector<int> order(n);
            for (int i = 0; i < n; ++i) {
                if (!(inst_.weights[li][i] >= tare - 1e-9))
                    throw InvalidInputError("solver: container gross weight below tare");
                order[i] = i;
            }
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                double wa = inst_.weights[li][a], wb = inst_.weights[li][b];
                if (wa != wb) return wa > wb;
                return a < b;
            });
            pool.weight.reserve(n);
            pool.id.reserve(n);
            for (int i : order) {
                pool.weight.push_back(inst_.weights[li][i]);
                pool.id.push_back(li == 0 ? i : n40_ + i);
            }
            pool.taken.assign(n, 0);
        }
    }

    void build_platforms() {
        double poolmax[2] = {pools_[0].size() ? pools_[0].weight[0] : 0.0,
                             pools_[1].size() ? pools_[1].weight[0] : 0.0};
        std::vector<PlatformType> seen;
        auto pattern_set_for = [&](const PlatformType& pt) -> const PatternSet* {
            for (size_t i = 0; i < seen.size(); ++i)
                if (seen[i] == pt) return &pattern_sets_[i];
            seen.push_back(pt);
            PatternSet set;
            for (const auto& p : enumerate_patterns(pt)) {
                PatternInfo pi;
                pi.pattern = p;
                pi.slots = p.slots();
                pi.container_feet = p.container_feet();
                pi.bottom = p.bottom ? index_of(*p.bottom) : -1;
                pi.top = p.top ? index_of(*p.top) : -1;
                set.infos.push_back(pi);
            }
            set.visit_order.resize(set.infos.size());
            for (size_t i = 0; i < set.infos.size(); ++i) set.visit_order[i] = static_cast<int>(i);
            std::sort(set.visit_order.begin(), set.visit_order.end(), [&](int a, int b) {
                if (set.infos[a].slots != set.infos[b].slots) return set.infos[a].slots > set.infos[b].slots;
                if (set.infos[a].container_feet != set.infos[b].container_feet)
                    return set.infos[a].container_feet > set.infos[b].container_feet;
                return a < b;
            });
            pattern_sets_.push_back(std::move(set));
            return &pattern_sets_.back();
        };

        // pattern_sets_ must not reallocate under the pointers handed out;
        // there are at most 5 platforms per type
        pattern_sets_.reserve(size_t(kRailcarTypes) * 5);

        int car_global = 0;
        for (int t = 0; t < kRailcarTypes; ++t) {
            const auto& rt = fleet_.railcar_types[t];
            for (int c = 0; c < inst_.sketch.railcar_counts[t]; ++c) {
                car_len_.push_back(rt.total_length_ft());
                car_slots_.push_back(rt.slot_count());
                int np = static_cast<int>(rt.platforms.size());
                for (int pi = 0; pi < np; ++pi) {
                    const auto& pt = rt.platforms[pi];
                    PlatRef ref;
                    ref.type_idx = t;
                    ref.car_idx = c;
                    ref.plat_idx = pi;
                    ref.pt = &pt;
                    ref.patterns = pattern_set_for(pt);
                    ref.car_global = car_global;
                    ref.car_length_ft = rt.total_length_ft();
                    ref.car_remaining_platforms = np - pi;

                    double com_cap = com_top_weight_cap(pt, std::max(poolmax[0], poolmax[1]));
                    double top_cap = std::min(com_cap, pt.capacity_kg);
                    ref.top_cap[0] = top_cap;
                    ref.top_cap[1] = pt.top_53_capable ? top_cap : -1.0;
                    for (int li = 0; li < 2; ++li) {
                        if (feet(kLengths[li]) > pt.length_ft) continue;
                        double bcap = pt.capacity_kg;
                        if (pt.h_bottom_m > pt.com_threshold_m) {
                            double lim = pt.tare_kg * (pt.com_threshold_m - pt.h_tare_m) /
                                         (pt.h_bottom_m - pt.com_threshold_m);
                            bcap = std::min(bcap, std::max(lim, 0.0));
                        }
                        ref.bottom_cap[li] = bcap;
                    }

                    bool com_separable = pt.h_bottom_m == pt.com_threshold_m &&
                                         pt.com_threshold_m >= pt.h_tare_m;
                    bool sum_loose = true;
                    for (int li = 0; li < 2; ++li) {
                        if (feet(kLengths[li]) > pt.length_ft) continue;
                        double worst_top = std::max(std::min(top_cap, std::max(poolmax[0], poolmax[1])), 0.0);
                        if (poolmax[li] + worst_top > pt.capacity_kg) sum_loose = false;
                    }
                    if (!com_separable || !sum_loose) decomposable_ = false;

                    plats_.push_back(ref);
                }
                ++car_global;
            }
        }
        car_used_.assign(car_len_.size(), 0);

        // exact knapsack DP: cheapest way to buy k slots from cars g..end
        size_t cars = car_len_.size();
        suffix_car_slots_.assign(cars + 1, 0);
        for (size_t g = cars; g-- > 0;) suffix_car_slots_[g] = suffix_car_slots_[g + 1] + car_slots_[g];
        min_len_for_slots_.assign(cars + 1, {});
        min_len_for_slots_[cars] = {0};
        for (size_t g = cars; g-- > 0;) {
            const auto& next = min_len_for_slots_[g + 1];
            auto& cur = min_len_for_slots_[g];
            cur.assign(static_cast<size_t>(suffix_car_slots_[g]) + 1, kInfLen);
            int next_max = suffix_car_slots_[g + 1];
            for (int k = 0; k <= suffix_car_slots_[g]; ++k) {
                int32_t best = k <= next_max ? next[static_cast<size_t>(k)] : kInfLen;
                int rem = std::max(0, k - car_slots_[g]);
                if (rem <= next_max && next[static_cast<size_t>(rem)] < kInfLen)
                    best = std::min(best, car_len_[g] + next[static_cast<size_t>(rem)]);
                cur[static_cast<size_t>(k)] = best;
            }
        }
    }

    void build_suffix_stats() {
        size_t n = plats_.size();
        suffix_plats_.assign(n + 1, 0);
        suffix_b53_.assign(n + 1, 0);
        suffix_t53_.assign(n + 1, 0);
        for (int i = static_cast<int>(n) - 1; i >= 0; --i) {
            suffix_plats_[i] = suffix_plats_[i + 1] + 1;
            suffix_b53_[i] = suffix_b53_[i + 1] + (plats_[i].pt->length_ft == 53 ? 1 : 0);
            suffix_t53_[i] = suffix_t53_[i + 1] + (plats_[i].pt->top_53_capable ? 1 : 0);
        }
        double max_top_cap[2] = {-1.0, -1.0};
        for (const auto& p : plats_)
            for (int li = 0; li < 2; ++li) max_top_cap[li] = std::max(max_top_cap[li], p.top_cap[li]);
        for (int li = 0; li < 2; ++li) {
            int cnt = 0;
            for (double w : pools_[li].weight)
                if (w <= max_top_cap[li]) ++cnt;
            toppable_[li] = cnt;
        }

        // cap buckets and per-bucket pool-fit counts for the boundary memo
        for (int li = 0; li < 2; ++li) {
            auto& caps = bucket_caps_[li];
            for (const auto& p : plats_)
                if (p.top_cap[li] >= 0) caps.push_back(p.top_cap[li]);
            std::sort(caps.begin(), caps.end());
            caps.erase(std::unique(caps.begin(), caps.end()), caps.end());
            pool_fit_[li].resize(caps.size());
            for (size_t b = 0; b < caps.size(); ++b) {
                int cnt = 0;
                for (double w : pools_[li].weight)
                    if (w <= caps[b]) ++cnt;
                pool_fit_[li][b] = cnt;
            }
            bucket_top_demand_[li].assign(caps.size(), 0);
        }
        for (int li = 0; li < 2; ++li) {
            plat_top_bucket_[li].resize(plats_.size(), -1);
            for (size_t i = 0; i < plats_.size(); ++i) {
                if (plats_[i].top_cap[li] < 0) continue;
                const auto& caps = bucket_caps_[li];
                plat_top_bucket_[li][i] = static_cast<int16_t>(
                    std::lower_bound(caps.begin(), caps.end(), plats_[i].top_cap[li]) - caps.begin());
            }
        }
        memo_enabled_ = decomposable_ &&
                        3 + bucket_caps_[0].size() + bucket_caps_[1].size() <= 16;

        for (int li = 0; li < 2; ++li) {
            auto& sb = suffix_bucket_tops_[li];
            sb.assign(bucket_caps_[li].size(), std::vector<int>(n + 1, 0));
            for (size_t b = 0; b < bucket_caps_[li].size(); ++b)
                for (int i = static_cast<int>(n) - 1; i >= 0; --i)
                    sb[b][static_cast<size_t>(i)] =
                        sb[b][static_cast<size_t>(i) + 1] +
                        (plat_top_bucket_[li][static_cast<size_t>(i)] == static_cast<int>(b) ? 1 : 0);
        }

        prev_same_in_car_.assign(n, -1);
        for (size_t i = 0; i < n; ++i) {
            for (int k = static_cast<int>(i) - 1; k >= 0; --k) {
                if (plats_[static_cast<size_t>(k)].car_global != plats_[i].car_global) break;
                if (*plats_[static_cast<size_t>(k)].pt == *plats_[i].pt) {
                    prev_same_in_car_[i] = k;
                    break;
                }
            }
        }
    }

    bool memo_enabled_ = false;
    std::array<std::vector<int16_t>, 2> plat_top_bucket_;
    // previous platform of the same car with an identical PlatformType
    std::vector<int> prev_same_in_car_;
    // suffix counts of top slots per cap bucket
    std::array<std::vector<std::vector<int>>, 2> suffix_bucket_tops_;

    // Exact lower bound on the extra used length needed for `slots_needed`
    // more slots from platform `pos` onward (knapsack DP over whole railcars,
    // plus the already-open or openable current railcar).
    int32_t extra_length_lb(int pos, int slots_needed) const {
        if (slots_needed <= 0) return 0;
        int cur_car = pos < static_cast<int>(plats_.size()) ? plats_[pos].car_global : -1;
        size_t next_car = cur_car >= 0 ? static_cast<size_t>(cur_car) + 1 : car_len_.size();
        const auto& dp = min_len_for_slots_[next_car];
        auto dp_at = [&](int k) -> int32_t {
            if (k <= 0) return 0;
            if (k >= static_cast<int>(dp.size())) return kInfLen;
            return dp[static_cast<size_t>(k)];
        };
        if (cur_car < 0) return dp_at(slots_needed);
        int rem = 2 * plats_[pos].car_remaining_platforms;
        if (car_used_[cur_car]) return dp_at(slots_needed - rem);
        int32_t skip = dp_at(slots_needed);
        int32_t open = dp_at(slots_needed - rem);
        if (open < kInfLen) open += car_len_[cur_car];
        return std::min(skip, open);
    }

    struct AddBound {
        int total = 0;
        int max53 = 0;
    };

    // Max-cardinality dominance matching of the full pool against all
    // demanded plus remaining top slots of length `li`, minus the tops
    // already demanded: an upper bound on additional top placements.
    int additional_tops_ub(int li, int pos) const {
        int matched = 0, used_pool = 0;
        const auto& caps = bucket_caps_[li];
        for (size_t b = 0; b < caps.size(); ++b) {
            int slots_b = bucket_top_demand_[li][b] + suffix_bucket_tops_[li][b][static_cast<size_t>(pos)];
            int take = std::min(slots_b, pool_fit_[li][b] - used_pool);
            if (take > 0) {
                matched += take;
                used_pool += take;
            }
        }
        return std::max(0, matched - top_demand_[li]);
    }

    // Sound upper bound on additional loadable containers from `pos` onward.
    AddBound additional_count_ub(int pos) const {
        int p = suffix_plats_[pos];
        int rem40 = n40_ - demand_[0];
        int rem53 = n53_ - demand_[1];
        int sup40 = additional_tops_ub(0, pos);
        int sup53 = additional_tops_ub(1, pos);
        int ub53 = std::min(rem53, suffix_b53_[pos] + std::min(suffix_t53_[pos], sup53));
        int ub40 = std::min(rem40, p + std::min(p, sup40));
        int ub = std::min({2 * p, rem40 + rem53, p + std::min(p, sup40 + sup53), ub40 + ub53});
        ub = std::max(ub, 0);
        return {ub, std::clamp(ub53, 0, ub)};
    }

    bool prefix_demand_ok(int li) const {
        if (demand_[li] > pools_[li].size()) return false;
        return hall_ok(prefix_caps_[li], pools_[li]);
    }

    int64_t bound_value(const AddBound& add, int32_t len_lb) const {
        if (len_lb >= kInfLen) return std::numeric_limits<int64_t>::min();
        int feet_ub = cur_feet_ + 53 * add.max53 + 40 * (add.total - add.max53);
        return m_ * m_ * (cur_count_ + add.total) - m_ * (cur_len_ + len_lb) + feet_ub;
    }

    int64_t cur_scal() const {
        return lex_scalarize(LexObjective{cur_count_, cur_len_, cur_feet_}, m_);
    }

    int symmetry_floor(int pos) const {
        int prev = prev_same_in_car_[static_cast<size_t>(pos)];
        return prev >= 0 ? cur_vector_[static_cast<size_t>(prev)] : 0;
    }

    void record_memo(const MemoKey& key, int64_t ub_completion) {
        auto it = memo_.find(key);
        if (it == memo_.end())
            memo_.emplace(key, ub_completion);
        else
            it->second = std::min(it->second, ub_completion);
    }

    void dfs_optimize(int pos) {
        if (aborted_) return;
        if (pos == static_cast<int>(plats_.size())) {
            int64_t s = cur_scal();
            if (s <= best_scal_) return;
            if (!decomposable_ && !match_containers(cur_vector_, /*extract=*/false)) return;
            best_scal_ = s;
            best_obj_ = LexObjective{cur_count_, cur_len_, cur_feet_};
            best_vector_ = cur_vector_;
            return;
        }
        ++nodes_;
        if (cfg_.node_limit && nodes_ > *cfg_.node_limit) {
            aborted_ = true;
            return;
        }

        const PlatRef& ref = plats_[pos];
        bool boundary = memo_enabled_ && ref.plat_idx == 0;
        MemoKey key;
        int64_t prefix_scal = 0;
        if (boundary) {
            key = memo_key(pos);
            prefix_scal = cur_scal();
            auto it = memo_.find(key);
            if (it != memo_.end()) {
                int64_t reachable = prefix_scal + it->second;
                bool skip = cfg_.gap > 0 ? static_cast<double>(reachable) * (1.0 - cfg_.gap) <=
                                               static_cast<double>(best_scal_)
                                         : reachable <= best_scal_;
                if (skip) return;
            }
        }

        // identical platforms within a car carry non-decreasing pattern
        // indices (any other arrangement is a permutation of the same loading)
        int min_pidx = symmetry_floor(pos);

        for (int pidx : ref.patterns->visit_order) {
            if (pidx < min_pidx) continue;
            const PatternInfo& pat = ref.patterns->infos[static_cast<size_t>(pidx)];
            if (!apply_pattern(pos, pat)) continue;
            cur_vector_[pos] = static_cast<uint8_t>(pidx);

            AddBound add = additional_count_ub(pos + 1);
            int32_t len_lb = extra_length_lb(pos + 1, add.total);
            int64_t ub = bound_value(add, len_lb);
            bool explore = cfg_.gap > 0 ? static_cast<double>(ub) * (1.0 - cfg_.gap) >
                                              static_cast<double>(best_scal_)
                                        : ub > best_scal_;
            if (explore) dfs_optimize(pos + 1);
            undo_pattern(pos, pat);
            cur_vector_[pos] = 0;
            if (aborted_) return;
        }

        // after a full exploration every completion from this state is
        // bounded by the final incumbent: each leaf below was either visited
        // or cut against a value the final best dominates
        if (!aborted_ && boundary) record_memo(key, best_scal_ - prefix_scal);
    }

    // Descend in pattern-index order, keeping only branches that can still
    // reach the proven optimum. The first full assignment hitting the target
    // is the lexicographically smallest optimal pattern vector.
    bool dfs_canonical(int pos) {
        if (pos == static_cast<int>(plats_.size())) {
            if (cur_scal() != target_scal_) return false;
            if (!decomposable_ && !match_containers(cur_vector_, /*extract=*/false)) return false;
            best_vector_ = cur_vector_;
            best_obj_ = LexObjective{cur_count_, cur_len_, cur_feet_};
            return true;
        }
        ++nodes_;

        const PlatRef& ref = plats_[pos];
        bool boundary = memo_enabled_ && ref.plat_idx == 0;
        MemoKey key;
        int64_t prefix_scal = 0;
        if (boundary) {
            key = memo_key(pos);
            prefix_scal = cur_scal();
            auto it = memo_.find(key);
            if (it != memo_.end() && prefix_scal + it->second < target_scal_) return false;
        }

        int min_pidx = symmetry_floor(pos);
        int n_patterns = static_cast<int>(ref.patterns->infos.size());
        for (int pidx = min_pidx; pidx < n_patterns; ++pidx) {
            const PatternInfo& pat = ref.patterns->infos[static_cast<size_t>(pidx)];
            if (!apply_pattern(pos, pat)) continue;
            cur_vector_[pos] = static_cast<uint8_t>(pidx);

            AddBound add = additional_count_ub(pos + 1);
            int32_t len_lb = extra_length_lb(pos + 1, add.total);
            if (bound_value(add, len_lb) >= target_scal_ && dfs_canonical(pos + 1)) return true;
            undo_pattern(pos, pat);
            cur_vector_[pos] = 0;
        }

        // nothing below this state reaches the target
        if (boundary) record_memo(key, target_scal_ - prefix_scal - 1);
        return false;
    }

    bool apply_pattern(int pos, const PatternInfo& pat) {
        const PlatRef& ref = plats_[pos];
        if (pat.bottom >= 0 && ref.bottom_cap[pat.bottom] < 0) return false;
        if (pat.top >= 0 && ref.top_cap[pat.top] < 0) return false;

        cur_count_ += pat.slots;
        cur_feet_ += pat.container_feet;
        bool newly_used = false;
        if (pat.slots > 0 && !car_used_[ref.car_global]) {
            car_used_[ref.car_global] = 1;
            cur_len_ += ref.car_length_ft;
            newly_used = true;
        }
        if (pat.bottom >= 0) {
            ++demand_[pat.bottom];
            sorted_insert(prefix_caps_[pat.bottom], ref.bottom_cap[pat.bottom]);
        }
        if (pat.top >= 0) {
            ++demand_[pat.top];
            ++top_demand_[pat.top];
            ++bucket_top_demand_[pat.top][static_cast<size_t>(plat_top_bucket_[pat.top][static_cast<size_t>(pos)])];
            sorted_insert(prefix_caps_[pat.top], ref.top_cap[pat.top]);
        }
        bool ok = pat.slots == 0 ||
                  ((pat.bottom < 0 || prefix_demand_ok(pat.bottom)) &&
                   (pat.top < 0 || pat.top == pat.bottom || prefix_demand_ok(pat.top)));
        if (!ok) {
            undo_pattern_inner(pos, pat, newly_used);
            return false;
        }
        applied_newly_used_.push_back(newly_used ? 1 : 0);
        return true;
    }

    void undo_pattern(int pos, const PatternInfo& pat) {
        bool newly_used = applied_newly_used_.back() != 0;
        applied_newly_used_.pop_back();
        undo_pattern_inner(pos, pat, newly_used);
    }

    void undo_pattern_inner(int pos, const PatternInfo& pat, bool newly_used) {
        const PlatRef& ref = plats_[pos];
        cur_count_ -= pat.slots;
        cur_feet_ -= pat.container_feet;
        if (newly_used) {
            car_used_[ref.car_global] = 0;
            cur_len_ -= ref.car_length_ft;
        }
        if (pat.bottom >= 0) {
            --demand_[pat.bottom];
            sorted_erase(prefix_caps_[pat.bottom], ref.bottom_cap[pat.bottom]);
        }
        if (pat.top >= 0) {
            --demand_[pat.top];
            --top_demand_[pat.top];
            --bucket_top_demand_[pat.top][static_cast<size_t>(plat_top_bucket_[pat.top][static_cast<size_t>(pos)])];
            sorted_erase(prefix_caps_[pat.top], ref.top_cap[pat.top]);
        }
    }

    // Exact matching of containers to the occupied slots of a full pattern
    // assignment, in canonical order (platforms canonical, bottom before top,
    // heaviest candidate first). Returns per-occupied-platform (bottom, top)
    // container ids, or nullopt if infeasible. For decomposable
    // configurations the incremental Hall checks already guarantee
    // feasibility, so this runs only once, for extraction.
    std::optional<std::vector<std::array<int32_t, 2>>> match_containers(
        const std::vector<uint8_t>& vec, bool extract) {
        struct Demand {
            int pos;
            const PatternInfo* pat;
        };
        std::vector<Demand> demands;
        for (size_t i = 0; i < vec.size(); ++i) {
            const PatternInfo& pat = plats_[i].patterns->infos[vec[i]];
            if (pat.slots > 0) demands.push_back({static_cast<int>(i), &pat});
        }
        std::vector<std::array<int32_t, 2>> picks(demands.size(), {-1, -1});
        std::vector<double> caps[2];
        for (const auto& d : demands) {
            const PlatRef& ref = plats_[static_cast<size_t>(d.pos)];
            sorted_insert(caps[d.pat->bottom], ref.bottom_cap[d.pat->bottom]);
            if (d.pat->top >= 0) sorted_insert(caps[d.pat->top], ref.top_cap[d.pat->top]);
        }
        for (auto& p : pools_[0].taken) p = 0;
        for (auto& p : pools_[1].taken) p = 0;
        if (!hall_ok(caps[0], pools_[0]) || !hall_ok(caps[1], pools_[1])) return std::nullopt;

        std::function<bool(size_t)> place = [&](size_t di) -> bool {
            if (di == demands.size()) return true;
            const auto& d = demands[di];
            const PlatRef& ref = plats_[static_cast<size_t>(d.pos)];
            const PlatformType& pt = *ref.pt;
            int bl = d.pat->bottom, tl = d.pat->top;
            sorted_erase(caps[bl], ref.bottom_cap[bl]);
            if (tl >= 0) sorted_erase(caps[tl], ref.top_cap[tl]);

            auto& bp = pools_[bl];
            for (int bi = 0; bi < bp.size(); ++bi) {
                if (bp.taken[bi]) continue;
                double bw = bp.weight[bi];
                if (bw > ref.bottom_cap[bl]) continue;
                if (tl < 0 && !pattern_weight_feasible(d.pat->pattern, bw, 0.0, pt)) continue;
                bp.taken[bi] = 1;
                bool hall = hall_ok(caps[0], pools_[0]) && hall_ok(caps[1], pools_[1]);
                if (hall) {
                    if (tl < 0) {
                        if (place(di + 1)) {
                            picks[di] = {bp.id[bi], -1};
                            return true;
                        }
                    } else {
                        auto& tp = pools_[tl];
                        for (int ti = 0; ti < tp.size(); ++ti) {
                            if (tp.taken[ti]) continue;
                            double tw = tp.weight[ti];
                            if (!pattern_weight_feasible(d.pat->pattern, bw, tw, pt)) continue;
                            tp.taken[ti] = 1;
                            if (hall_ok(caps[0], pools_[0]) && hall_ok(caps[1], pools_[1]) &&
                                place(di + 1)) {
                                picks[di] = {bp.id[bi], tp.id[ti]};
                                return true;
                            }
                            tp.taken[ti] = 0;
                            while (ti + 1 < tp.size() && tp.weight[ti + 1] == tw) ++ti;
                        }
                    }
                }
                bp.taken[bi] = 0;
                while (bi + 1 < bp.size() && bp.weight[bi + 1] == bw) ++bi;
            }
            sorted_insert(caps[bl], ref.bottom_cap[bl]);
            if (tl >= 0) sorted_insert(caps[tl], ref.top_cap[tl]);
            return false;
        };

        bool ok = place(0);
        if (!extract || !ok) {
            for (auto& p : pools_[0].taken) p = 0;
            for (auto& p : pools_[1].taken) p = 0;
        }
        if (!ok) return std::nullopt;
        return picks;
    }

    DetailedSolution extract(const std::vector<uint8_t>& vec) {
        auto picks = match_containers(vec, /*extract=*/true);
        if (!picks) throw InvalidInputError("solver: internal error, incumbent not matchable");
        for (auto& p : pools_[0].taken) p = 0;
        for (auto& p : pools_[1].taken) p = 0;

        DetailedSolution sol;
        for (int t = 0; t < kRailcarTypes; ++t) {
            sol.railcars[t].resize(static_cast<size_t>(inst_.sketch.railcar_counts[t]));
            for (auto& car : sol.railcars[t])
                car.platforms.resize(fleet_.railcar_types[t].platforms.size());
        }
        size_t di = 0;
        for (size_t i = 0; i < vec.size(); ++i) {
            const PlatRef& ref = plats_[i];
            const PatternInfo& pat = ref.patterns->infos[vec[i]];
            auto& pl = sol.railcars[ref.type_idx][static_cast<size_t>(ref.car_idx)]
                           .platforms[static_cast<size_t>(ref.plat_idx)];
            pl.pattern_index = vec[i];
            if (pat.slots > 0) {
                pl.bottom_container = (*picks)[di][0];
                pl.top_container = (*picks)[di][1];
                ++di;
                if (pat.bottom >= 0) ++sol.loaded_per_length[pat.bottom];
                if (pat.top >= 0) ++sol.loaded_per_length[pat.top];
            }
        }
        for (int t = 0; t < kRailcarTypes; ++t) {
            sol.used_railcars[t] = 0;
            for (const auto& car : sol.railcars[t]) {
                bool used = false;
                for (const auto& pl : car.platforms) used |= pl.pattern_index != 0;
                if (used) ++sol.used_railcars[t];
            }
        }
        return sol;
    }
};

}  // namespace solver_detail

// Exact (or gap-bounded) lexicographic optimum with canonical tie-breaking:
// among objective-tied optima the returned solution minimizes the pattern
// index sequence over canonically ordered platforms (type id, railcar index,
// platform index; index 0 = empty pattern) and then fills occupied slots in
// canonical order with the heaviest feasible container (lower id on weight
// ties). Pure function of its arguments; repeated solves are bitwise
// identical.
inline DetailedSolution solve_lpp(const FullInstance& instance, const Fleet& fleet,
                                  const SolverConfig& config = {}, SolveInfo* info = nullptr) {
    if (config.gap < 0) throw InvalidInputError("solve_lpp: gap must be >= 0");
    for (int li = 0; li < 2; ++li)
        if (static_cast<int>(instance.weights[li].size()) != instance.sketch.container_counts[li])
            throw InvalidInputError("solve_lpp: instance weights inconsistent with sketch");
    for (int j = 0; j < kRailcarTypes; ++j)
        if (instance.sketch.railcar_counts[j] < 0)
            throw InvalidInputError("solve_lpp: negative railcar count");
    solver_detail::Search search(instance, fleet, config);
    return search.run(info);
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

struct BruteForceCaps {
    int max_platforms = 6;
    int max_containers = 10;
};

// Exhaustive enumeration of every pattern assignment and every container
// placement; the verification oracle for solve_lpp. Shares nothing with the
// search beyond the domain predicates.
inline DetailedSolution brute_force_lpp(const FullInstance& instance, const Fleet& fleet,
                                        const BruteForceCaps& caps = {}) {
    int total_platforms = instance.sketch.total_platforms(fleet);
    int total_containers = instance.sketch.total_containers();
    if (total_platforms > caps.max_platforms || total_containers > caps.max_containers)
        throw SizeCapError("brute_force_lpp: instance exceeds the oracle size cap (" +
                           std::to_string(total_platforms) + " platforms, " +
                           std::to_string(total_containers) + " containers)");

    struct Plat {
        int type, car, plat;
        const PlatformType* pt;
        std::vector<LoadingPattern> patterns;
        int car_len;
        int car_key;
    };
    std::vector<Plat> plats;
    int car_key = 0;
    for (int t = 0; t < kRailcarTypes; ++t) {
        const auto& rt = fleet.railcar_types[t];
        for (int c = 0; c < instance.sketch.railcar_counts[t]; ++c) {
            for (size_t pi = 0; pi < rt.platforms.size(); ++pi)
                plats.push_back({t, c, static_cast<int>(pi), &rt.platforms[pi],
                                 enumerate_patterns(rt.platforms[pi]), rt.total_length_ft(), car_key});
            ++car_key;
        }
    }

    int n40 = instance.sketch.container_counts[0];
    std::array<std::vector<int32_t>, 2> order;
    for (int li = 0; li < 2; ++li) {
        int n = instance.sketch.container_counts[li];
        for (int i = 0; i < n; ++i) order[li].push_back(li == 0 ? i : n40 + i);
        std::stable_sort(order[li].begin(), order[li].end(), [&](int32_t a, int32_t b) {
            double wa = instance.weights[li][li == 0 ? a : a - n40];
            double wb = instance.weights[li][li == 0 ? b : b - n40];
            return wa > wb;
        });
    }
    auto weight_of = [&](int32_t id) {
        return id < n40 ? instance.weights[0][id] : instance.weights[1][id - n40];
    };

    std::vector<int> choice(plats.size(), 0);
    std::vector<char> used(static_cast<size_t>(total_containers), 0);
    std::vector<std::array<int32_t, 2>> picks(plats.size(), {-1, -1});

    std::optional<std::vector<int>> best_choice;
    std::vector<std::array<int32_t, 2>> best_picks;
    LexObjective best_obj{0, 0, 0};

    std::function<bool(size_t)> assign = [&](size_t i) -> bool {
        if (i == plats.size()) return true;
        const auto& pat = plats[i].patterns[static_cast<size_t>(choice[i])];
        picks[i] = {-1, -1};
        if (pat.empty()) return assign(i + 1);
        const auto& bottoms = order[index_of(*pat.bottom)];
        if (!pat.top) {
            for (int32_t id : bottoms) {
                if (used[id]) continue;
                if (!pattern_weight_feasible(pat, weight_of(id), 0.0, *plats[i].pt)) continue;
                used[id] = 1;
                picks[i] = {id, -1};
                if (assign(i + 1)) return true;
                used[id] = 0;
            }
            picks[i] = {-1, -1};
            return false;
        }
        const auto& tops = order[index_of(*pat.top)];
        for (int32_t b : bottoms) {
            if (used[b]) continue;
            used[b] = 1;
            for (int32_t t : tops) {
                if (used[t]) continue;
                if (!pattern_weight_feasible(pat, weight_of(b), weight_of(t), *plats[i].pt)) continue;
                used[t] = 1;
                picks[i] = {b, t};
                if (assign(i + 1)) return true;
                used[t] = 0;
            }
            used[b] = 0;
        }
        picks[i] = {-1, -1};
        return false;
    };

    std::function<void(size_t)> enumerate = [&](size_t i) {
        if (i == plats.size()) {
            LexObjective obj{0, 0, 0};
            std::vector<char> car_nonempty(static_cast<size_t>(car_key), 0);
            for (size_t p = 0; p < plats.size(); ++p) {
                const auto& pat = plats[p].patterns[static_cast<size_t>(choice[p])];
                obj.loaded_containers += pat.slots();
                obj.loaded_container_length_ft += pat.container_feet();
                if (!pat.empty()) car_nonempty[static_cast<size_t>(plats[p].car_key)] = 1;
            }
            if (obj.loaded_containers > total_containers) return;
            int seen_car = -1;
            for (const auto& p : plats) {
                if (p.car_key == seen_car) continue;
                seen_car = p.car_key;
                if (car_nonempty[static_cast<size_t>(p.car_key)]) obj.used_railcar_length_ft += p.car_len;
            }
            if (best_choice && !lex_better(obj, best_obj)) return;
            std::fill(used.begin(), used.end(), 0);
            if (!assign(0)) return;
            best_choice = choice;
            best_picks = picks;
            best_obj = obj;
            return;
        }
        for (size_t pi = 0; pi < plats[i].patterns.size(); ++pi) {
            choice[i] = static_cast<int>(pi);
            enumerate(i + 1);
        }
        choice[i] = 0;
    };
    enumerate(0);

    DetailedSolution sol;
    for (int t = 0; t < kRailcarTypes; ++t) {
        sol.railcars[t].resize(static_cast<size_t>(instance.sketch.railcar_counts[t]));
        for (auto& car : sol.railcars[t]) car.platforms.resize(fleet.railcar_types[t].platforms.size());
    }
    if (best_choice) {
        sol.objective = best_obj;
        for (size_t p = 0; p < plats.size(); ++p) {
            auto& pl = sol.railcars[plats[p].type][static_cast<size_t>(plats[p].car)]
                           .platforms[static_cast<size_t>(plats[p].plat)];
            pl.pattern_index = (*best_choice)[p];
            pl.bottom_container = best_picks[p][0];
            pl.top_container = best_picks[p][1];
            const auto& pat = plats[p].patterns[static_cast<size_t>((*best_choice)[p])];
            if (pat.bottom) ++sol.loaded_per_length[index_of(*pat.bottom)];
            if (pat.top) ++sol.loaded_per_length[index_of(*pat.top)];
        }
    }
    for (int t = 0; t < kRailcarTypes; ++t) {
        sol.used_railcars[t] = 0;
        for (const auto& car : sol.railcars[t]) {
            bool u = false;
            for (const auto& pl : car.platforms) u |= pl.pattern_index != 0;
            if (u) ++sol.used_railcars[t];
        }
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

// True iff the solution satisfies every structural, assignment and weight
// constraint and its derived fields are consistent.
inline bool verify_solution(const FullInstance& instance, const Fleet& fleet,
                            const DetailedSolution& sol) {
    int n40 = instance.sketch.container_counts[0];
    int n53 = instance.sketch.container_counts[1];
    std::vector<char> assigned(static_cast<size_t>(n40 + n53), 0);
    LexObjective obj{0, 0, 0};
    std::array<int, kContainerLengths> loaded{};
    std::array<int, kRailcarTypes> used{};

    auto take_container = [&](int32_t id, ContainerLength expect, double& weight_out) {
        if (id < 0 || id >= n40 + n53) return false;
        ContainerLength l = id < n40 ? ContainerLength::L40 : ContainerLength::L53;
        if (l != expect || assigned[id]) return false;
        assigned[id] = 1;
        weight_out = id < n40 ? instance.weights[0][id] : instance.weights[1][id - n40];
        ++loaded[index_of(l)];
        return true;
    };

    for (int t = 0; t < kRailcarTypes; ++t) {
        const auto& rt = fleet.railcar_types[t];
        if (static_cast<int>(sol.railcars[t].size()) != instance.sketch.railcar_counts[t]) return false;
        for (const auto& car : sol.railcars[t]) {
            if (car.platforms.size() != rt.platforms.size()) return false;
            bool car_used = false;
            for (size_t pi = 0; pi < car.platforms.size(); ++pi) {
                const auto& pl = car.platforms[pi];
                auto patterns = enumerate_patterns(rt.platforms[pi]);
                if (pl.pattern_index < 0 || pl.pattern_index >= static_cast<int>(patterns.size()))
                    return false;
                const auto& pat = patterns[static_cast<size_t>(pl.pattern_index)];
                double bw = 0, tw = 0;
                if (pat.bottom) {
                    if (!take_container(pl.bottom_container, *pat.bottom, bw)) return false;
                } else if (pl.bottom_container != -1) {
                    return false;
                }
                if (pat.top) {
                    if (!take_container(pl.top_container, *pat.top, tw)) return false;
                } else if (pl.top_container != -1) {
                    return false;
                }
                try {
                    if (!pattern_weight_feasible(pat, bw, tw, rt.platforms[pi])) return false;
                } catch (const InvalidInputError&) {
                    return false;
                }
                obj.loaded_containers += pat.slots();
                obj.loaded_container_length_ft += pat.container_feet();
                if (!pat.empty()) car_used = true;
            }
            if (car_used) {
                ++used[t];
                obj.used_railcar_length_ft += rt.total_length_ft();
            }
        }
    }
    return obj == sol.objective && loaded == sol.loaded_per_length && used == sol.used_railcars;
}

}  // namespace loadcast
