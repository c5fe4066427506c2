#include "cbs/strategies.hpp"

#include "cbs/error.hpp"
#include "cbs/log.hpp"

#include <algorithm>
#include <queue>

namespace cbs {

void DmParams::validate() const {
    if (max_concept_frequency == 0) throw ConfigError("max_concept_frequency must be positive");
    if (min_samples_concept == 0) throw ConfigError("min_samples_concept must be positive");
    if (min_samples_concept > max_concept_frequency)
        throw ConfigError("min_samples_concept must not exceed max_concept_frequency");
    if (!(rarity_epsilon >= 0.0)) throw ConfigError("rarity_epsilon must be non-negative");
}

std::size_t ConceptTargets::local_index(ConceptId id) const {
    const auto it = std::lower_bound(concepts.begin(), concepts.end(), id);
    if (it == concepts.end() || *it != id) return concepts.size();
    return static_cast<std::size_t>(it - concepts.begin());
}

std::uint64_t ConceptTargets::target_sum() const {
    std::uint64_t sum = 0;
    for (const auto t : target) sum += t;
    return sum;
}

GainState::GainState(const ConceptTargets& targets, const DmParams& params)
    : target(targets.target),
      count(targets.size(), 0),
      frequency(targets.frequency),
      rarity_epsilon(params.rarity_epsilon),
      rarity_bonus(params.rarity_bonus),
      frequency_cap(params.max_concept_frequency) {}

ConceptTargets compute_targets(const Superbatch& batch, const DmParams& params, std::size_t b) {
    params.validate();
    if (batch.empty()) throw ConfigError("compute_targets: empty superbatch");

    std::vector<ConceptId> all;
    for (const auto& s : batch.samples) {
        const auto set = s.concept_set();
        all.insert(all.end(), set.begin(), set.end());
    }
    ConceptTargets out;
    if (all.empty()) {
        log().warn("superbatch {} has no concept annotations; all targets are zero", batch.seq);
        return out;
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j] == all[i]) ++j;
        out.concepts.push_back(all[i]);
        out.frequency.push_back(static_cast<std::uint32_t>(j - i));
        i = j;
    }

    // ceil(b * mean|C_i| / U) in exact integer arithmetic.
    const std::uint64_t set_total = all.size();
    const std::uint64_t denom = static_cast<std::uint64_t>(batch.size()) * out.concepts.size();
    const std::uint64_t base = (static_cast<std::uint64_t>(b) * set_total + denom - 1) / denom;
    const auto clamped = std::clamp<std::uint64_t>(base, params.min_samples_concept, params.max_concept_frequency);
    out.target.reserve(out.concepts.size());
    for (const auto f : out.frequency) out.target.push_back(static_cast<std::uint32_t>(std::min<std::uint64_t>(clamped, f)));
    return out;
}

std::vector<std::vector<std::uint32_t>> local_concept_sets(const Superbatch& batch, const ConceptTargets& targets) {
    std::vector<std::vector<std::uint32_t>> sets;
    sets.reserve(batch.size());
    for (const auto& s : batch.samples) {
        std::vector<std::uint32_t> local;
        for (const auto id : s.concept_set()) {
            const auto idx = targets.local_index(id);
            if (idx < targets.size()) local.push_back(static_cast<std::uint32_t>(idx));
        }
        sets.push_back(std::move(local));
    }
    return sets;
}

double dm_gain(std::span<const std::uint32_t> concepts, const GainState& state) {
    if (concepts.empty()) return 0.0;
    double sum = 0.0;
    for (const auto c : concepts) {
        const auto t = state.target[c];
        const auto n = state.count[c];
        if (t == 0 || n >= t) continue;
        sum += static_cast<double>(t - n) / static_cast<double>(t);
        if (state.rarity_bonus) sum += 1.0 / (static_cast<double>(state.frequency[c]) + state.rarity_epsilon);
    }
    return sum / static_cast<double>(concepts.size());
}

double deficit_sum_gain(std::span<const std::uint32_t> concepts, const GainState& state) {
    double sum = 0.0;
    for (const auto c : concepts) {
        const auto t = state.target[c];
        const auto n = state.count[c];
        if (n >= state.frequency_cap || n >= t) continue;
        sum += static_cast<double>(t - n) / (static_cast<double>(state.frequency[c]) + state.rarity_epsilon);
    }
    return sum;
}

namespace {

struct HeapEntry {
    double gain;
    std::size_t pos;
};

// Max-heap on gain, ties to the smaller position.
struct HeapOrder {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
        return a.gain < b.gain || (a.gain == b.gain && a.pos > b.pos);
    }
};

}  // namespace

namespace {

// One lazy-greedy pass over the unselected samples. With `capped`, a sample is
// skipped once any of its concepts has reached its target.
template <class Gain>
void greedy_pass(const std::vector<std::vector<std::uint32_t>>& sets, GainState& state, std::vector<bool>& taken,
                 std::vector<std::size_t>& positions, std::size_t b, bool capped, Gain gain) {
    const auto eligible = [&](std::size_t pos) {
        if (!capped) return true;
        return std::all_of(sets[pos].begin(), sets[pos].end(),
                           [&](std::uint32_t c) { return state.count[c] < state.target[c]; });
    };

    std::vector<HeapEntry> initial;
    initial.reserve(sets.size());
    for (std::size_t pos = 0; pos < sets.size(); ++pos) {
        if (taken[pos] || !eligible(pos)) continue;
        const double g = gain(sets[pos]);
        if (g > 0.0) initial.push_back({g, pos});
    }
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap(HeapOrder{}, std::move(initial));

    // Gains only fall as counts rise, so a popped entry whose recomputed gain
    // still matches its key is the true argmax.
    while (positions.size() < b && !heap.empty()) {
        const HeapEntry top = heap.top();
        heap.pop();
        if (!eligible(top.pos)) continue;
        const double g = gain(sets[top.pos]);
        if (!(g > 0.0)) continue;
        if (g < top.gain) {
            heap.push({g, top.pos});
            continue;
        }
        taken[top.pos] = true;
        positions.push_back(top.pos);
        for (const auto c : sets[top.pos]) ++state.count[c];
    }
}

}  // namespace

DmSelection dm_select_detailed(const Superbatch& batch, std::size_t b, const DmParams& params, GainRule rule) {
    if (b > batch.size())
        throw ConfigError("dm_select: sub-batch size " + std::to_string(b) + " exceeds superbatch size " +
                          std::to_string(batch.size()));
    DmSelection out;
    if (b == 0) return out;
    out.targets = compute_targets(batch, params, b);
    const auto sets = local_concept_sets(batch, out.targets);
    GainState state(out.targets, params);
    std::vector<bool> taken(batch.size(), false);
    out.positions.reserve(b);

    if (rule == GainRule::balanced) {
        const auto gain = [&](const std::vector<std::uint32_t>& s) { return dm_gain(s, state); };
        greedy_pass(sets, state, taken, out.positions, b, true, gain);
        out.gain_phase = out.positions.size();
        greedy_pass(sets, state, taken, out.positions, b, false, gain);
    } else {
        const auto gain = [&](const std::vector<std::uint32_t>& s) { return deficit_sum_gain(s, state); };
        greedy_pass(sets, state, taken, out.positions, b, false, gain);
        out.gain_phase = out.positions.size();
    }
    out.relaxed_phase = out.positions.size() - out.gain_phase;

    for (std::size_t pos = 0; pos < batch.size() && out.positions.size() < b; ++pos) {
        if (!taken[pos]) out.positions.push_back(pos);
    }
    return out;
}

std::vector<std::size_t> dm_select(const Superbatch& batch, std::size_t b, const DmParams& params, GainRule rule) {
    return dm_select_detailed(batch, b, params, rule).positions;
}

std::size_t fm_score(const SampleAnnotation& sample) { return sample.concepts.size(); }

std::vector<double> IidStrategy::score(const Superbatch& batch) const {
    std::vector<double> scores;
    scores.reserve(batch.size());
    for (const auto& s : batch.samples) scores.push_back(iid_score(s));
    return scores;
}

std::vector<double> FmStrategy::score(const Superbatch& batch) const {
    std::vector<double> scores;
    scores.reserve(batch.size());
    for (const auto& s : batch.samples) scores.push_back(static_cast<double>(fm_score(s)));
    return scores;
}

DmStrategy::DmStrategy(DmParams params, GainRule rule) : params_(params), rule_(rule) { params_.validate(); }

std::string_view DmStrategy::name() const { return rule_ == GainRule::balanced ? "dm" : "dm-alg2"; }

std::vector<std::size_t> DmStrategy::select(const Superbatch& batch, std::size_t b) const {
    return dm_select(batch, b, params_, rule_);
}

std::unique_ptr<ScoringStrategy> make_strategy(std::string_view name, const DmParams& params) {
    if (name == "iid") return std::make_unique<IidStrategy>();
    if (name == "fm") return std::make_unique<FmStrategy>();
    if (name == "dm") return std::make_unique<DmStrategy>(params, GainRule::balanced);
    if (name == "dm-alg2") return std::make_unique<DmStrategy>(params, GainRule::deficit_sum);
    throw ConfigError("unknown strategy '" + std::string(name) + "' (expected iid, dm, fm or dm-alg2)");
}

}  // namespace cbs
