#pragma once

#include "cbs/sampler.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace cbs {

struct DmParams {
    std::uint32_t max_concept_frequency = 40;
    std::uint32_t min_samples_concept = 1;
    /// Guard in the rarity bonus 1 / (F_c + epsilon).
    double rarity_epsilon = 1e-8;
    /// Disabling the rarity bonus leaves only the balance term.
    bool rarity_bonus = true;

    void validate() const;
};

/// Which marginal-gain formula drives the greedy loop.
enum class GainRule {
    /// Mean over C_i of (t_c - n_c)/t_c + 1/F_c for unsaturated concepts.
    balanced,
    /// Sum over C_i of max(0, t_c - n_c) / (F_c + 1e-8) while n_c < cap.
    deficit_sum,
};

/// Per-superbatch concept statistics, indexed by a dense local concept index.
struct ConceptTargets {
    std::vector<ConceptId> concepts;        // sorted, distinct
    std::vector<std::uint32_t> frequency;   // F_c: samples containing c
    std::vector<std::uint32_t> target;      // t_c

    [[nodiscard]] std::size_t size() const noexcept { return concepts.size(); }
    /// Local index of a concept, or size() when absent.
    [[nodiscard]] std::size_t local_index(ConceptId id) const;
    [[nodiscard]] std::uint64_t target_sum() const;
};

/// Greedy selection state: targets plus running counts n_c.
struct GainState {
    std::vector<std::uint32_t> target;
    std::vector<std::uint32_t> count;
    std::vector<std::uint32_t> frequency;
    std::vector<std::size_t> selected;
    double rarity_epsilon = 1e-8;
    bool rarity_bonus = true;
    std::uint32_t frequency_cap = 40;

    GainState() = default;
    GainState(const ConceptTargets& targets, const DmParams& params);
};

/// Concept sets of every superbatch sample, remapped to local indices.
std::vector<std::vector<std::uint32_t>> local_concept_sets(const Superbatch& batch, const ConceptTargets& targets);

/// F_c over the superbatch and t_c = min(F_c, clamp(ceil(b * mean|C_i| / U), min, max)).
/// A superbatch without any concept yields empty targets and a warning.
ConceptTargets compute_targets(const Superbatch& batch, const DmParams& params, std::size_t b);

/// Balanced gain for a de-duplicated set of local concept indices.
double dm_gain(std::span<const std::uint32_t> concepts, const GainState& state);

/// Alternative gain: summed deficit weighted by inverse frequency.
double deficit_sum_gain(std::span<const std::uint32_t> concepts, const GainState& state);

struct DmSelection {
    std::vector<std::size_t> positions;  // selection order
    std::size_t gain_phase = 0;          // capped picks: every concept stays within t_c
    std::size_t relaxed_phase = 0;       // positive-gain picks after the capped phase
    ConceptTargets targets;
};

/// Lazy greedy diversity selection. Picks the highest-gain sample (ties go to
/// the smaller position). Under the balanced rule the first pass skips any
/// sample with a saturated concept; a second pass drops that restriction and
/// keeps going while gains stay positive. The remainder is filled up to `b` in
/// superbatch order.
DmSelection dm_select_detailed(const Superbatch& batch, std::size_t b, const DmParams& params,
                               GainRule rule = GainRule::balanced);

std::vector<std::size_t> dm_select(const Superbatch& batch, std::size_t b, const DmParams& params,
                                   GainRule rule = GainRule::balanced);

/// Instance count |C_i| with repeats.
std::size_t fm_score(const SampleAnnotation& sample);

inline double iid_score(const SampleAnnotation& /*sample*/) { return 1.0; }

class IidStrategy final : public ScoringStrategy {
public:
    [[nodiscard]] std::string_view name() const override { return "iid"; }
    [[nodiscard]] bool stateful() const override { return false; }
    [[nodiscard]] std::vector<double> score(const Superbatch& batch) const override;
};

class FmStrategy final : public ScoringStrategy {
public:
    [[nodiscard]] std::string_view name() const override { return "fm"; }
    [[nodiscard]] bool stateful() const override { return false; }
    [[nodiscard]] std::vector<double> score(const Superbatch& batch) const override;
};

class DmStrategy final : public ScoringStrategy {
public:
    explicit DmStrategy(DmParams params = {}, GainRule rule = GainRule::balanced);

    [[nodiscard]] std::string_view name() const override;
    [[nodiscard]] bool stateful() const override { return true; }
    [[nodiscard]] std::vector<std::size_t> select(const Superbatch& batch, std::size_t b) const override;

    [[nodiscard]] const DmParams& params() const noexcept { return params_; }
    [[nodiscard]] GainRule rule() const noexcept { return rule_; }

private:
    DmParams params_;
    GainRule rule_;
};

/// Builds "iid", "dm", "fm" or "dm-alg2"; throws ConfigError otherwise.
std::unique_ptr<ScoringStrategy> make_strategy(std::string_view name, const DmParams& params = {});

}  // namespace cbs
