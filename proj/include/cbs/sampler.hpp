#pragma once

#include "cbs/annotation.hpp"
#include "cbs/error.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbs {

class BatchSink;

/// round-half-up of (1 - f) * len, never below 1 for a non-empty window.
std::size_t sub_batch_size(std::size_t len, double filter_ratio);

struct SamplerConfig {
    std::size_t superbatch_size = 20480;
    double filter_ratio = 0.8;
    std::uint64_t seed = 0;
    std::size_t epochs = 1;
    /// 0 keeps file order; otherwise a seeded buffer shuffle of this many records.
    std::size_t shuffle_buffer = 0;
    /// Read superbatch N+1 on a worker thread while N is being selected.
    bool prefetch = true;

    /// Throws ConfigError unless B >= 1, f in [0,1), epochs >= 1 and b >= 1.
    void validate() const;
    [[nodiscard]] std::size_t sub_batch_size() const { return cbs::sub_batch_size(superbatch_size, filter_ratio); }
};

/// A window of consecutive stream records.
struct Superbatch {
    std::vector<SampleAnnotation> samples;
    std::vector<std::size_t> origin_indices;
    std::size_t epoch = 0;
    std::size_t seq = 0;

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
};

struct SelectedBatch {
    std::size_t epoch = 0;
    std::size_t batch_seq = 0;
    std::string strategy;
    std::vector<std::size_t> indices;  // origin ordinals, in selection order

    friend bool operator==(const SelectedBatch&, const SelectedBatch&) = default;
};

/// Sub-batch selection heuristic.
///
/// Stateless strategies implement score(); the driver ranks with select_topk.
/// Stateful strategies implement select() and build the whole sub-batch
/// themselves. Neither may keep state across superbatches.
class ScoringStrategy {
public:
    virtual ~ScoringStrategy() = default;

    [[nodiscard]] virtual std::string_view name() const = 0;
    [[nodiscard]] virtual bool stateful() const = 0;

    /// One score per superbatch position.
    [[nodiscard]] virtual std::vector<double> score(const Superbatch& batch) const;

    /// Superbatch positions of the chosen samples, exactly `b` of them.
    [[nodiscard]] virtual std::vector<std::size_t> select(const Superbatch& batch, std::size_t b) const;
};

/// Indices of the k largest scores, ordered by descending score then
/// ascending index. Throws ConfigError when k > scores.size() and DataError
/// on NaN.
std::vector<std::size_t> select_topk(std::span<const double> scores, std::size_t k);

struct SamplerSummary {
    std::size_t superbatches = 0;
    std::size_t samples_seen = 0;
    std::size_t samples_selected = 0;
    std::vector<std::size_t> selected_per_epoch;
    double wall_seconds = 0.0;
};

/// Raised when the sink fails mid-run; carries the progress made so far.
class SamplerAborted : public IoError {
public:
    SamplerAborted(const std::string& what, SamplerSummary partial) : IoError(what), partial_(std::move(partial)) {}
    [[nodiscard]] const SamplerSummary& partial() const noexcept { return partial_; }

private:
    SamplerSummary partial_;
};

/// Observer invoked after each batch is emitted; used by diagnostics and tests.
using BatchObserver = std::function<void(const Superbatch&, const SelectedBatch&)>;

/// Splits the stream into superbatches, selects a sub-batch from each and
/// writes it to the sink, for every epoch. Throws DataError on an empty
/// stream and SamplerAborted when the sink fails.
SamplerSummary run_sampler(AnnotationSource& stream, const SamplerConfig& config, const ScoringStrategy& strategy,
                           BatchSink& sink, const BatchObserver& observer = {});

}  // namespace cbs
