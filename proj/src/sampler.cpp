#include "cbs/sampler.hpp"

#include "cbs/batch_io.hpp"
#include "cbs/error.hpp"
#include "cbs/log.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

namespace cbs {

std::size_t sub_batch_size(std::size_t len, double filter_ratio) {
    if (len == 0) return 0;
    const auto b = static_cast<std::size_t>(std::floor((1.0 - filter_ratio) * static_cast<double>(len) + 0.5));
    return std::clamp<std::size_t>(b, 1, len);
}

void SamplerConfig::validate() const {
    if (superbatch_size == 0) throw ConfigError("superbatch size must be positive");
    if (!(filter_ratio >= 0.0 && filter_ratio < 1.0)) throw ConfigError("filter ratio must lie in [0, 1)");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (std::floor((1.0 - filter_ratio) * static_cast<double>(superbatch_size) + 0.5) < 1.0)
        throw ConfigError("filter ratio leaves an empty sub-batch for this superbatch size");
}

std::vector<double> ScoringStrategy::score(const Superbatch& /*batch*/) const {
    throw ConfigError("strategy '" + std::string(name()) + "' does not produce per-sample scores");
}

std::vector<std::size_t> ScoringStrategy::select(const Superbatch& batch, std::size_t b) const {
    const auto scores = score(batch);
    return select_topk(scores, b);
}

std::vector<std::size_t> select_topk(std::span<const double> scores, std::size_t k) {
    if (k > scores.size())
        throw ConfigError("top-k: k = " + std::to_string(k) + " exceeds " + std::to_string(scores.size()) + " scores");
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i])) throw DataError("top-k: NaN score at position " + std::to_string(i));
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto before = [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), before);
    order.resize(k);
    return order;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Unbiased draw in [0, n) independent of the standard library's distributions.
std::size_t draw_below(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = 0;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

/// One epoch's view of the stream: assigns ordinals and applies the optional
/// shuffle buffer.
class EpochReader {
public:
    EpochReader(AnnotationSource& stream, const SamplerConfig& config, std::size_t epoch)
        : stream_(stream), capacity_(config.shuffle_buffer), epoch_(epoch),
          rng_(splitmix64(config.seed ^ splitmix64(epoch + 1))) {}

    Superbatch read(std::size_t size) {
        Superbatch batch;
        batch.epoch = epoch_;
        batch.seq = seq_++;
        batch.samples.reserve(size);
        batch.origin_indices.reserve(size);
        while (batch.size() < size) {
            auto record = next_record();
            if (!record) break;
            batch.origin_indices.push_back(record->first);
            batch.samples.push_back(std::move(record->second));
        }
        return batch;
    }

private:
    std::optional<std::pair<std::size_t, SampleAnnotation>> next_record() {
        if (capacity_ == 0) {
            auto s = stream_.next();
            if (!s) return std::nullopt;
            return std::pair{ordinal_++, std::move(*s)};
        }
        while (!exhausted_ && buffer_.size() < capacity_) {
            auto s = stream_.next();
            if (!s) {
                exhausted_ = true;
                break;
            }
            buffer_.emplace_back(ordinal_++, std::move(*s));
        }
        if (buffer_.empty()) return std::nullopt;
        const auto j = draw_below(rng_, buffer_.size());
        std::swap(buffer_[j], buffer_.back());
        auto out = std::move(buffer_.back());
        buffer_.pop_back();
        return out;
    }

    AnnotationSource& stream_;
    std::size_t capacity_;
    std::size_t epoch_;
    std::mt19937_64 rng_;
    std::size_t ordinal_ = 0;
    std::size_t seq_ = 0;
    bool exhausted_ = false;
    std::vector<std::pair<std::size_t, SampleAnnotation>> buffer_;
};

SelectedBatch select_batch(const Superbatch& batch, const SamplerConfig& config, const ScoringStrategy& strategy) {
    const auto b = sub_batch_size(batch.size(), config.filter_ratio);
    std::vector<std::size_t> positions;
    if (strategy.stateful()) {
        positions = strategy.select(batch, b);
    } else {
        const auto scores = strategy.score(batch);
        if (scores.size() != batch.size())
            throw Error("strategy '" + std::string(strategy.name()) + "' returned the wrong number of scores");
        positions = select_topk(scores, b);
    }
    if (positions.size() != b)
        throw Error("strategy '" + std::string(strategy.name()) + "' selected " + std::to_string(positions.size()) +
                    " samples, expected " + std::to_string(b));

    SelectedBatch out;
    out.epoch = batch.epoch;
    out.batch_seq = batch.seq;
    out.strategy = std::string(strategy.name());
    out.indices.reserve(b);
    std::vector<bool> seen(batch.size(), false);
    for (const auto p : positions) {
        if (p >= batch.size() || seen[p]) throw Error("strategy returned an invalid or repeated position");
        seen[p] = true;
        out.indices.push_back(batch.origin_indices[p]);
    }
    return out;
}

}  // namespace

SamplerSummary run_sampler(AnnotationSource& stream, const SamplerConfig& config, const ScoringStrategy& strategy,
                           BatchSink& sink, const BatchObserver& observer) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    SamplerSummary summary;
    const auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        stream.rewind();
        EpochReader reader(stream, config, epoch);
        summary.selected_per_epoch.push_back(0);

        Superbatch current = reader.read(config.superbatch_size);
        if (current.empty()) throw DataError("annotation stream is empty");

        while (!current.empty()) {
            std::future<Superbatch> pending;
            if (config.prefetch)
                pending = std::async(std::launch::async, [&] { return reader.read(config.superbatch_size); });

            const SelectedBatch selected = select_batch(current, config, strategy);
            try {
                emit_batch(selected, sink);
            } catch (const std::exception& e) {
                if (pending.valid()) pending.wait();
                summary.wall_seconds = elapsed();
                throw SamplerAborted(std::string("batch sink failed: ") + e.what(), summary);
            }
            ++summary.superbatches;
            summary.samples_seen += current.size();
            summary.samples_selected += selected.indices.size();
            summary.selected_per_epoch.back() += selected.indices.size();
            if (observer) observer(current, selected);
            log().debug("epoch {} batch {}: selected {} of {}", epoch, selected.batch_seq, selected.indices.size(),
                        current.size());

            current = config.prefetch ? pending.get() : reader.read(config.superbatch_size);
        }
        try {
            sink.end_epoch(epoch);
        } catch (const std::exception& e) {
            summary.wall_seconds = elapsed();
            throw SamplerAborted(std::string("batch sink failed: ") + e.what(), summary);
        }
    }
    summary.wall_seconds = elapsed();
    return summary;
}

}  // namespace cbs
