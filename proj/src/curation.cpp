#include "cbs/curation.hpp"

#include "cbs/error.hpp"

#include <algorithm>

namespace cbs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace

double keep_draw(std::uint64_t seed, std::string_view sample_id) {
    const std::uint64_t bits = splitmix64(splitmix64(seed) ^ fnv1a64(sample_id));
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double keep_probability(const std::vector<ConceptId>& concept_set,
                        const std::map<ConceptId, std::uint64_t>& frequency, std::uint64_t threshold) {
    double p = 0.0;
    for (const auto id : concept_set) {
        const auto it = frequency.find(id);
        const std::uint64_t f = it == frequency.end() ? 0 : it->second;
        if (f <= threshold) return 1.0;
        p = std::max(p, static_cast<double>(threshold) / static_cast<double>(f));
    }
    return p;
}

CurationResult metaclip_curate(AnnotationSource& stream, const CurationConfig& config) {
    if (config.per_concept_threshold == 0) throw ConfigError("per-concept threshold must be at least 1");

    CurationResult result;
    auto& report = result.report;

    stream.rewind();
    while (auto s = stream.next()) {
        ++report.input_samples;
        for (const auto id : s->concept_set()) ++report.before[id];
    }
    if (report.input_samples == 0) throw DataError("curation: annotation stream is empty");

    stream.rewind();
    while (auto s = stream.next()) {
        const auto set = s->concept_set();
        if (set.empty()) {
            ++report.dropped_unannotated;
            continue;
        }
        const double p = keep_probability(set, report.before, config.per_concept_threshold);
        if (p < 1.0 && keep_draw(config.seed, s->sample_id) >= p) continue;
        ++report.kept;
        for (const auto id : set) ++report.after[id];
        result.kept_ids.push_back(std::move(s->sample_id));
    }
    return result;
}

}  // namespace cbs
