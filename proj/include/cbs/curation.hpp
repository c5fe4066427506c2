#pragma once

#include "cbs/annotation.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cbs {

struct CurationConfig {
    std::uint64_t per_concept_threshold = 70000;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> target_size;  // informational only
};

struct CurationReport {
    std::uint64_t input_samples = 0;
    std::uint64_t kept = 0;
    std::uint64_t dropped_unannotated = 0;
    /// Samples containing each concept, before and after curation.
    std::map<ConceptId, std::uint64_t> before;
    std::map<ConceptId, std::uint64_t> after;
};

struct CurationResult {
    std::vector<std::string> kept_ids;
    CurationReport report;
};

/// Uniform value in [0, 1) derived from (seed, sample id).
double keep_draw(std::uint64_t seed, std::string_view sample_id);

/// max over the sample's concepts of min(1, t / F_c); 0 for no concepts.
double keep_probability(const std::vector<ConceptId>& concept_set,
                        const std::map<ConceptId, std::uint64_t>& frequency, std::uint64_t threshold);

/// Two passes over the stream: concept frequencies, then seeded Bernoulli
/// keep decisions. Throws DataError on an empty stream.
CurationResult metaclip_curate(AnnotationSource& stream, const CurationConfig& config);

}  // namespace cbs
