#include "cbs/synthetic.hpp"

#include "cbs/error.hpp"

#include <algorithm>
#include <cmath>

namespace cbs {

ZipfSampler::ZipfSampler(std::size_t n, double exponent) {
    if (n == 0) throw ConfigError("Zipf sampler needs at least one rank");
    cdf_.reserve(n);
    double total = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        total += std::pow(static_cast<double>(k), -exponent);
        cdf_.push_back(total);
    }
    for (auto& v : cdf_) v /= total;
    cdf_.back() = 1.0;
}

std::size_t ZipfSampler::operator()(std::mt19937_64& rng) const {
    const double u = unit_draw(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

namespace {

// Knuth's multiplication method; adequate for the small means used here.
std::size_t poisson(std::mt19937_64& rng, double mean) {
    const double limit = std::exp(-mean);
    std::size_t k = 0;
    double p = unit_draw(rng);
    while (p > limit) {
        ++k;
        p *= unit_draw(rng);
    }
    return k;
}

std::string concept_name(std::size_t rank) { return "concept " + std::to_string(rank); }

}  // namespace

ConceptVocabulary synthetic_vocabulary(const ZipfPoolConfig& config) {
    std::vector<VocabularyEntry> entries;
    entries.reserve(config.concepts);
    double norm = 0.0;
    for (std::size_t k = 1; k <= config.concepts; ++k) norm += std::pow(static_cast<double>(k), -config.exponent);
    const double instances = static_cast<double>(config.samples) * (1.0 + config.extra_mean);
    for (std::size_t k = 0; k < config.concepts; ++k) {
        const double expected = instances * std::pow(static_cast<double>(k + 1), -config.exponent) / norm;
        entries.push_back({concept_name(k), static_cast<std::uint64_t>(std::llround(expected))});
    }
    return ConceptVocabulary(std::move(entries));
}

std::vector<SampleAnnotation> zipf_pool(const ZipfPoolConfig& config) {
    const ZipfSampler ranks(config.concepts, config.exponent);
    std::mt19937_64 rng(config.seed);
    std::vector<SampleAnnotation> pool;
    pool.reserve(config.samples);
    for (std::size_t i = 0; i < config.samples; ++i) {
        SampleAnnotation s;
        s.sample_id = "s" + std::to_string(i);
        const std::size_t multiplicity = 1 + poisson(rng, config.extra_mean);
        s.concepts.reserve(multiplicity);
        for (std::size_t m = 0; m < multiplicity; ++m) {
            const auto rank = ranks(rng);
            // Two-decimal confidences keep serialized records short.
            const double confidence = std::round((0.5 + 0.5 * unit_draw(rng)) * 100.0) / 100.0;
            s.concepts.push_back({ConceptId(static_cast<std::uint32_t>(rank)), confidence, std::nullopt});
        }
        if (config.captions) {
            std::string caption = "a photo of";
            for (std::size_t m = 0; m < s.concepts.size(); ++m) {
                caption += m == 0 ? " " : " and ";
                caption += concept_name(s.concepts[m].concept_id.value);
            }
            s.caption = std::move(caption);
        }
        pool.push_back(std::move(s));
    }
    return pool;
}

}  // namespace cbs
