#pragma once

#include "cbs/annotation.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace cbs {

/// Long-tailed concept pool: concept ranks follow a Zipf law and each sample
/// carries 1 + Poisson(extra_mean) concept instances.
struct ZipfPoolConfig {
    std::size_t samples = 100000;
    std::size_t concepts = 2000;
    double exponent = 1.2;
    double extra_mean = 2.0;  // median multiplicity 3
    std::uint64_t seed = 0;
    bool captions = false;
};

/// Names "concept 0", "concept 1", ... with Zipf expected counts.
ConceptVocabulary synthetic_vocabulary(const ZipfPoolConfig& config);

std::vector<SampleAnnotation> zipf_pool(const ZipfPoolConfig& config);

/// Zipf rank sampler over [0, n) by inverse CDF.
class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double exponent);
    std::size_t operator()(std::mt19937_64& rng) const;

private:
    std::vector<double> cdf_;
};

/// Uniform in [0, 1) from the top 53 bits.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace cbs
