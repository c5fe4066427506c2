#pragma once

#include "cbs/annotation.hpp"
#include "cbs/normalize.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbs {

/// Concept histogram of a sub-batch over de-duplicated per-sample sets.
struct BatchComposition {
    std::size_t samples = 0;
    std::size_t unique_concepts = 0;
    std::map<ConceptId, std::uint64_t> concept_histogram;
    std::uint64_t max_frequency = 0;
    double entropy = 0.0;  // natural log
};

class CompositionBuilder {
public:
    void add(const SampleAnnotation& sample);
    [[nodiscard]] BatchComposition finish() const;

private:
    std::size_t samples_ = 0;
    std::map<ConceptId, std::uint64_t> histogram_;
};

BatchComposition batch_composition(std::span<const SampleAnnotation> samples);

/// Dataset-wide instance counts. Accumulators can be merged across shards.
struct DatasetProfile {
    std::uint64_t samples = 0;
    std::uint64_t total_annotations = 0;
    std::map<ConceptId, std::uint64_t> per_concept_counts;
    std::map<std::size_t, std::uint64_t> multiplicity_histogram;

    void add(const SampleAnnotation& sample);
    void merge(const DatasetProfile& other);

    /// Median over concepts that occur at least once.
    [[nodiscard]] double median_concept_count() const;
    [[nodiscard]] double median_multiplicity() const;

    friend bool operator==(const DatasetProfile&, const DatasetProfile&) = default;
};

DatasetProfile dataset_profile(AnnotationSource& stream);

enum class CaptionField { caption, recaption };

/// Throws ConfigError for anything other than "caption" or "recaption".
CaptionField parse_caption_field(std::string_view name);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - levenshtein / max length; 1 for two empty strings.
double name_similarity(std::string_view a, std::string_view b);

/// Surface forms searched in captions: canonical, lemma, +s plural, gerund.
std::vector<std::string> concept_forms(std::string_view canonical, const PluralRules& rules = PluralRules::builtin());

/// Lowercased caption tokens with punctuation stripped.
std::vector<std::string> caption_tokens(std::string_view caption);

/// Percentages over (sample, distinct concept) pairs.
struct AdherenceReport {
    std::size_t corpus_size = 0;
    std::size_t pairs = 0;
    double exact_match_pct = 0.0;
    std::map<double, double> partial_match_pct;
};

AdherenceReport concept_adherence(std::span<const SampleAnnotation> samples, const ConceptVocabulary& vocab,
                                  CaptionField field, std::span<const double> taus,
                                  const PluralRules& rules = PluralRules::builtin());

/// Population statistics of whitespace word counts; missing captions count 0.
struct WordCountStats {
    std::size_t samples = 0;
    double median = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    std::map<std::size_t, std::uint64_t> histogram;
};

std::size_t word_count(std::string_view text);
WordCountStats word_count_stats(std::span<const SampleAnnotation> samples, CaptionField field);

nlohmann::ordered_json to_json(const BatchComposition& c, const ConceptVocabulary& vocab);
nlohmann::ordered_json to_json(const DatasetProfile& p, const ConceptVocabulary& vocab);
nlohmann::ordered_json to_json(const AdherenceReport& r);
nlohmann::ordered_json to_json(const WordCountStats& s);

/// `key,count` CSV with a header row.
void write_histogram_csv(std::ostream& out, std::string_view key_name,
                         const std::vector<std::pair<std::string, std::uint64_t>>& rows);

}  // namespace cbs
