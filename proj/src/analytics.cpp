#include "cbs/analytics.hpp"

#include "cbs/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace cbs {

void CompositionBuilder::add(const SampleAnnotation& sample) {
    ++samples_;
    for (const auto id : sample.concept_set()) ++histogram_[id];
}

BatchComposition CompositionBuilder::finish() const {
    BatchComposition c;
    c.samples = samples_;
    c.concept_histogram = histogram_;
    c.unique_concepts = histogram_.size();
    std::uint64_t total = 0;
    for (const auto& [id, n] : histogram_) {
        total += n;
        c.max_frequency = std::max(c.max_frequency, n);
    }
    for (const auto& [id, n] : histogram_) {
        const double p = static_cast<double>(n) / static_cast<double>(total);
        c.entropy -= p * std::log(p);
    }
    return c;
}

BatchComposition batch_composition(std::span<const SampleAnnotation> samples) {
    CompositionBuilder builder;
    for (const auto& s : samples) builder.add(s);
    return builder.finish();
}

void DatasetProfile::add(const SampleAnnotation& sample) {
    ++samples;
    total_annotations += sample.concepts.size();
    for (const auto& c : sample.concepts) ++per_concept_counts[c.concept_id];
    ++multiplicity_histogram[sample.concepts.size()];
}

void DatasetProfile::merge(const DatasetProfile& other) {
    samples += other.samples;
    total_annotations += other.total_annotations;
    for (const auto& [id, n] : other.per_concept_counts) per_concept_counts[id] += n;
    for (const auto& [k, n] : other.multiplicity_histogram) multiplicity_histogram[k] += n;
}

namespace {

// Median of a sorted sequence given as (value, count) runs.
template <typename Map>
double median_of_histogram(const Map& hist, std::uint64_t total) {
    if (total == 0) return 0.0;
    const std::uint64_t lo = (total - 1) / 2;
    const std::uint64_t hi = total / 2;
    double lo_value = 0.0, hi_value = 0.0;
    std::uint64_t seen = 0;
    for (const auto& [value, count] : hist) {
        const auto next = seen + count;
        if (lo >= seen && lo < next) lo_value = static_cast<double>(value);
        if (hi >= seen && hi < next) {
            hi_value = static_cast<double>(value);
            break;
        }
        seen = next;
    }
    return (lo_value + hi_value) / 2.0;
}

}  // namespace

double DatasetProfile::median_concept_count() const {
    std::map<std::uint64_t, std::uint64_t> counts;
    for (const auto& [id, n] : per_concept_counts) ++counts[n];
    return median_of_histogram(counts, per_concept_counts.size());
}

double DatasetProfile::median_multiplicity() const { return median_of_histogram(multiplicity_histogram, samples); }

DatasetProfile dataset_profile(AnnotationSource& stream) {
    DatasetProfile p;
    while (auto s = stream.next()) p.add(*s);
    return p;
}

CaptionField parse_caption_field(std::string_view name) {
    if (name == "caption") return CaptionField::caption;
    if (name == "recaption") return CaptionField::recaption;
    throw ConfigError("unknown caption field '" + std::string(name) + "' (expected caption or recaption)");
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double name_similarity(std::string_view a, std::string_view b) {
    const auto longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

std::vector<std::string> caption_tokens(std::string_view caption) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : caption) {
        const auto u = static_cast<unsigned char>(c);
        const bool keep = std::isalnum(u) || c == '\'' || c == '-' || u >= 0x80;
        if (keep) {
            cur.push_back(static_cast<char>(u < 0x80 ? std::tolower(u) : u));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

namespace {

std::string gerund(const std::string& word) {
    if (word.size() > 2 && word.ends_with("ie")) return word.substr(0, word.size() - 2) + "ying";
    if (word.size() > 2 && word.ends_with('e') && !word.ends_with("ee")) return word.substr(0, word.size() - 1) + "ing";
    return word + "ing";
}

std::string join(const std::vector<std::string>& tokens, std::size_t first, std::size_t count) {
    std::string out;
    for (std::size_t i = first; i < first + count; ++i) {
        if (i > first) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace

std::vector<std::string> concept_forms(std::string_view canonical, const PluralRules& rules) {
    const std::string name(canonical);
    const std::string lemma = rules.lemmatize(name);
    std::vector<std::string> forms{name, lemma, name + "s", gerund(lemma)};
    std::vector<std::string> unique;
    for (auto& f : forms) {
        if (!f.empty() && std::find(unique.begin(), unique.end(), f) == unique.end()) unique.push_back(std::move(f));
    }
    return unique;
}

AdherenceReport concept_adherence(std::span<const SampleAnnotation> samples, const ConceptVocabulary& vocab,
                                  CaptionField field, std::span<const double> taus, const PluralRules& rules) {
    for (const double tau : taus) {
        if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("adherence thresholds must lie in (0, 1]");
    }
    AdherenceReport report;
    report.corpus_size = samples.size();
    std::size_t exact = 0;
    std::vector<std::size_t> partial(taus.size(), 0);

    for (const auto& s : samples) {
        const auto& text = field == CaptionField::caption ? s.caption : s.recaption;
        const auto tokens = caption_tokens(text ? normalize_name(*text) : std::string{});
        for (const auto id : s.concept_set()) {
            ++report.pairs;
            const auto name_tokens = caption_tokens(vocab.name(id));
            if (!name_tokens.empty() && tokens.size() >= name_tokens.size()) {
                for (std::size_t i = 0; i + name_tokens.size() <= tokens.size(); ++i) {
                    if (std::equal(name_tokens.begin(), name_tokens.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
                        ++exact;
                        break;
                    }
                }
            }

            double best = 0.0;
            for (const auto& form : concept_forms(vocab.name(id), rules)) {
                const auto form_tokens = caption_tokens(form);
                const auto width = form_tokens.size();
                if (width == 0 || tokens.size() < width) continue;
                const auto joined = join(form_tokens, 0, width);
                for (std::size_t i = 0; i + width <= tokens.size(); ++i)
                    best = std::max(best, name_similarity(joined, join(tokens, i, width)));
            }
            for (std::size_t k = 0; k < taus.size(); ++k) {
                if (best >= taus[k]) ++partial[k];
            }
        }
    }

    const auto pct = [&](std::size_t n) {
        return report.pairs == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(report.pairs);
    };
    report.exact_match_pct = pct(exact);
    for (std::size_t k = 0; k < taus.size(); ++k) report.partial_match_pct[taus[k]] = pct(partial[k]);
    return report;
}

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

WordCountStats word_count_stats(std::span<const SampleAnnotation> samples, CaptionField field) {
    WordCountStats st;
    st.samples = samples.size();
    if (samples.empty()) return st;
    double sum = 0.0;
    std::vector<std::size_t> counts;
    counts.reserve(samples.size());
    for (const auto& s : samples) {
        const auto& text = field == CaptionField::caption ? s.caption : s.recaption;
        const auto n = text ? word_count(*text) : 0;
        counts.push_back(n);
        ++st.histogram[n];
        sum += static_cast<double>(n);
    }
    st.mean = sum / static_cast<double>(counts.size());
    double sq = 0.0;
    for (const auto n : counts) sq += (static_cast<double>(n) - st.mean) * (static_cast<double>(n) - st.mean);
    st.stddev = std::sqrt(sq / static_cast<double>(counts.size()));
    st.median = median_of_histogram(st.histogram, counts.size());
    return st;
}

namespace {

nlohmann::ordered_json ranked_counts(const std::map<ConceptId, std::uint64_t>& counts, const ConceptVocabulary& vocab) {
    std::vector<std::pair<ConceptId, std::uint64_t>> rows(counts.begin(), counts.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    auto out = nlohmann::ordered_json::array();
    for (const auto& [id, n] : rows) out.push_back({{"concept", vocab.name(id)}, {"count", n}});
    return out;
}

template <typename Map>
nlohmann::ordered_json keyed_histogram(const Map& hist) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (const auto& [k, n] : hist) out[std::to_string(k)] = n;
    return out;
}

}  // namespace

nlohmann::ordered_json to_json(const BatchComposition& c, const ConceptVocabulary& vocab) {
    nlohmann::ordered_json j;
    j["samples"] = c.samples;
    j["unique_concepts"] = c.unique_concepts;
    j["max_frequency"] = c.max_frequency;
    j["entropy"] = c.entropy;
    j["histogram"] = ranked_counts(c.concept_histogram, vocab);
    return j;
}

nlohmann::ordered_json to_json(const DatasetProfile& p, const ConceptVocabulary& vocab) {
    nlohmann::ordered_json j;
    j["samples"] = p.samples;
    j["total_annotations"] = p.total_annotations;
    j["distinct_concepts"] = p.per_concept_counts.size();
    j["median_concept_count"] = p.median_concept_count();
    j["median_multiplicity"] = p.median_multiplicity();
    j["multiplicity_histogram"] = keyed_histogram(p.multiplicity_histogram);
    j["per_concept_counts"] = ranked_counts(p.per_concept_counts, vocab);
    return j;
}

nlohmann::ordered_json to_json(const AdherenceReport& r) {
    nlohmann::ordered_json j;
    j["corpus_size"] = r.corpus_size;
    j["pairs"] = r.pairs;
    j["exact_match_pct"] = r.exact_match_pct;
    nlohmann::ordered_json partial = nlohmann::ordered_json::object();
    for (const auto& [tau, pct] : r.partial_match_pct) {
        char key[32];
        std::snprintf(key, sizeof key, "%g", tau);
        partial[key] = pct;
    }
    j["partial_match_pct"] = partial;
    return j;
}

nlohmann::ordered_json to_json(const WordCountStats& s) {
    nlohmann::ordered_json j;
    j["samples"] = s.samples;
    j["median"] = s.median;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    j["histogram"] = keyed_histogram(s.histogram);
    return j;
}

void write_histogram_csv(std::ostream& out, std::string_view key_name,
                         const std::vector<std::pair<std::string, std::uint64_t>>& rows) {
    out << key_name << ",count\n";
    for (const auto& [key, n] : rows) {
        const bool quote = key.find_first_of(",\"\n") != std::string::npos;
        if (quote) {
            out << '"';
            for (char c : key) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        } else {
            out << key;
        }
        out << ',' << n << '\n';
    }
}

}  // namespace cbs
