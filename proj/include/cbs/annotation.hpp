#pragma once

#include "cbs/vocabulary.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cbs {

/// Axis-aligned box in normalized image coordinates.
struct BoundingBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;
    ConceptId concept_id{};
    double score = 0.0;

    [[nodiscard]] double area() const noexcept;
    [[nodiscard]] bool valid() const noexcept;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One detected instance of a concept inside a sample.
struct ConceptInstance {
    ConceptId concept_id{};
    double confidence = 0.0;
    std::optional<std::array<double, 4>> box;

    friend bool operator==(const ConceptInstance&, const ConceptInstance&) = default;
};

/// A single image-text record with its concept annotations.
///
/// `concepts` keeps one entry per detected instance, so repeats are allowed.
/// concept_set() is the de-duplicated view used for diversity scoring.
struct SampleAnnotation {
    std::string sample_id;
    std::vector<ConceptInstance> concepts;
    std::optional<std::string> caption;
    std::optional<std::string> recaption;

    /// Sorted, de-duplicated concept ids.
    [[nodiscard]] std::vector<ConceptId> concept_set() const;
    [[nodiscard]] std::vector<BoundingBox> boxes() const;

    friend bool operator==(const SampleAnnotation&, const SampleAnnotation&) = default;
};

struct IngestIssue {
    enum class Kind { malformed, unknown_concept };

    std::size_t line = 0;  // 1-based
    Kind kind = Kind::malformed;
    std::string message;
};

/// Pull-based stream of annotations; rewind() restarts from the beginning.
class AnnotationSource {
public:
    virtual ~AnnotationSource() = default;
    virtual std::optional<SampleAnnotation> next() = 0;
    virtual void rewind() = 0;
};

/// Parses one record. Returns nullopt and appends a malformed issue when the
/// line cannot be decoded; unknown concept names are reported and skipped.
std::optional<SampleAnnotation> parse_annotation_line(std::string_view line, const ConceptVocabulary& vocab,
                                                      std::size_t line_no, std::vector<IngestIssue>& issues);

/// Inverse of parse_annotation_line for well-formed records.
std::string serialize_annotation(const SampleAnnotation& sample, const ConceptVocabulary& vocab);

/// Newline-delimited JSON annotation reader.
///
/// The vocabulary must outlive the reader. Records with errors are skipped and
/// reported through issues() and the optional handler; reading continues.
class AnnotationReader final : public AnnotationSource {
public:
    using IssueHandler = std::function<void(const IngestIssue&)>;

    /// Throws IoError when the file cannot be opened.
    AnnotationReader(std::filesystem::path path, const ConceptVocabulary& vocab, std::size_t start_line = 0);

    std::optional<SampleAnnotation> next() override;

    /// Restarts at the line offset given at construction.
    void rewind() override;

    /// Positions the stream so the next record read is at 0-based line `line`.
    void seek_line(std::size_t line);

    [[nodiscard]] std::size_t next_line() const noexcept { return line_; }
    [[nodiscard]] const std::vector<IngestIssue>& issues() const noexcept { return issues_; }
    void set_issue_handler(IssueHandler handler) { handler_ = std::move(handler); }

private:
    std::filesystem::path path_;
    const ConceptVocabulary* vocab_;
    std::size_t start_line_;
    std::ifstream in_;
    std::size_t line_ = 0;
    std::string buffer_;
    std::vector<IngestIssue> issues_;
    IssueHandler handler_;
};

/// In-memory source over an owned vector.
class MemorySource final : public AnnotationSource {
public:
    explicit MemorySource(std::vector<SampleAnnotation> samples) : samples_(std::move(samples)) {}

    std::optional<SampleAnnotation> next() override;
    void rewind() override { pos_ = 0; }

    [[nodiscard]] const std::vector<SampleAnnotation>& samples() const noexcept { return samples_; }

private:
    std::vector<SampleAnnotation> samples_;
    std::size_t pos_ = 0;
};

/// Drains a source into a vector.
std::vector<SampleAnnotation> read_all(AnnotationSource& source);

}  // namespace cbs
