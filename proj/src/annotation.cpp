#include "cbs/annotation.hpp"

#include "cbs/error.hpp"
#include "cbs/log.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace cbs {

using nlohmann::json;

double BoundingBox::area() const noexcept { return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1); }

bool BoundingBox::valid() const noexcept {
    const auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    return unit(x1) && unit(y1) && unit(x2) && unit(y2) && x1 <= x2 && y1 <= y2 && unit(score);
}

std::vector<ConceptId> SampleAnnotation::concept_set() const {
    std::vector<ConceptId> ids;
    ids.reserve(concepts.size());
    for (const auto& c : concepts) ids.push_back(c.concept_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::vector<BoundingBox> SampleAnnotation::boxes() const {
    std::vector<BoundingBox> out;
    for (const auto& c : concepts) {
        if (!c.box) continue;
        const auto& b = *c.box;
        out.push_back({b[0], b[1], b[2], b[3], c.concept_id, c.confidence});
    }
    return out;
}

namespace {

std::optional<std::string> optional_string(const json& obj, const char* key, std::string& error) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) {
        error = std::string("field \"") + key + "\" must be a string";
        return std::nullopt;
    }
    return it->get<std::string>();
}

}  // namespace

std::optional<SampleAnnotation> parse_annotation_line(std::string_view line, const ConceptVocabulary& vocab,
                                                      std::size_t line_no, std::vector<IngestIssue>& issues) {
    const auto fail = [&](std::string message) -> std::optional<SampleAnnotation> {
        issues.push_back({line_no, IngestIssue::Kind::malformed, std::move(message)});
        return std::nullopt;
    };

    const json doc = json::parse(line.begin(), line.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return fail("not a JSON object");

    SampleAnnotation sample;
    const auto id = doc.find("id");
    if (id == doc.end() || !id->is_string()) return fail("missing string field \"id\"");
    sample.sample_id = id->get<std::string>();

    std::string error;
    sample.caption = optional_string(doc, "caption", error);
    sample.recaption = optional_string(doc, "recaption", error);
    if (!error.empty()) return fail(error);

    const auto concepts = doc.find("concepts");
    if (concepts == doc.end() || !concepts->is_array()) return fail("missing array field \"concepts\"");
    sample.concepts.reserve(concepts->size());
    for (const auto& entry : *concepts) {
        if (!entry.is_object()) return fail("concept entry is not an object");
        const auto name = entry.find("name");
        const auto score = entry.find("score");
        if (name == entry.end() || !name->is_string()) return fail("concept entry without string \"name\"");
        if (score == entry.end() || !score->is_number()) return fail("concept entry without numeric \"score\"");

        ConceptInstance inst;
        inst.confidence = score->get<double>();
        if (!(inst.confidence >= 0.0 && inst.confidence <= 1.0)) return fail("concept score outside [0, 1]");

        if (const auto box = entry.find("box"); box != entry.end() && !box->is_null()) {
            if (!box->is_array() || box->size() != 4) return fail("box must be [x1, y1, x2, y2]");
            std::array<double, 4> coords{};
            for (std::size_t k = 0; k < 4; ++k) {
                if (!(*box)[k].is_number()) return fail("box coordinate is not a number");
                coords[k] = (*box)[k].get<double>();
            }
            const BoundingBox check{coords[0], coords[1], coords[2], coords[3], {}, inst.confidence};
            if (!check.valid()) return fail("box is not a normalized [x1, y1, x2, y2] with x1<=x2, y1<=y2");
            inst.box = coords;
        }

        const auto& raw_name = name->get_ref<const std::string&>();
        const auto cid = vocab.find(raw_name);
        if (!cid) {
            issues.push_back({line_no, IngestIssue::Kind::unknown_concept, "unknown concept '" + raw_name + "'"});
            continue;
        }
        inst.concept_id = *cid;
        sample.concepts.push_back(std::move(inst));
    }
    return sample;
}

std::string serialize_annotation(const SampleAnnotation& sample, const ConceptVocabulary& vocab) {
    nlohmann::ordered_json doc;
    doc["id"] = sample.sample_id;
    auto& concepts = doc["concepts"] = nlohmann::ordered_json::array();
    for (const auto& c : sample.concepts) {
        nlohmann::ordered_json entry;
        entry["name"] = vocab.name(c.concept_id);
        entry["score"] = c.confidence;
        if (c.box) entry["box"] = *c.box;
        concepts.push_back(std::move(entry));
    }
    if (sample.caption) doc["caption"] = *sample.caption;
    if (sample.recaption) doc["recaption"] = *sample.recaption;
    return doc.dump();
}

AnnotationReader::AnnotationReader(std::filesystem::path path, const ConceptVocabulary& vocab, std::size_t start_line)
    : path_(std::move(path)), vocab_(&vocab), start_line_(start_line) {
    rewind();
}

void AnnotationReader::rewind() { seek_line(start_line_); }

void AnnotationReader::seek_line(std::size_t line) {
    in_.close();
    in_.clear();
    in_.open(path_, std::ios::binary);
    if (!in_) throw IoError("cannot open annotation file " + path_.string());
    line_ = 0;
    while (line_ < line && std::getline(in_, buffer_)) ++line_;
}

std::optional<SampleAnnotation> AnnotationReader::next() {
    while (std::getline(in_, buffer_)) {
        ++line_;
        if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
        if (buffer_.empty()) continue;
        const auto before = issues_.size();
        auto sample = parse_annotation_line(buffer_, *vocab_, line_, issues_);
        for (auto i = before; i < issues_.size(); ++i) {
            const auto& issue = issues_[i];
            log().debug("{}:{}: {}", path_.string(), issue.line, issue.message);
            if (handler_) handler_(issue);
        }
        if (sample) return sample;
    }
    if (in_.bad()) throw IoError("read error on " + path_.string());
    return std::nullopt;
}

std::optional<SampleAnnotation> MemorySource::next() {
    if (pos_ >= samples_.size()) return std::nullopt;
    return samples_[pos_++];
}

std::vector<SampleAnnotation> read_all(AnnotationSource& source) {
    std::vector<SampleAnnotation> out;
    while (auto s = source.next()) out.push_back(std::move(*s));
    return out;
}

}  // namespace cbs
