#include "cbs/vocabulary.hpp"

#include "cbs/error.hpp"
#include "cbs/normalize.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace cbs {

ConceptVocabulary::ConceptVocabulary(std::vector<VocabularyEntry> entries) : entries_(std::move(entries)) {
    name_index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto& e = entries_[i];
        e.name = normalize_name(e.name);
        if (e.name.empty()) throw DataError("vocabulary entry " + std::to_string(i) + " has an empty name");
        const auto [it, inserted] = name_index_.emplace(e.name, ConceptId(static_cast<std::uint32_t>(i)));
        if (!inserted) {
            throw DataError("duplicate concept name '" + e.name + "' at ids " + std::to_string(it->second.value) +
                            " and " + std::to_string(i));
        }
    }
}

ConceptVocabulary ConceptVocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vocabulary file " + path.string());
    return parse(in);
}

ConceptVocabulary ConceptVocabulary::parse(std::istream& in) {
    std::vector<VocabularyEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        if (tab == std::string::npos)
            throw DataError("vocabulary line " + std::to_string(line_no) + ": expected <name>\\t<count>");
        VocabularyEntry e;
        e.name = line.substr(0, tab);
        const char* first = line.data() + tab + 1;
        const char* last = line.data() + line.size();
        const auto [ptr, ec] = std::from_chars(first, last, e.global_count);
        if (ec != std::errc{} || ptr != last)
            throw DataError("vocabulary line " + std::to_string(line_no) + ": bad count");
        entries.push_back(std::move(e));
    }
    return ConceptVocabulary(std::move(entries));
}

void ConceptVocabulary::write(std::ostream& out) const {
    for (const auto& e : entries_) out << e.name << '\t' << e.global_count << '\n';
}

const VocabularyEntry& ConceptVocabulary::entry(ConceptId id) const {
    if (!contains(id)) throw DataError("concept id " + std::to_string(id.value) + " out of range");
    return entries_[id.value];
}

std::optional<ConceptId> ConceptVocabulary::find(std::string_view name) const {
    auto it = name_index_.find(std::string(name));
    if (it == name_index_.end()) it = name_index_.find(normalize_name(name));
    if (it == name_index_.end()) return std::nullopt;
    return it->second;
}

}  // namespace cbs
