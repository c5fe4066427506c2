#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cbs {

/// Index of a concept in a ConceptVocabulary.
struct ConceptId {
    std::uint32_t value = 0;

    constexpr ConceptId() = default;
    constexpr explicit ConceptId(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(ConceptId, ConceptId) = default;
};

struct VocabularyEntry {
    std::string name;
    std::uint64_t global_count = 0;

    friend bool operator==(const VocabularyEntry&, const VocabularyEntry&) = default;
};

/// Immutable-after-construction concept vocabulary.
///
/// Names are stored in canonical form (see normalize_name) and must be unique
/// after normalization. Ids are dense and follow insertion order.
class ConceptVocabulary {
public:
    ConceptVocabulary() = default;

    /// Normalizes each name; throws DataError on a duplicate canonical name.
    explicit ConceptVocabulary(std::vector<VocabularyEntry> entries);

    /// Reads `<canonical name>\t<global_count>` lines ordered by id.
    static ConceptVocabulary load(const std::filesystem::path& path);
    static ConceptVocabulary parse(std::istream& in);
    void write(std::ostream& out) const;

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] bool contains(ConceptId id) const noexcept { return id.value < entries_.size(); }

    [[nodiscard]] const VocabularyEntry& entry(ConceptId id) const;
    [[nodiscard]] const std::string& name(ConceptId id) const { return entry(id).name; }
    [[nodiscard]] const std::vector<VocabularyEntry>& entries() const noexcept { return entries_; }

    /// Looks up a name after normalizing it.
    [[nodiscard]] std::optional<ConceptId> find(std::string_view name) const;

private:
    std::vector<VocabularyEntry> entries_;
    std::unordered_map<std::string, ConceptId> name_index_;
};

}  // namespace cbs

template <>
struct std::hash<cbs::ConceptId> {
    std::size_t operator()(cbs::ConceptId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
