#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace cbs {

/// Lowercases ASCII letters, maps '_' to ' ', collapses whitespace runs and
/// trims. Idempotent.
std::string normalize_name(std::string_view raw);

/// Suffix-stripping rules for English plural and possessive nouns.
///
/// The exception table has two kinds of lines: `plural<TAB>singular` for
/// irregular nouns and a bare word for nouns that must never be stripped
/// ("glass", "species"). Lines starting with '#' are comments.
class PluralRules {
public:
    PluralRules() = default;

    /// Table compiled from data/plural_exceptions.tsv.
    static const PluralRules& builtin();
    static PluralRules load(const std::filesystem::path& path);
    static PluralRules parse(std::istream& in);

    /// Applies the rules token by token. Input should already be normalized.
    [[nodiscard]] std::string lemmatize(std::string_view name) const;

    [[nodiscard]] std::size_t irregular_count() const noexcept { return irregular_.size(); }
    [[nodiscard]] std::size_t invariant_count() const noexcept { return invariant_.size(); }

private:
    [[nodiscard]] std::string lemmatize_token(std::string token) const;

    std::unordered_map<std::string, std::string> irregular_;
    std::unordered_set<std::string> invariant_;
};

inline std::string lemmatize_plural(std::string_view name, const PluralRules& rules = PluralRules::builtin()) {
    return rules.lemmatize(name);
}

}  // namespace cbs
