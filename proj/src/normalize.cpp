#include "cbs/normalize.hpp"

#include "cbs/error.hpp"

#include <fstream>
#include <sstream>

namespace cbs {

namespace detail {
extern const char* const kPluralExceptionTable;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// ASCII apostrophe and U+2019 in UTF-8.
constexpr std::string_view kApostrophes[] = {"'", "\xE2\x80\x99"};

std::string strip_possessive(std::string token) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto apo : kApostrophes) {
            const std::string with_s = std::string(apo) + "s";
            if (token.size() > with_s.size() && ends_with(token, with_s)) {
                token.resize(token.size() - with_s.size());
                changed = true;
            } else if (token.size() > apo.size() + 1 && ends_with(token, apo) &&
                       token[token.size() - apo.size() - 1] == 's') {
                token.resize(token.size() - apo.size());
                changed = true;
            }
        }
    }
    return token;
}

}  // namespace

std::string normalize_name(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (c == '_') c = ' ';
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        out.push_back(c);
    }
    return out;
}

const PluralRules& PluralRules::builtin() {
    static const PluralRules rules = [] {
        std::istringstream in(detail::kPluralExceptionTable);
        return parse(in);
    }();
    return rules;
}

PluralRules PluralRules::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open plural exception table " + path.string());
    return parse(in);
}

PluralRules PluralRules::parse(std::istream& in) {
    PluralRules rules;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            rules.invariant_.insert(normalize_name(line));
        } else {
            if (line.find('\t', tab + 1) != std::string::npos)
                throw DataError("plural table line " + std::to_string(line_no) + ": expected at most two fields");
            rules.irregular_[normalize_name(line.substr(0, tab))] = normalize_name(line.substr(tab + 1));
        }
    }
    for (const auto& [plural, singular] : rules.irregular_) {
        if (rules.lemmatize_token(singular) != singular)
            throw DataError("plural table: singular '" + singular + "' for '" + plural + "' is not a fixed point");
    }
    return rules;
}

std::string PluralRules::lemmatize_token(std::string token) const {
    token = strip_possessive(std::move(token));
    if (const auto it = irregular_.find(token); it != irregular_.end()) return it->second;
    if (invariant_.contains(token) || token.size() <= 3) return token;
    if (ends_with(token, "ss") || ends_with(token, "us") || ends_with(token, "is")) return token;

    if (token.size() > 4 && ends_with(token, "ies")) {
        token.resize(token.size() - 3);
        token.push_back('y');
    } else if (ends_with(token, "sses") || ends_with(token, "ches") || ends_with(token, "shes") ||
               ends_with(token, "xes") || ends_with(token, "zzes")) {
        token.resize(token.size() - 2);
    } else if (ends_with(token, "s")) {
        token.pop_back();
    } else {
        return token;
    }
    // "mens" -> "men" -> "man" keeps the rules idempotent.
    if (const auto it = irregular_.find(token); it != irregular_.end()) return it->second;
    return token;
}

std::string PluralRules::lemmatize(std::string_view name) const {
    std::string out;
    out.reserve(name.size());
    std::size_t pos = 0;
    while (pos <= name.size()) {
        const auto space = name.find(' ', pos);
        const auto end = space == std::string_view::npos ? name.size() : space;
        if (end > pos) {
            if (!out.empty()) out.push_back(' ');
            out += lemmatize_token(std::string(name.substr(pos, end - pos)));
        }
        if (space == std::string_view::npos) break;
        pos = space + 1;
    }
    return out;
}

}  // namespace cbs
