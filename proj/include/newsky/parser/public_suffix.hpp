#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

namespace newsky::parser {

// Public Suffix List matcher (normal, wildcard and exception rules, with the
// implicit "*" default rule). Hosts must already be lowercase.
class PublicSuffixList {
public:
    static PublicSuffixList parse(std::istream& in);
    static PublicSuffixList parse(std::string_view text);

    /// The snapshot compiled into the library.
    static const PublicSuffixList& bundled();
    static std::string_view bundled_version();

    /// Longest matching public suffix of `host`.
    std::string public_suffix(std::string_view host) const;

    /// Public suffix plus one label; nullopt when `host` is itself a suffix.
    std::optional<std::string> registrable_domain(std::string_view host) const;

    std::size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

private:
    std::unordered_set<std::string> rules_;
    std::unordered_set<std::string> wildcards_;   // stored without the "*."
    std::unordered_set<std::string> exceptions_;  // stored without the "!"
};

}  // namespace newsky::parser
