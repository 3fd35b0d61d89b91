#include "newsky/parser/public_suffix.hpp"

#include <unicode/idna.h>
#include <unicode/bytestream.h>

#include <memory>
#include <sstream>
#include <vector>

namespace newsky::parser {

// Generated at configure time from data/public_suffix_list.dat.
extern const char* const kBundledPublicSuffixList;

namespace {

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::vector<std::string_view> split_labels(std::string_view host) {
    std::vector<std::string_view> labels;
    std::size_t start = 0;
    while (true) {
        const auto dot = host.find('.', start);
        labels.push_back(host.substr(start, dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return labels;
}

std::string join_tail(const std::vector<std::string_view>& labels, std::size_t count) {
    std::string out;
    for (std::size_t i = labels.size() - count; i < labels.size(); ++i) {
        if (!out.empty()) out += '.';
        out += labels[i];
    }
    return out;
}

// Rules in the list are stored in Unicode form; ACE ("xn--") labels are
// decoded before matching. nullopt if ICU rejects the host.
std::optional<std::string> to_unicode_host(std::string_view host) {
    static const std::unique_ptr<icu::IDNA> idna = [] {
        UErrorCode status = U_ZERO_ERROR;
        std::unique_ptr<icu::IDNA> instance(icu::IDNA::createUTS46Instance(UIDNA_DEFAULT, status));
        return U_SUCCESS(status) ? std::move(instance) : nullptr;
    }();
    if (!idna) return std::nullopt;
    std::string out;
    icu::StringByteSink<std::string> sink(&out);
    icu::IDNAInfo info;
    UErrorCode status = U_ZERO_ERROR;
    idna->nameToUnicodeUTF8(icu::StringPiece(host.data(), static_cast<int32_t>(host.size())), sink,
                            info, status);
    if (U_FAILURE(status) || info.hasErrors()) return std::nullopt;
    return out;
}

}  // namespace

PublicSuffixList PublicSuffixList::parse(std::istream& in) {
    PublicSuffixList psl;
    std::string line;
    while (std::getline(in, line)) {
        const auto end = line.find_first_of(" \t\r");
        std::string_view rule(line.data(), end == std::string::npos ? line.size() : end);
        if (rule.empty() || rule.substr(0, 2) == "//") continue;
        if (rule.front() == '!') {
            psl.exceptions_.insert(to_lower_ascii(rule.substr(1)));
        } else if (rule.substr(0, 2) == "*.") {
            psl.wildcards_.insert(to_lower_ascii(rule.substr(2)));
        } else {
            psl.rules_.insert(to_lower_ascii(rule));
        }
    }
    return psl;
}

PublicSuffixList PublicSuffixList::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
}

const PublicSuffixList& PublicSuffixList::bundled() {
    static const PublicSuffixList instance = parse(std::string_view(kBundledPublicSuffixList));
    return instance;
}

std::string_view PublicSuffixList::bundled_version() {
    static const std::string version = [] {
        const std::string_view text(kBundledPublicSuffixList);
        constexpr std::string_view marker = "// VERSION: ";
        const auto pos = text.find(marker);
        if (pos == std::string_view::npos) return std::string("unknown");
        const auto end = text.find('\n', pos);
        return std::string(text.substr(pos + marker.size(), end - pos - marker.size()));
    }();
    return version;
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
    const auto labels = split_labels(host);
    // Walk suffixes from longest to shortest; the first hit is the longest rule.
    for (std::size_t count = labels.size(); count >= 1; --count) {
        const std::string candidate = join_tail(labels, count);
        if (exceptions_.count(candidate)) return join_tail(labels, count - 1);
        if (rules_.count(candidate)) return candidate;
        if (count >= 2 && wildcards_.count(join_tail(labels, count - 1))) return candidate;
    }
    return std::string(labels.back());
}

std::optional<std::string> PublicSuffixList::registrable_domain(std::string_view host) const {
    if (host.empty() || host.front() == '.' || host.back() == '.') return std::nullopt;
    const auto labels = split_labels(host);
    for (const auto label : labels) {
        if (label.empty()) return std::nullopt;
    }
    std::string suffix;
    if (host.find("xn--") != std::string_view::npos) {
        const auto unicode = to_unicode_host(host);
        if (!unicode) return std::nullopt;
        suffix = public_suffix(*unicode);
    } else {
        suffix = public_suffix(host);
    }
    const auto suffix_labels = split_labels(suffix).size();
    if (labels.size() <= suffix_labels) return std::nullopt;
    return join_tail(labels, suffix_labels + 1);
}

}  // namespace newsky::parser
