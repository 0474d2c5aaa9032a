#include "warcpipe/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "warcpipe/utf8.hpp"

namespace warcpipe {

namespace {

const std::unordered_set<std::string_view>& block_elements() {
    static const std::unordered_set<std::string_view> set = {
        "p",       "div",     "li",       "td",      "th",         "blockquote", "h1",      "h2",
        "h3",      "h4",      "h5",       "h6",      "pre",        "article",    "section", "ul",
        "ol",      "dl",      "dt",       "dd",      "table",      "tr",         "thead",   "tbody",
        "tfoot",   "caption", "main",     "body",    "html",       "figure",     "figcaption",
        "hr",      "address", "center",   "details", "summary",    "fieldset",   "legend",  "hgroup"};
    return set;
}

// Elements whose whole subtree is discarded.
const std::unordered_set<std::string_view>& dropped_elements() {
    static const std::unordered_set<std::string_view> set = {
        "script", "style",  "nav",    "header", "footer",   "aside",  "form",   "noscript", "menu",
        "head",   "title",  "template", "svg",  "math",     "iframe", "object", "select",   "button",
        "textarea", "canvas", "video", "audio", "map"};
    return set;
}

// Raw-text elements: their content is not markup and must be skipped until the
// matching end tag.
bool is_raw_text(std::string_view name) {
    return name == "script" || name == "style" || name == "textarea" || name == "title" || name == "xmp";
}

const std::unordered_map<std::string_view, char32_t>& named_entities() {
    static const std::unordered_map<std::string_view, char32_t> map = {
        {"amp", '&'},      {"lt", '<'},        {"gt", '>'},        {"quot", '"'},      {"apos", '\''},
        {"nbsp", 0xA0},    {"iexcl", 0xA1},    {"cent", 0xA2},     {"pound", 0xA3},    {"euro", 0x20AC},
        {"yen", 0xA5},     {"sect", 0xA7},     {"uml", 0xA8},      {"copy", 0xA9},     {"ordf", 0xAA},
        {"laquo", 0xAB},   {"not", 0xAC},      {"shy", 0xAD},      {"reg", 0xAE},      {"deg", 0xB0},
        {"plusmn", 0xB1},  {"sup2", 0xB2},     {"sup3", 0xB3},     {"acute", 0xB4},    {"micro", 0xB5},
        {"para", 0xB6},    {"middot", 0xB7},   {"ordm", 0xBA},     {"raquo", 0xBB},    {"frac12", 0xBD},
        {"iquest", 0xBF},  {"Agrave", 0xC0},   {"Aacute", 0xC1},   {"Acirc", 0xC2},    {"Atilde", 0xC3},
        {"Auml", 0xC4},    {"Aring", 0xC5},    {"AElig", 0xC6},    {"Ccedil", 0xC7},   {"Egrave", 0xC8},
        {"Eacute", 0xC9},  {"Ecirc", 0xCA},    {"Euml", 0xCB},     {"Igrave", 0xCC},   {"Iacute", 0xCD},
        {"Icirc", 0xCE},   {"Iuml", 0xCF},     {"Ntilde", 0xD1},   {"Ograve", 0xD2},   {"Oacute", 0xD3},
        {"Ocirc", 0xD4},   {"Otilde", 0xD5},   {"Ouml", 0xD6},     {"times", 0xD7},    {"Oslash", 0xD8},
        {"Ugrave", 0xD9},  {"Uacute", 0xDA},   {"Ucirc", 0xDB},    {"Uuml", 0xDC},     {"szlig", 0xDF},
        {"agrave", 0xE0},  {"aacute", 0xE1},   {"acirc", 0xE2},    {"atilde", 0xE3},   {"auml", 0xE4},
        {"aring", 0xE5},   {"aelig", 0xE6},    {"ccedil", 0xE7},   {"egrave", 0xE8},   {"eacute", 0xE9},
        {"ecirc", 0xEA},   {"euml", 0xEB},     {"igrave", 0xEC},   {"iacute", 0xED},   {"icirc", 0xEE},
        {"iuml", 0xEF},    {"ntilde", 0xF1},   {"ograve", 0xF2},   {"oacute", 0xF3},   {"ocirc", 0xF4},
        {"otilde", 0xF5},  {"ouml", 0xF6},     {"divide", 0xF7},   {"oslash", 0xF8},   {"ugrave", 0xF9},
        {"uacute", 0xFA},  {"ucirc", 0xFB},    {"uuml", 0xFC},     {"yuml", 0xFF},     {"OElig", 0x152},
        {"oelig", 0x153},  {"Scaron", 0x160},  {"scaron", 0x161},  {"ndash", 0x2013},  {"mdash", 0x2014},
        {"lsquo", 0x2018}, {"rsquo", 0x2019},  {"sbquo", 0x201A},  {"ldquo", 0x201C},  {"rdquo", 0x201D},
        {"bdquo", 0x201E}, {"bull", 0x2022},   {"hellip", 0x2026}, {"trade", 0x2122},  {"thinsp", 0x2009},
        {"ensp", 0x2002},  {"emsp", 0x2003},   {"zwnj", 0x200C},   {"zwj", 0x200D},    {"lrm", 0x200E},
        {"rlm", 0x200F}};
    return map;
}

// &#128;..&#159; interpreted as windows-1252.
constexpr std::array<char32_t, 32> kC1References = {
    0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
    0x2039, 0x0152, 0,      0x017D, 0,      0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
    0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178};

bool is_space_cp(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' || cp == 0xA0 ||
           cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
           cp == 0x205F || cp == 0x3000 || cp == 0x85;
}

// Zero-width and bidi marks carry no text.
bool is_invisible(char32_t cp) {
    return cp == 0x200B || cp == 0x200C || cp == 0x200D || cp == 0x200E || cp == 0x200F || cp == 0xFEFF ||
           cp == 0xAD;
}

bool is_control(char32_t cp) { return cp < 0x20 || (cp >= 0x7F && cp <= 0x9F); }

// Accumulates the text of the current paragraph with whitespace collapsed.
class ParagraphBuilder {
  public:
    explicit ParagraphBuilder(std::vector<Paragraph>& out) : out_(out) {}

    void text(std::string_view run) {
        std::size_t pos = 0;
        while (pos < run.size()) {
            char32_t cp = utf8::next(run, pos);
            if (is_space_cp(cp)) {
                pending_space_ = !current_.empty();
                continue;
            }
            if (is_invisible(cp) || is_control(cp)) continue;
            if (pending_space_) {
                current_.push_back(' ');
                pending_space_ = false;
            }
            utf8::append(current_, cp);
        }
        if (!run.empty()) brs_ = 0;
    }

    void line_break() {
        if (++brs_ >= 2) {
            boundary();
            return;
        }
        pending_space_ = !current_.empty();
    }

    void boundary() {
        brs_ = 0;
        pending_space_ = false;
        if (current_.empty()) return;
        out_.push_back({out_.size(), std::move(current_)});
        current_.clear();
    }

    bool has_only_space_since_br(std::string_view run) const {
        return std::all_of(run.begin(), run.end(), [](unsigned char c) { return std::isspace(c); });
    }

    void text_between_breaks(std::string_view run) {
        // Whitespace between two <br> does not separate them.
        if (brs_ > 0 && has_only_space_since_br(run)) {
            pending_space_ = !current_.empty();
            return;
        }
        text(run);
    }

  private:
    std::vector<Paragraph>& out_;
    std::string current_;
    bool pending_space_ = false;
    int brs_ = 0;
};

std::string lower_name(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

// Returns the position just past the '>' closing a tag that starts at `from`
// (pointing after the tag name), honouring quoted attribute values.
std::size_t skip_tag_attributes(std::string_view s, std::size_t from, bool& self_closing) {
    char quote = 0;
    self_closing = false;
    for (std::size_t i = from; i < s.size(); ++i) {
        char c = s[i];
        if (quote) {
            if (c == quote) quote = 0;
            continue;
        }
        if (c == '"' || c == '\'') {
            // Only a quote directly after '=' (or whitespace after '=') opens a value.
            std::size_t j = i;
            while (j > from && (s[j - 1] == ' ' || s[j - 1] == '\t' || s[j - 1] == '\n')) --j;
            if (j > from && s[j - 1] == '=') quote = c;
            continue;
        }
        if (c == '>') {
            self_closing = i > from && s[i - 1] == '/';
            return i + 1;
        }
        if (c == '<' && i + 1 < s.size() && (s[i + 1] == '/' || std::isalpha(static_cast<unsigned char>(s[i + 1])))) {
            // Unterminated tag: resume at the next tag.
            return i;
        }
    }
    return s.size();
}

// Finds the case-insensitive end tag "</name" at or after `from`.
std::size_t find_end_tag(std::string_view s, std::size_t from, std::string_view name) {
    for (std::size_t i = s.find("</", from); i != std::string_view::npos; i = s.find("</", i + 2)) {
        std::size_t j = i + 2;
        if (j + name.size() > s.size()) return std::string_view::npos;
        bool match = true;
        for (std::size_t k = 0; k < name.size(); ++k) {
            if (std::tolower(static_cast<unsigned char>(s[j + k])) != name[k]) {
                match = false;
                break;
            }
        }
        if (match && (j + name.size() == s.size() || !is_name_char(s[j + name.size()]))) return i;
    }
    return std::string_view::npos;
}

}  // namespace

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c != '&') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(c);
            ++i;
            continue;
        }
        std::string_view ref = text.substr(i + 1, semi - i - 1);
        char32_t cp = 0;
        bool ok = false;
        if (ref.size() >= 2 && ref[0] == '#') {
            int base = 10;
            std::string_view digits = ref.substr(1);
            if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
                base = 16;
                digits.remove_prefix(1);
            }
            std::uint32_t value = 0;
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
            if (ec == std::errc{} && p == digits.data() + digits.size() && !digits.empty()) {
                cp = value;
                // Numeric references in the C1 range mean windows-1252 in practice.
                if (cp >= 0x80 && cp <= 0x9F) cp = kC1References[cp - 0x80] ? kC1References[cp - 0x80] : utf8::kReplacement;
                if (cp == 0 || cp > 0x10FFFF) cp = utf8::kReplacement;
                ok = true;
            }
        } else {
            auto it = named_entities().find(ref);
            if (it != named_entities().end()) {
                cp = it->second;
                ok = true;
            }
        }
        if (!ok) {
            out.push_back(c);
            ++i;
            continue;
        }
        utf8::append(out, cp);
        i = semi + 1;
    }
    return out;
}

std::vector<Paragraph> extract_paragraphs(std::string_view s) {
    std::vector<Paragraph> out;
    ParagraphBuilder builder(out);
    std::vector<std::string> drop_stack;

    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t lt = s.find('<', i);
        std::string_view run = s.substr(i, lt == std::string_view::npos ? std::string_view::npos : lt - i);
        if (drop_stack.empty() && !run.empty()) builder.text_between_breaks(decode_entities(run));
        if (lt == std::string_view::npos) break;
        i = lt;

        // Comments, doctype, CDATA and processing instructions.
        if (s.compare(i, 4, "<!--") == 0) {
            std::size_t end = s.find("-->", i + 4);
            i = end == std::string_view::npos ? s.size() : end + 3;
            continue;
        }
        if (s.compare(i, 2, "<!") == 0 || s.compare(i, 2, "<?") == 0) {
            std::size_t end = s.find('>', i + 2);
            i = end == std::string_view::npos ? s.size() : end + 1;
            continue;
        }

        bool closing = i + 1 < s.size() && s[i + 1] == '/';
        std::size_t name_start = i + (closing ? 2 : 1);
        std::size_t name_end = name_start;
        while (name_end < s.size() && is_name_char(s[name_end])) ++name_end;
        if (name_end == name_start || !std::isalpha(static_cast<unsigned char>(s[name_start]))) {
            // A bare '<' in text.
            if (drop_stack.empty()) builder.text_between_breaks("<");
            i += 1;
            continue;
        }
        std::string name = lower_name(s.substr(name_start, name_end - name_start));
        bool self_closing = false;
        i = skip_tag_attributes(s, name_end, self_closing);

        if (closing) {
            if (!drop_stack.empty()) {
                auto it = std::find(drop_stack.rbegin(), drop_stack.rend(), name);
                if (it != drop_stack.rend()) drop_stack.erase(std::next(it).base(), drop_stack.end());
                else if (name == "body" || name == "html") drop_stack.clear();
                continue;
            }
            if (block_elements().contains(name)) builder.boundary();
            continue;
        }

        if (is_raw_text(name) && !self_closing) {
            std::size_t end = find_end_tag(s, i, name);
            if (end == std::string_view::npos) {
                i = s.size();
            } else {
                bool unused = false;
                i = skip_tag_attributes(s, end + 2 + name.size(), unused);
            }
            // Raw-text elements are all dropped; their bodies never produce text.
            if (!dropped_elements().contains(name) && drop_stack.empty()) builder.boundary();
            continue;
        }

        if (name == "body") {
            // An unclosed <head> ends where the body begins.
            drop_stack.clear();
            builder.boundary();
            continue;
        }
        if (dropped_elements().contains(name)) {
            if (drop_stack.empty()) builder.boundary();
            if (!self_closing) drop_stack.push_back(std::move(name));
            continue;
        }
        if (!drop_stack.empty()) continue;

        if (name == "br") {
            builder.line_break();
        } else if (block_elements().contains(name)) {
            builder.boundary();
        }
    }
    builder.boundary();
    return out;
}

std::string Document::joined_text(char sep) const {
    std::string out;
    for (const auto& p : paragraphs) {
        if (!out.empty()) out.push_back(sep);
        out += p.text;
    }
    return out;
}

void reindex(Document& doc) {
    for (std::size_t i = 0; i < doc.paragraphs.size(); ++i) doc.paragraphs[i].index = i;
}

}  // namespace warcpipe
