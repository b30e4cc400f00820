#include "tsgen/corpus.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "tsgen/errors.hpp"

namespace tsgen {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

std::string encode_cp(char32_t cp) {
    std::string out;
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    U8_APPEND_UNSAFE(buf, len, static_cast<UChar32>(cp));
    out.assign(buf, static_cast<std::size_t>(len));
    return out;
}

std::string normalize_newlines(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r') {
            out.push_back('\n');
            if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// HTML stripping

const std::set<std::string>& block_tags() {
    static const std::set<std::string> tags = {
        "address", "article", "aside",  "blockquote", "br",      "caption", "dd",
        "div",     "dl",      "dt",     "fieldset",   "figure",  "figcaption",
        "footer",  "form",    "h1",     "h2",         "h3",      "h4",      "h5",
        "h6",      "header",  "hr",     "li",         "main",    "nav",     "ol",
        "p",       "pre",     "section", "table",     "tbody",   "thead",   "tfoot",
        "tr",      "ul"};
    return tags;
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string strip_html(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (c != '<') {
            out.push_back(c);
            ++i;
            continue;
        }
        if (s.compare(i, 4, "<!--") == 0) {
            const auto end = s.find("-->", i + 4);
            i = (end == std::string_view::npos) ? s.size() : end + 3;
            continue;
        }
        // A tag must start with an ASCII letter, '/', '!' or '?'.
        if (i + 1 >= s.size() ||
            !(std::isalpha(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '/' ||
              s[i + 1] == '!' || s[i + 1] == '?')) {
            out.push_back('<');
            ++i;
            continue;
        }
        const auto close = s.find('>', i + 1);
        if (close == std::string_view::npos) {
            out.push_back('<');
            ++i;
            continue;
        }
        std::string_view inner = s.substr(i + 1, close - i - 1);
        bool closing = false;
        if (!inner.empty() && inner.front() == '/') {
            closing = true;
            inner.remove_prefix(1);
        }
        std::size_t name_end = 0;
        while (name_end < inner.size() &&
               std::isalnum(static_cast<unsigned char>(inner[name_end]))) {
            ++name_end;
        }
        const std::string name = ascii_lower(inner.substr(0, name_end));
        i = close + 1;
        if (!closing && (name == "script" || name == "style")) {
            // Drop the element content as well.
            const std::string needle = "</" + name;
            auto pos = i;
            while (pos < s.size()) {
                if (ascii_lower(s.substr(pos, needle.size())) == needle) break;
                ++pos;
            }
            if (pos < s.size()) {
                const auto tag_end = s.find('>', pos);
                i = (tag_end == std::string_view::npos) ? s.size() : tag_end + 1;
            } else {
                i = s.size();
            }
            continue;
        }
        if (block_tags().count(name) != 0) {
            out += "\n\n";
        } else if (name == "td" || name == "th") {
            out.push_back(' ');
        }
        // Inline tags contribute nothing.
    }
    return out;
}

std::string decode_entities(std::string_view s) {
    static const std::map<std::string, char32_t> named = {
        {"amp", U'&'},      {"lt", U'<'},      {"gt", U'>'},       {"quot", U'"'},
        {"apos", U'\''},    {"nbsp", U' '}, {"szlig", U'ß'},  {"auml", U'ä'},
        {"ouml", U'ö'},     {"uuml", U'ü'},    {"Auml", U'Ä'},     {"Ouml", U'Ö'},
        {"Uuml", U'Ü'},     {"eacute", U'é'},  {"egrave", U'è'},   {"agrave", U'à'},
        {"ccedil", U'ç'},   {"euro", U'€'},    {"sect", U'§'},     {"copy", U'©'},
        {"reg", U'®'},      {"deg", U'°'},     {"plusmn", U'±'},   {"hellip", U'…'},
        {"ndash", U'–'},    {"mdash", U'—'},   {"laquo", U'«'},    {"raquo", U'»'},
        {"ldquo", U'“'}, {"rdquo", U'”'}, {"lsquo", U'‘'},
        {"rsquo", U'’'}, {"times", U'×'}, {"divide", U'÷'},   {"middot", U'·'}};

    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        const auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 32) {
            out.push_back('&');
            ++i;
            continue;
        }
        const std::string_view body = s.substr(i + 1, semi - i - 1);
        if (!body.empty() && body[0] == '#') {
            char32_t cp = 0;
            bool ok = body.size() > 1;
            if (body.size() > 2 && (body[1] == 'x' || body[1] == 'X')) {
                for (std::size_t k = 2; k < body.size() && ok; ++k) {
                    const char d = body[k];
                    if (!std::isxdigit(static_cast<unsigned char>(d))) ok = false;
                    else cp = cp * 16 + static_cast<char32_t>(
                                  std::isdigit(static_cast<unsigned char>(d))
                                      ? d - '0'
                                      : std::tolower(static_cast<unsigned char>(d)) - 'a' + 10);
                }
            } else {
                for (std::size_t k = 1; k < body.size() && ok; ++k) {
                    if (!std::isdigit(static_cast<unsigned char>(body[k]))) ok = false;
                    else cp = cp * 10 + static_cast<char32_t>(body[k] - '0');
                }
            }
            if (ok && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) {
                out += encode_cp(cp);
                i = semi + 1;
                continue;
            }
        } else if (auto it = named.find(std::string(body)); it != named.end()) {
            out += encode_cp(it->second);
            i = semi + 1;
            continue;
        }
        out.push_back('&');
        ++i;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Markdown stripping

std::string strip_markdown_lines(std::string_view s) {
    static const std::regex heading(R"(^ {0,3}#{1,6}\s+)");
    static const std::regex bullet(R"(^(\s*)[-*+]\s+)");
    static const std::regex ordered(R"(^(\s*)\d{1,9}[.)]\s+)");
    static const std::regex rule(R"(^\s*(-{3,}|\*{3,}|_{3,}|={3,})\s*$)");
    static const std::regex fence(R"(^\s*(```|~~~))");

    std::string out;
    out.reserve(s.size());
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto nl = s.find('\n', pos);
        std::string line(s.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                    : nl - pos));
        if (std::regex_search(line, fence) || std::regex_match(line, rule)) {
            line.clear();
        } else {
            line = std::regex_replace(line, heading, "");
            line = std::regex_replace(line, bullet, "$1");
            line = std::regex_replace(line, ordered, "$1");
            std::smatch m;
            while (std::regex_search(line, m, std::regex(R"(^\s*>\s?)"))) {
                line.erase(0, static_cast<std::size_t>(m.length(0)));
            }
        }
        out += line;
        if (nl == std::string_view::npos) break;
        out.push_back('\n');
        pos = nl + 1;
    }
    return out;
}

std::string strip_markdown_inline(std::string s) {
    static const std::regex image(R"(!\[([^\]]*)\]\(([^)]*)\))");
    static const std::regex link(R"(\[([^\]]*)\]\(([^)]*)\))");
    static const std::regex reflink(R"(\[([^\]]*)\]\[[^\]]*\])");
    static const std::regex code(R"(`([^`]*)`)");
    static const std::regex bold_star(R"(\*\*([^*]+)\*\*)");
    static const std::regex bold_under(R"(__([^_]+)__)");
    static const std::regex em_star(R"(\*([^*\s][^*]*)\*)");
    static const std::regex em_under(R"((^|[\s([{>"'])_([^_\s][^_]*)_($|[\s)\]}.,;:!?"']))");

    s = std::regex_replace(s, image, "$1");
    s = std::regex_replace(s, link, "$1");
    s = std::regex_replace(s, reflink, "$1");
    s = std::regex_replace(s, code, "$1");
    s = std::regex_replace(s, bold_star, "$1");
    s = std::regex_replace(s, bold_under, "$1");
    s = std::regex_replace(s, em_star, "$1");
    s = std::regex_replace(s, em_under, "$1$2$3");
    return s;
}

// ---------------------------------------------------------------------------
// Whitespace collapse: runs become a single space; runs holding a line or
// paragraph break become a single newline (the rule must be idempotent, so a
// lone newline in already-normalized text stays a newline). Control
// characters other than newline are dropped.

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
    const auto len = static_cast<int32_t>(s.size());
    int32_t i = 0;
    bool pending_ws = false;
    bool pending_break = false;
    while (i < len) {
        UChar32 cp;
        U8_NEXT(bytes, i, len, cp);
        if (cp < 0) throw Utf8Error("malformed UTF-8 sequence", static_cast<std::size_t>(i));
        if (u_isUWhiteSpace(cp) || cp == 0x0B || cp == 0x0C) {
            pending_ws = true;
            if (cp == '\n' || cp == 0x2028 || cp == 0x2029) pending_break = true;
            continue;
        }
        if ((cp < 0x20) || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F)) {
            continue;  // stray control character
        }
        if (pending_ws && !out.empty()) {
            out.push_back(pending_break ? '\n' : ' ');
        }
        pending_ws = false;
        pending_break = false;
        out += encode_cp(static_cast<char32_t>(cp));
    }
    return out;
}

}  // namespace

std::string normalize_text(std::string_view raw, OriginFormat origin) {
    validate_utf8(raw);
    std::string s = normalize_newlines(raw);
    if (s.starts_with("\xEF\xBB\xBF")) s.erase(0, 3);

    if (origin == OriginFormat::markdown) {
        s = strip_markdown_lines(s);
        s = strip_markdown_inline(std::move(s));
    }
    if (origin == OriginFormat::markdown || origin == OriginFormat::html) {
        s = strip_html(s);
        s = decode_entities(s);
    }
    s = collapse_whitespace(s);
    return to_nfc(s);
}

std::size_t count_tokens(std::string_view text) {
    return token_spans(text).size();
}

std::vector<Passage> chunk_document(const SourceDocument& doc, const ChunkingPolicy& policy) {
    if (policy.max_tokens == 0) throw ValidationError("max_tokens must be positive");
    if (policy.overlap_tokens >= policy.max_tokens) {
        throw ValidationError("overlap_tokens must be smaller than max_tokens");
    }
    std::vector<Passage> passages;
    const std::string_view body = doc.body;
    if (body.empty()) return passages;

    // Sentence slices: terminator run of . ! ? followed by whitespace or end.
    std::vector<std::string_view> sentences;
    std::size_t start = 0;
    auto is_ws = [](char c) { return c == ' ' || c == '\n' || c == '\t'; };
    while (start < body.size() && is_ws(body[start])) ++start;
    std::size_t i = start;
    while (i < body.size()) {
        const char c = body[i];
        if (c == '.' || c == '!' || c == '?') {
            std::size_t end = i + 1;
            while (end < body.size() &&
                   (body[end] == '.' || body[end] == '!' || body[end] == '?')) {
                ++end;
            }
            if (end >= body.size() || is_ws(body[end])) {
                sentences.push_back(body.substr(start, end - start));
                start = end;
                while (start < body.size() && is_ws(body[start])) ++start;
                i = start;
                continue;
            }
            i = end;
            continue;
        }
        ++i;
    }
    if (start < body.size()) sentences.push_back(body.substr(start));

    // Units: whole sentences, or token-boundary groups of oversized
    // sentences. Groups leave room for the overlap seed so a sliding window
    // emerges when overlap_tokens > 0.
    struct Unit {
        std::string_view text;
        std::size_t tokens;
    };
    const std::size_t group_cap = policy.max_tokens - policy.overlap_tokens;
    std::vector<Unit> units;
    for (const auto sent : sentences) {
        const auto spans = token_spans(sent);
        if (spans.empty()) continue;
        if (spans.size() <= policy.max_tokens) {
            units.push_back({sent, spans.size()});
            continue;
        }
        for (std::size_t g = 0; g < spans.size(); g += group_cap) {
            const std::size_t gend = std::min(g + group_cap, spans.size());
            units.push_back({sent.substr(spans[g].begin, spans[gend - 1].end - spans[g].begin),
                             gend - g});
        }
    }
    if (units.empty()) return passages;

    auto flush = [&](std::string text) {
        char ordinal[16];
        std::snprintf(ordinal, sizeof(ordinal), "%06zu", passages.size());
        Passage p;
        p.passage_id = doc.doc_id + "#" + ordinal;
        p.token_count = count_tokens(text);
        p.text = std::move(text);
        p.source_doc = doc.doc_id;
        passages.push_back(std::move(p));
    };

    std::string cur;
    std::size_t cur_tokens = 0;
    for (const auto& u : units) {
        if (cur_tokens + u.tokens > policy.max_tokens && cur_tokens > 0) {
            std::string finished = std::move(cur);
            cur.clear();
            cur_tokens = 0;
            if (policy.overlap_tokens > 0) {
                const auto spans = token_spans(finished);
                const std::size_t tail =
                    std::min(policy.overlap_tokens, spans.size());
                if (tail > 0 && tail + u.tokens <= policy.max_tokens) {
                    const auto& first = spans[spans.size() - tail];
                    cur = finished.substr(first.begin, finished.size() - first.begin);
                    cur_tokens = tail;
                }
            }
            flush(std::move(finished));
        }
        if (!cur.empty()) cur.push_back(' ');
        cur.append(u.text);
        cur_tokens += u.tokens;
    }
    if (!cur.empty()) flush(std::move(cur));
    return passages;
}

RequirementsSet load_requirements(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    validate_utf8(content);
    const auto rows = detail::parse_csv(content);
    if (rows.empty()) throw ValidationError("requirements file is empty: " + path.string());
    const auto& header = rows.front().fields;
    if (header.size() != 3 || header[0] != "req_id" || header[1] != "section" ||
        header[2] != "statement") {
        throw ValidationError("requirements file must start with header req_id,section,statement");
    }
    RequirementsSet set;
    std::set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() == 1 && row.fields[0].empty()) continue;  // blank line
        if (row.fields.size() != 3) {
            throw ValidationError("requirements row at line " + std::to_string(row.line_no) +
                                  " must have 3 fields");
        }
        Requirement req{row.fields[0], row.fields[1], row.fields[2]};
        if (req.req_id.empty()) {
            throw ValidationError("missing req_id at line " + std::to_string(row.line_no));
        }
        if (req.statement.empty()) {
            throw ValidationError("missing statement for requirement \"" + req.req_id + "\"");
        }
        if (!seen.insert(req.req_id).second) {
            throw ValidationError("duplicate req_id \"" + req.req_id + "\" at line " +
                                  std::to_string(row.line_no));
        }
        set.items.push_back(std::move(req));
    }
    return set;
}

std::vector<GlossaryEntry> load_glossary(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    validate_utf8(content);
    const auto rows = detail::parse_csv(content);
    if (rows.empty()) throw ValidationError("glossary file is empty: " + path.string());
    const auto& header = rows.front().fields;
    if (header.size() != 2 || header[0] != "term" || header[1] != "definition") {
        throw ValidationError("glossary file must start with header term,definition");
    }
    std::vector<GlossaryEntry> entries;
    std::set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() == 1 && row.fields[0].empty()) continue;
        if (row.fields.size() != 2) {
            throw ValidationError("glossary row at line " + std::to_string(row.line_no) +
                                  " must have 2 fields");
        }
        GlossaryEntry e{row.fields[0], row.fields[1]};
        if (e.term.empty()) {
            throw ValidationError("missing term at line " + std::to_string(row.line_no));
        }
        if (!seen.insert(e.term).second) {
            throw ValidationError("duplicate glossary term \"" + e.term + "\" at line " +
                                  std::to_string(row.line_no));
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

ScenarioRequest load_request(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    validate_utf8(content);
    const std::string text = normalize_newlines(content);

    std::map<std::string, std::string> values;
    std::string current_key;
    std::vector<std::string> continuation;

    auto rstrip = [](std::string s) {
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n')) {
            s.pop_back();
        }
        return s;
    };
    auto commit = [&] {
        if (current_key.empty()) return;
        std::string& v = values[current_key];
        for (const auto& line : continuation) {
            if (!v.empty()) v.push_back('\n');
            v += line;
        }
        v = rstrip(std::move(v));
        continuation.clear();
        current_key.clear();
    };

    static const std::regex key_line(R"(^([A-Za-z_][A-Za-z0-9_]*)\s*:\s?(.*)$)");
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string line(text.substr(pos, nl == std::string::npos ? std::string::npos
                                                                        : nl - pos));
        ++line_no;
        if (!line.empty() && (line[0] == ' ' || line[0] == '\t')) {
            if (current_key.empty()) {
                throw ValidationError("continuation line without a key at line " +
                                      std::to_string(line_no));
            }
            std::size_t first = line.find_first_not_of(" \t");
            continuation.push_back(first == std::string::npos ? "" : line.substr(first));
        } else if (line.empty()) {
            if (!current_key.empty()) continuation.push_back("");
        } else if (line[0] == '#') {
            // comment
        } else if (std::smatch m; std::regex_match(line, m, key_line)) {
            commit();
            const std::string key = m[1].str();
            if (key != "description" && key != "example_description" &&
                key != "example_scenario") {
                throw ValidationError("unknown key \"" + key + "\" at line " +
                                      std::to_string(line_no));
            }
            if (values.count(key) != 0) {
                throw ValidationError("duplicate key \"" + key + "\" at line " +
                                      std::to_string(line_no));
            }
            current_key = key;
            values[key] = m[2].str();
        } else {
            throw ValidationError("unexpected line " + std::to_string(line_no) +
                                  " in request file");
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    commit();

    ScenarioRequest req;
    if (auto it = values.find("description"); it != values.end() && !it->second.empty()) {
        req.description = it->second;
    } else {
        throw ValidationError("request file is missing required field \"description\"");
    }
    if (auto it = values.find("example_scenario"); it != values.end() && !it->second.empty()) {
        req.example_scenario = it->second;
    }
    if (auto it = values.find("example_description"); it != values.end() && !it->second.empty()) {
        if (!req.example_scenario) {
            throw ValidationError(
                "example_description requires example_scenario to be present");
        }
        req.example_description = it->second;
    }
    return req;
}

std::vector<SourceDocument> load_corpus_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ValidationError("corpus directory does not exist: " + dir.string());
    }
    std::vector<std::pair<std::string, std::filesystem::path>> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext != ".txt" && ext != ".md" && ext != ".html") continue;
        files.emplace_back(entry.path().lexically_relative(dir).generic_string(), entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<SourceDocument> docs;
    for (const auto& [rel, path] : files) {
        OriginFormat origin = OriginFormat::plain;
        const auto ext = path.extension().string();
        if (ext == ".md") origin = OriginFormat::markdown;
        else if (ext == ".html") origin = OriginFormat::html;
        SourceDocument doc;
        doc.doc_id = rel;
        doc.title = path.stem().string();
        doc.origin_format = origin;
        doc.body = normalize_text(read_file(path), origin);
        if (doc.body.empty()) continue;  // nothing left after markup stripping
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace tsgen
