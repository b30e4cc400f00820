#include "tsgen/unicode.hpp"

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>
#include <unicode/utf8.h>

#include <memory>

#include "tsgen/errors.hpp"

namespace tsgen {

namespace {

// Letters, digits and combining marks form word runs; everything else that is
// not whitespace tokenizes per character.
bool is_word_cp(UChar32 cp) {
    if (u_isalnum(cp)) return true;
    const auto type = u_charType(cp);
    return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK;
}

bool is_space_cp(UChar32 cp) {
    return u_isUWhiteSpace(cp);
}

}  // namespace

void validate_utf8(std::string_view text) {
    const auto* s = reinterpret_cast<const uint8_t*>(text.data());
    const auto len = static_cast<int32_t>(text.size());
    int32_t i = 0;
    while (i < len) {
        const int32_t at = i;
        UChar32 cp;
        U8_NEXT(s, i, len, cp);
        if (cp < 0) {
            throw Utf8Error("malformed UTF-8 sequence", static_cast<std::size_t>(at));
        }
    }
}

std::string to_nfc(std::string_view text) {
    validate_utf8(text);
    if (text.empty()) return {};

    UErrorCode status = U_ZERO_ERROR;
    const UNormalizer2* nfc = unorm2_getNFCInstance(&status);
    if (U_FAILURE(status)) throw Error("unicode normalizer unavailable");

    // UTF-8 -> UTF-16
    std::u16string u16(text.size() + 1, u'\0');
    int32_t u16len = 0;
    status = U_ZERO_ERROR;
    u_strFromUTF8(u16.data(), static_cast<int32_t>(u16.size()), &u16len, text.data(),
                  static_cast<int32_t>(text.size()), &status);
    if (U_FAILURE(status)) throw Error("UTF-8 to UTF-16 conversion failed");
    u16.resize(static_cast<std::size_t>(u16len));

    status = U_ZERO_ERROR;
    int32_t outlen = unorm2_normalize(nfc, u16.data(), u16len, nullptr, 0, &status);
    if (status != U_BUFFER_OVERFLOW_ERROR && U_FAILURE(status)) {
        throw Error("NFC normalization failed");
    }
    std::u16string norm(static_cast<std::size_t>(outlen), u'\0');
    status = U_ZERO_ERROR;
    unorm2_normalize(nfc, u16.data(), u16len, norm.data(), outlen, &status);
    if (U_FAILURE(status)) throw Error("NFC normalization failed");

    // UTF-16 -> UTF-8
    std::string out(norm.size() * 4 + 1, '\0');
    int32_t u8len = 0;
    status = U_ZERO_ERROR;
    u_strToUTF8(out.data(), static_cast<int32_t>(out.size()), &u8len, norm.data(),
                static_cast<int32_t>(norm.size()), &status);
    if (U_FAILURE(status)) throw Error("UTF-16 to UTF-8 conversion failed");
    out.resize(static_cast<std::size_t>(u8len));
    return out;
}

std::string lowercase(std::string_view text) {
    validate_utf8(text);
    std::string out;
    out.reserve(text.size());
    const auto* s = reinterpret_cast<const uint8_t*>(text.data());
    const auto len = static_cast<int32_t>(text.size());
    int32_t i = 0;
    char buf[U8_MAX_LENGTH];
    while (i < len) {
        UChar32 cp;
        U8_NEXT(s, i, len, cp);
        cp = u_tolower(cp);
        int32_t blen = 0;
        U8_APPEND_UNSAFE(buf, blen, cp);
        out.append(buf, static_cast<std::size_t>(blen));
    }
    return out;
}

std::vector<TokenSpan> token_spans(std::string_view text) {
    validate_utf8(text);
    std::vector<TokenSpan> spans;
    const auto* s = reinterpret_cast<const uint8_t*>(text.data());
    const auto len = static_cast<int32_t>(text.size());
    int32_t i = 0;
    bool in_word = false;
    std::size_t word_begin = 0;
    while (i < len) {
        const int32_t at = i;
        UChar32 cp;
        U8_NEXT(s, i, len, cp);
        if (is_space_cp(cp)) {
            if (in_word) {
                spans.push_back({word_begin, static_cast<std::size_t>(at)});
                in_word = false;
            }
        } else if (is_word_cp(cp)) {
            if (!in_word) {
                word_begin = static_cast<std::size_t>(at);
                in_word = true;
            }
        } else {
            if (in_word) {
                spans.push_back({word_begin, static_cast<std::size_t>(at)});
                in_word = false;
            }
            spans.push_back({static_cast<std::size_t>(at), static_cast<std::size_t>(i)});
        }
    }
    if (in_word) spans.push_back({word_begin, static_cast<std::size_t>(len)});
    return spans;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& sp : token_spans(text)) {
        out.emplace_back(text.substr(sp.begin, sp.end - sp.begin));
    }
    return out;
}

}  // namespace tsgen
