#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tsgen {

// Byte range [begin, end) of one token inside the original text.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Throws Utf8Error (with the offending byte offset) on malformed input.
void validate_utf8(std::string_view text);

// Canonical composition (NFC).
std::string to_nfc(std::string_view text);

// Codepoint-wise Unicode lowercase (simple case mapping).
std::string lowercase(std::string_view text);

// The tokenizer rule shared by chunking, the local embedder, and the text
// metrics: split on Unicode whitespace, each maximal run of letters/digits is
// one token, each punctuation character is one token on its own.
std::vector<TokenSpan> token_spans(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

}  // namespace tsgen
