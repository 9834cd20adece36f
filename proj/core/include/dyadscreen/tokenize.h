#ifndef DYADSCREEN_TOKENIZE_H_
#define DYADSCREEN_TOKENIZE_H_

#include <string>
#include <string_view>
#include <vector>

namespace dyadscreen {

// Word tokenizer shared by feature extraction, truncation and chunking.
// Lowercases (ASCII plus the Latin, Greek and Cyrillic blocks), splits on
// whitespace, strips leading and trailing punctuation and drops empty
// tokens. Internal apostrophes survive, so "Don't" becomes "don't"; a
// typographic apostrophe (U+2019) inside a word is normalized to '.
std::vector<std::string> tokenize(std::string_view text);

// Appends tokens to an existing list.
void tokenize_into(std::string_view text, std::vector<std::string>& out);

}  // namespace dyadscreen

#endif  // DYADSCREEN_TOKENIZE_H_
