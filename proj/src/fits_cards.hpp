#ifndef PROVKIT_FITS_CARDS_HPP
#define PROVKIT_FITS_CARDS_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace provkit {

// FITS-style header cards: fixed 80-column lines, an 8-column keyword,
// "= " as value indicator, string values in single quotes with quote
// doubling. Values longer than one card spill onto CONTINUE cards using
// the '&' convention: a string whose last character is '&' continues on
// the next card when (and only when) that card's keyword is CONTINUE.

inline constexpr std::size_t kCardWidth = 80;
inline constexpr std::size_t kFitsBlockSize = 2880;

// One string-valued card, split over CONTINUE cards as needed. Every
// returned line is exactly 80 columns. The keyword must be 1-8 characters
// and the value free of control characters (cards are single lines).
std::vector<std::string> encode_string_card(const std::string& keyword, const std::string& value);

std::string pad_card(std::string text); // right-pad with spaces to 80 columns
std::string card_keyword(const std::string& card); // bytes 0-8, right-trimmed

struct CardValue {
    std::string text;
    bool continued = false; // the quoted string ended with '&' (tentative marker)
};

// Value of a "KEYWORD = <value>" card. `index` only labels error messages.
CardValue parse_value_card(const std::string& card, std::size_t index);

// Value of a "CONTINUE  '<text>'" card.
CardValue parse_continue_card(const std::string& card, std::size_t index);

// Text card files: one card per line, parsing stops at an END card.
std::vector<std::string> read_text_cards(const std::string& path);
void write_text_cards(const std::string& path, const std::vector<std::string>& cards);

// FITS primary headers: 2880-byte blocks of 36 cards, up to the END card.
// The writer emits a minimal conforming header around the given cards.
std::vector<std::string> read_fits_header_cards(const std::string& path);
void write_fits_header_file(const std::string& path, const std::vector<std::string>& cards);

} // namespace provkit

#endif
