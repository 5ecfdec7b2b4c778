#include <fstream>
#include <sstream>

#include "errors.hpp"
#include "fits_cards.hpp"

namespace provkit {

namespace {

[[noreturn]] void malformed(std::size_t index, const std::string& detail) {
    fail(Errc::malformed_card, "card " + std::to_string(index + 1) + ": " + detail);
}

// escaped content tokens: a doubled quote is atomic and must never be split
// across a card boundary
std::vector<std::string> quote_tokens(const std::string& value) {
    std::vector<std::string> tokens;
    for (char c : value) {
        if (c == '\'')
            tokens.emplace_back("''");
        else
            tokens.emplace_back(1, c);
    }
    return tokens;
}

std::string quoted_card(const std::string& head, const std::string& content) {
    return pad_card(head + "'" + content + "'");
}

// scans a quoted string starting at `pos` (the opening quote); returns the
// unescaped content and leaves `pos` one past the closing quote
std::string scan_quoted(const std::string& card, std::size_t& pos, std::size_t index) {
    std::string content;
    ++pos; // opening quote
    while (true) {
        if (pos >= card.size()) malformed(index, "unterminated string value");
        const char c = card[pos];
        if (c == '\'') {
            if (pos + 1 < card.size() && card[pos + 1] == '\'') {
                content += '\'';
                pos += 2;
                continue;
            }
            ++pos; // closing quote
            return content;
        }
        content += c;
        ++pos;
    }
}

CardValue finish_string_value(std::string content) {
    CardValue v;
    v.continued = !content.empty() && content.back() == '&';
    v.text = std::move(content);
    return v;
}

} // namespace

std::string pad_card(std::string text) {
    if (text.size() < kCardWidth) text.append(kCardWidth - text.size(), ' ');
    return text;
}

std::string card_keyword(const std::string& card) {
    std::string kw = card.substr(0, std::min<std::size_t>(8, card.size()));
    while (!kw.empty() && kw.back() == ' ') kw.pop_back();
    return kw;
}

std::vector<std::string> encode_string_card(const std::string& keyword, const std::string& value) {
    if (keyword.empty() || keyword.size() > 8)
        fail(Errc::malformed_card, "keyword '" + keyword + "' must be 1-8 characters");
    for (char c : keyword)
        if (c == ' ' || static_cast<unsigned char>(c) < 0x21)
            fail(Errc::malformed_card, "keyword '" + keyword + "' contains blanks");
    for (char c : value)
        if (static_cast<unsigned char>(c) < 0x20)
            fail(Errc::malformed_card,
                 "value of " + keyword + " contains a control character");

    const std::string head = pad_card(keyword).substr(0, 8) + "= ";
    // 80 - 10 head - 2 quotes = 68 content columns on the first card;
    // CONTINUE cards have the same budget ("CONTINUE  " is also 10 columns)
    constexpr std::size_t budget = 68;

    const std::vector<std::string> tokens = quote_tokens(value);
    std::size_t total = 0;
    for (const std::string& tok : tokens) total += tok.size();
    if (total <= budget) {
        std::string content;
        for (const std::string& tok : tokens) content += tok;
        return {quoted_card(head, content)};
    }

    // split values leave one column per card for the '&' marker
    std::vector<std::string> chunks{""};
    for (const std::string& tok : tokens) {
        if (chunks.back().size() + tok.size() > budget - 1) chunks.emplace_back();
        chunks.back() += tok;
    }

    std::vector<std::string> cards;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const bool last = i + 1 == chunks.size();
        const std::string content = last ? chunks[i] : chunks[i] + "&";
        cards.push_back(quoted_card(i == 0 ? head : "CONTINUE  ", content));
    }
    return cards;
}

CardValue parse_value_card(const std::string& card, std::size_t index) {
    if (card.size() > kCardWidth) malformed(index, "longer than 80 columns");
    if (card.size() < 10 || card.substr(8, 2) != "= ")
        malformed(index, "missing '= ' value indicator");
    std::size_t pos = 10;
    while (pos < card.size() && card[pos] == ' ') ++pos;
    if (pos < card.size() && card[pos] == '\'')
        return finish_string_value(scan_quoted(card, pos, index));
    // unquoted value: up to an optional comment, surrounding blanks trimmed
    std::string text = card.substr(pos);
    if (const std::size_t slash = text.find('/'); slash != std::string::npos)
        text.resize(slash);
    while (!text.empty() && text.back() == ' ') text.pop_back();
    if (text.empty()) malformed(index, "empty value");
    return {text, false};
}

CardValue parse_continue_card(const std::string& card, std::size_t index) {
    if (card.size() > kCardWidth) malformed(index, "longer than 80 columns");
    std::size_t pos = 8;
    while (pos < card.size() && card[pos] == ' ') ++pos;
    if (pos >= card.size() || card[pos] != '\'')
        malformed(index, "CONTINUE carries no quoted string");
    return finish_string_value(scan_quoted(card, pos, index));
}

std::vector<std::string> read_text_cards(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open " + path);
    std::vector<std::string> cards;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (card_keyword(line) == "END") break;
        cards.push_back(line);
    }
    return cards;
}

void write_text_cards(const std::string& path, const std::vector<std::string>& cards) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot open " + path + " for writing");
    for (const std::string& card : cards) out << card << "\n";
    out << pad_card("END") << "\n";
    if (!out) fail(Errc::io_error, "failed writing " + path);
}

std::vector<std::string> read_fits_header_cards(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_error, "cannot open " + path);
    std::vector<std::string> cards;
    std::string block(kFitsBlockSize, '\0');
    while (in.read(block.data(), kFitsBlockSize)) {
        for (std::size_t off = 0; off < kFitsBlockSize; off += kCardWidth) {
            std::string card = block.substr(off, kCardWidth);
            if (card_keyword(card) == "END") return cards;
            cards.push_back(std::move(card));
        }
    }
    if (in.gcount() != 0)
        fail(Errc::malformed_card, path + ": size is not a multiple of 2880 bytes");
    fail(Errc::malformed_card, path + ": no END card in any header block");
}

void write_fits_header_file(const std::string& path, const std::vector<std::string>& cards) {
    std::vector<std::string> all;
    auto fixed = [](const std::string& keyword, const std::string& value) {
        std::string head = pad_card(keyword).substr(0, 8) + "= ";
        return pad_card(head + std::string(20 - value.size(), ' ') + value);
    };
    all.push_back(fixed("SIMPLE", "T"));
    all.push_back(fixed("BITPIX", "8"));
    all.push_back(fixed("NAXIS", "0"));
    for (const std::string& card : cards) all.push_back(pad_card(card));
    all.push_back(pad_card("END"));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot open " + path + " for writing");
    std::string text;
    for (const std::string& card : all) text += card;
    const std::size_t tail = text.size() % kFitsBlockSize;
    if (tail != 0) text.append(kFitsBlockSize - tail, ' ');
    out << text;
    if (!out) fail(Errc::io_error, "failed writing " + path);
}

} // namespace provkit
