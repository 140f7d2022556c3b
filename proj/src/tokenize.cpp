#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <string_view>
#include <unordered_map>

#include "lifelog/errors.hpp"
#include "lifelog/similarity.hpp"

namespace lifelog {
namespace {

// en-v1: function words plus the fragments left behind when the tokenizer
// splits contractions at the apostrophe ("don't" -> don, t).
constexpr std::string_view kEnglishV1[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she",
    "her", "hers", "herself", "it", "its", "itself", "they", "them", "their",
    "theirs", "themselves", "what", "which", "who", "whom", "this", "that",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being",
    "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
    "the", "and", "but", "if", "or", "because", "as", "until", "while", "of",
    "at", "by", "for", "with", "about", "against", "between", "into",
    "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again",
    "further", "then", "once", "here", "there", "when", "where", "why", "how",
    "all", "any", "both", "each", "few", "more", "most", "other", "some",
    "such", "no", "nor", "not", "only", "own", "same", "so", "than", "too",
    "very", "s", "t", "can", "will", "just", "don", "should", "now", "d",
    "ll", "m", "o", "re", "ve", "y", "ain", "aren", "couldn", "didn",
    "doesn", "hadn", "hasn", "haven", "isn", "ma", "mightn", "mustn",
    "needn", "shan", "shouldn", "wasn", "weren", "won", "wouldn",
};

std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            ++i;
            out.push_back(0xFFFD);
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(0xFFFD);
            break;
        }
        bool ok = true;
        for (size_t k = 1; k < len; ++k) {
            const auto bk = static_cast<unsigned char>(s[i + k]);
            if ((bk & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (bk & 0x3F);
        }
        if (!ok || (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
            (len == 4 && cp < 0x10000) || cp > 0x10FFFF) {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Simple one-to-one lowercase covering ASCII, Latin-1/Extended-A, Greek
// and Cyrillic. Anything else passes through unchanged.
char32_t simple_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
        if (cp == 0x130) return 0x69;  // dotted capital I -> i
        if (cp == 0x131) return cp;    // dotless i is already lowercase
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x391 && cp <= 0x3A1) || (cp >= 0x3A3 && cp <= 0x3AB)) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

// (lowercase base << 16) | combining mark -> precomposed lowercase letter.
const std::unordered_map<uint32_t, char32_t>& composition_table() {
    static const auto* table = [] {
        auto* t = new std::unordered_map<uint32_t, char32_t>();
        auto add = [&](char32_t base, char32_t mark, char32_t composed) {
            (*t)[(static_cast<uint32_t>(base) << 16) | static_cast<uint32_t>(mark)] = composed;
        };
        add('a', 0x300, 0xE0), add('a', 0x301, 0xE1), add('a', 0x302, 0xE2);
        add('a', 0x303, 0xE3), add('a', 0x308, 0xE4), add('a', 0x30A, 0xE5);
        add('a', 0x304, 0x101), add('a', 0x306, 0x103), add('a', 0x328, 0x105);
        add('c', 0x327, 0xE7), add('c', 0x301, 0x107), add('c', 0x302, 0x109);
        add('c', 0x307, 0x10B), add('c', 0x30C, 0x10D);
        add('d', 0x30C, 0x10F);
        add('e', 0x300, 0xE8), add('e', 0x301, 0xE9), add('e', 0x302, 0xEA);
        add('e', 0x308, 0xEB), add('e', 0x304, 0x113), add('e', 0x306, 0x115);
        add('e', 0x307, 0x117), add('e', 0x328, 0x119), add('e', 0x30C, 0x11B);
        add('g', 0x302, 0x11D), add('g', 0x306, 0x11F), add('g', 0x307, 0x121);
        add('g', 0x327, 0x123);
        add('h', 0x302, 0x125);
        add('i', 0x300, 0xEC), add('i', 0x301, 0xED), add('i', 0x302, 0xEE);
        add('i', 0x308, 0xEF), add('i', 0x303, 0x129), add('i', 0x304, 0x12B);
        add('i', 0x306, 0x12D), add('i', 0x328, 0x12F);
        add('j', 0x302, 0x135);
        add('k', 0x327, 0x137);
        add('l', 0x301, 0x13A), add('l', 0x327, 0x13C), add('l', 0x30C, 0x13E);
        add('n', 0x303, 0xF1), add('n', 0x301, 0x144), add('n', 0x327, 0x146);
        add('n', 0x30C, 0x148);
        add('o', 0x300, 0xF2), add('o', 0x301, 0xF3), add('o', 0x302, 0xF4);
        add('o', 0x303, 0xF5), add('o', 0x308, 0xF6), add('o', 0x304, 0x14D);
        add('o', 0x306, 0x14F), add('o', 0x30B, 0x151);
        add('r', 0x301, 0x155), add('r', 0x327, 0x157), add('r', 0x30C, 0x159);
        add('s', 0x301, 0x15B), add('s', 0x302, 0x15D), add('s', 0x327, 0x15F);
        add('s', 0x30C, 0x161);
        add('t', 0x327, 0x163), add('t', 0x30C, 0x165);
        add('u', 0x300, 0xF9), add('u', 0x301, 0xFA), add('u', 0x302, 0xFB);
        add('u', 0x308, 0xFC), add('u', 0x303, 0x169), add('u', 0x304, 0x16B);
        add('u', 0x306, 0x16D), add('u', 0x30A, 0x16F), add('u', 0x30B, 0x171);
        add('u', 0x328, 0x173);
        add('w', 0x302, 0x175);
        add('y', 0x301, 0xFD), add('y', 0x302, 0x177), add('y', 0x308, 0xFF);
        add('z', 0x301, 0x17A), add('z', 0x307, 0x17C), add('z', 0x30C, 0x17E);
        return t;
    }();
    return *table;
}

char32_t compose_pair(char32_t base, char32_t mark) {
    // Hangul LV / LVT composition is algorithmic.
    if (mark >= 0x1161 && mark <= 0x1175 && base >= 0x1100 && base <= 0x1112) {
        return 0xAC00 + (base - 0x1100) * 588 + (mark - 0x1161) * 28;
    }
    if (mark >= 0x11A8 && mark <= 0x11C2 && base >= 0xAC00 && base <= 0xD7A3 &&
        (base - 0xAC00) % 28 == 0) {
        return base + (mark - 0x11A7);
    }
    if (mark >= 0x300 && mark <= 0x36F) {
        const auto& table = composition_table();
        auto it = table.find((static_cast<uint32_t>(base) << 16) | static_cast<uint32_t>(mark));
        if (it != table.end()) return it->second;
    }
    return 0;
}

bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
               (cp >= '0' && cp <= '9');
    }
    if (cp == 0xA0 || (cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7) return false;
    if (cp == 0xFFFD) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;   // general punctuation
    if (cp >= 0x2E00 && cp <= 0x2E7F) return false;   // supplemental punctuation
    if (cp >= 0x3000 && cp <= 0x303F) return false;   // CJK symbols
    if (cp >= 0xFE50 && cp <= 0xFE6F) return false;   // small form variants
    if (cp >= 0xFF01 && cp <= 0xFF0F) return false;   // fullwidth punctuation
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    if (cp >= 0xFF3B && cp <= 0xFF40) return false;
    if (cp >= 0xFF5B && cp <= 0xFF65) return false;
    return true;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<char32_t> norm;
    norm.reserve(text.size());
    for (char32_t cp : decode_utf8(text)) {
        cp = simple_lower(cp);
        if (!norm.empty()) {
            if (char32_t composed = compose_pair(norm.back(), cp)) {
                norm.back() = composed;
                continue;
            }
        }
        norm.push_back(cp);
    }

    std::vector<std::string> tokens;
    std::string current;
    for (char32_t cp : norm) {
        if (is_word_char(cp)) {
            append_utf8(current, cp);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> tokenize(const std::string& text, const StopwordList& stopwords) {
    std::vector<std::string> tokens = tokenize(text);
    std::erase_if(tokens, [&](const std::string& t) { return stopwords.contains(t); });
    return tokens;
}

const StopwordList& StopwordList::english_v1() {
    static const StopwordList* list = [] {
        auto* l = new StopwordList();
        l->version = "en-v1";
        for (std::string_view w : kEnglishV1) l->words.emplace(w);
        return l;
    }();
    return *list;
}

StopwordList StopwordList::none() { return StopwordList{.version = "none", .words = {}}; }

StopwordList StopwordList::from_file(const std::string& path, std::string version_tag) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stopword file: " + path);
    StopwordList list;
    list.version = std::move(version_tag);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        list.words.insert(line.substr(first));
    }
    return list;
}

}  // namespace lifelog
