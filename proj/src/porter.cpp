#include "porter.hpp"

#include <array>
#include <cstddef>

namespace ureca {

namespace {

bool is_lower_consonant_at(const std::string& w, std::size_t i) {
    const char c = w[i];
    switch (c) {
    case 'a':
    case 'e':
    case 'i':
    case 'o':
    case 'u':
        return false;
    case 'y':
        return i == 0 ? true : !is_lower_consonant_at(w, i - 1);
    default:
        return true;
    }
}

// Porter's measure m: number of VC sequences in [C](VC)^m[V].
int measure(const std::string& w) {
    int m = 0;
    std::size_t i = 0;
    const std::size_t n = w.size();
    while (i < n && is_lower_consonant_at(w, i)) {
        ++i;
    }
    while (i < n) {
        while (i < n && !is_lower_consonant_at(w, i)) {
            ++i;
        }
        if (i == n) {
            break;
        }
        ++m;
        while (i < n && is_lower_consonant_at(w, i)) {
            ++i;
        }
    }
    return m;
}

bool contains_vowel(const std::string& w) {
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!is_lower_consonant_at(w, i)) {
            return true;
        }
    }
    return false;
}

bool ends_double_consonant(const std::string& w) {
    const std::size_t n = w.size();
    return n >= 2 && w[n - 1] == w[n - 2] && is_lower_consonant_at(w, n - 1);
}

// *o: ends cvc where the final c is not w, x or y.
bool ends_cvc(const std::string& w) {
    const std::size_t n = w.size();
    if (n < 3) {
        return false;
    }
    if (!is_lower_consonant_at(w, n - 3) || is_lower_consonant_at(w, n - 2) ||
        !is_lower_consonant_at(w, n - 1)) {
        return false;
    }
    const char c = w[n - 1];
    return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(const std::string& w, const char* suffix) {
    const std::size_t sn = std::char_traits<char>::length(suffix);
    return w.size() >= sn && w.compare(w.size() - sn, sn, suffix) == 0;
}

std::string stem_part(const std::string& w, const char* suffix) {
    return w.substr(0, w.size() - std::char_traits<char>::length(suffix));
}

// Replace suffix when the stem measure clears min_m. Returns true when the
// suffix matched at all (rule consumed), regardless of the measure test.
bool rule(std::string& w, const char* suffix, const char* replacement, int min_m) {
    if (!ends_with(w, suffix)) {
        return false;
    }
    const std::string stem = stem_part(w, suffix);
    if (measure(stem) > min_m) {
        w = stem + replacement;
    }
    return true;
}

} // namespace

std::string porter_stem(const std::string& word) {
    if (word.size() < 3) {
        return word;
    }
    std::string w = word;

    // step 1a
    if (ends_with(w, "sses")) {
        w = stem_part(w, "es");
    } else if (ends_with(w, "ies")) {
        w = stem_part(w, "es");
    } else if (!ends_with(w, "ss") && ends_with(w, "s")) {
        w = stem_part(w, "s");
    }

    // step 1b
    bool cleanup = false;
    if (ends_with(w, "eed")) {
        if (measure(stem_part(w, "eed")) > 0) {
            w = stem_part(w, "d");
        }
    } else if (ends_with(w, "ed") && contains_vowel(stem_part(w, "ed"))) {
        w = stem_part(w, "ed");
        cleanup = true;
    } else if (ends_with(w, "ing") && contains_vowel(stem_part(w, "ing"))) {
        w = stem_part(w, "ing");
        cleanup = true;
    }
    if (cleanup) {
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
            w += 'e';
        } else if (ends_double_consonant(w) && !ends_with(w, "l") && !ends_with(w, "s") &&
                   !ends_with(w, "z")) {
            w.pop_back();
        } else if (measure(w) == 1 && ends_cvc(w)) {
            w += 'e';
        }
    }

    // step 1c
    if (ends_with(w, "y") && contains_vowel(stem_part(w, "y"))) {
        w.back() = 'i';
    }

    // step 2
    static constexpr std::array<std::pair<const char*, const char*>, 20> step2{{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    }};
    for (const auto& [suffix, repl] : step2) {
        if (rule(w, suffix, repl, 0)) {
            break;
        }
    }

    // step 3
    static constexpr std::array<std::pair<const char*, const char*>, 7> step3{{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    }};
    for (const auto& [suffix, repl] : step3) {
        if (rule(w, suffix, repl, 0)) {
            break;
        }
    }

    // step 4
    static constexpr std::array<const char*, 18> step4{{
        "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ou",
        "ism", "ate", "iti", "ous", "ive", "ize",
    }};
    bool consumed = false;
    if (ends_with(w, "ion")) {
        const std::string stem = stem_part(w, "ion");
        if (!stem.empty() && (stem.back() == 's' || stem.back() == 't')) {
            if (measure(stem) > 1) {
                w = stem;
            }
            consumed = true;
        }
    }
    if (!consumed) {
        // longest-match first among the plain suffixes
        const char* best = nullptr;
        for (const char* suffix : step4) {
            if (ends_with(w, suffix)) {
                if (!best ||
                    std::char_traits<char>::length(suffix) >
                        std::char_traits<char>::length(best)) {
                    best = suffix;
                }
            }
        }
        if (best && measure(stem_part(w, best)) > 1) {
            w = stem_part(w, best);
        }
    }

    // step 5a
    if (ends_with(w, "e")) {
        const std::string stem = stem_part(w, "e");
        const int m = measure(stem);
        if (m > 1 || (m == 1 && !ends_cvc(stem))) {
            w = stem;
        }
    }
    // step 5b
    if (measure(w) > 1 && ends_double_consonant(w) && ends_with(w, "l")) {
        w.pop_back();
    }
    return w;
}

} // namespace ureca
