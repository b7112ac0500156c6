#include "zv/datagen/filters.hpp"

#include <algorithm>
#include <cctype>

namespace zv::datagen {

FilterRules FilterRules::from_config(const IniConfig& cfg) {
    FilterRules r;
    r.instruction_min = static_cast<size_t>(
        cfg.get_int("datagen", "instruction_min", static_cast<long>(r.instruction_min)));
    r.instruction_max = static_cast<size_t>(
        cfg.get_int("datagen", "instruction_max", static_cast<long>(r.instruction_max)));
    r.response_min = static_cast<size_t>(
        cfg.get_int("datagen", "response_min", static_cast<long>(r.response_min)));
    r.response_max = static_cast<size_t>(
        cfg.get_int("datagen", "response_max", static_cast<long>(r.response_max)));
    r.script_ratio = cfg.get_real("datagen", "script_ratio", r.script_ratio);
    return r;
}

namespace {

// Decodes one UTF-8 code point; returns its value and advances i. Invalid
// bytes decode as U+FFFD over one byte.
uint32_t decode_utf8(const std::string& s, size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra = 0;
    uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
        cp = c & 0x1F;
        extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
        cp = c & 0x0F;
        extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
        cp = c & 0x07;
        extra = 3;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + static_cast<size_t>(extra) >= s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k <= extra; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + static_cast<size_t>(k)]);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    i += static_cast<size_t>(extra) + 1;
    return cp;
}

bool is_cjk(uint32_t cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
           (cp >= 0xF900 && cp <= 0xFAFF);
}

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Scans for "(a,b,c,d)" numeric 4-tuples; each must satisfy a < c and b < d.
bool echoed_boxes_valid(const std::string& text) {
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '(') continue;
        double vals[4];
        size_t pos = i + 1;
        bool ok = true;
        for (int v = 0; v < 4 && ok; ++v) {
            while (pos < text.size() && text[pos] == ' ') ++pos;
            size_t consumed = 0;
            try {
                vals[v] = std::stod(text.substr(pos, 32), &consumed);
            } catch (const std::exception&) {
                ok = false;
                break;
            }
            pos += consumed;
            while (pos < text.size() && text[pos] == ' ') ++pos;
            char expect = v < 3 ? ',' : ')';
            if (pos >= text.size() || text[pos] != expect) {
                ok = false;
                break;
            }
            ++pos;
        }
        if (ok && (vals[0] >= vals[2] || vals[1] >= vals[3])) return false;
    }
    return true;
}

}  // namespace

double script_match_fraction(const std::string& text, const std::string& language) {
    size_t i = 0;
    long letters = 0, matched = 0;
    while (i < text.size()) {
        uint32_t cp = decode_utf8(text, i);
        bool ascii_alpha = cp < 0x80 && std::isalpha(static_cast<int>(cp));
        bool cjk = is_cjk(cp);
        if (!ascii_alpha && !cjk) continue;
        ++letters;
        if ((language == "zh" && cjk) || (language == "en" && ascii_alpha)) ++matched;
    }
    if (letters == 0) return 0.0;
    return static_cast<double>(matched) / static_cast<double>(letters);
}

FilterVerdict apply_filters(const InstructionResponsePair& pair, const FilterRules& rules) {
    FilterVerdict v;
    auto violate = [&](const char* id) { v.violations.push_back(id); };

    if (pair.instruction.size() < rules.instruction_min ||
        pair.instruction.size() > rules.instruction_max ||
        pair.response.size() < rules.response_min || pair.response.size() > rules.response_max)
        violate("R1");

    if (script_match_fraction(pair.response, pair.language) < rules.script_ratio) violate("R2");

    std::string lowered = lowercase(pair.response);
    for (const auto& phrase : rules.refusal_phrases) {
        if (lowered.find(lowercase(phrase)) != std::string::npos) {
            violate("R3");
            break;
        }
    }

    if (!echoed_boxes_valid(pair.instruction) || !echoed_boxes_valid(pair.response)) violate("R4");

    if (pair.instruction == pair.response) violate("R5");

    bool is_conversation = false;
    for (const auto& prov : pair.provenance)
        if (prov.kind == kind_name(JobKind::Conversation)) is_conversation = true;
    if (is_conversation) {
        // speaker-alternating turns: User first, Assistant last
        int state = 0;  // 0 = expect User, 1 = expect Assistant
        int turns = 0;
        bool bad = false;
        std::istringstream in(pair.response);
        std::string line;
        while (std::getline(in, line)) {
            bool user = line.rfind("User:", 0) == 0;
            bool assistant = line.rfind("Assistant:", 0) == 0;
            if (!user && !assistant) continue;  // continuation of the previous turn
            if ((state == 0 && !user) || (state == 1 && !assistant)) {
                bad = true;
                break;
            }
            state = 1 - state;
            ++turns;
        }
        if (bad || turns < 2 || state != 0) violate("R6");
    }

    v.pass = v.violations.empty();
    return v;
}

}  // namespace zv::datagen
