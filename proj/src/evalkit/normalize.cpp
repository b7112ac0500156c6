#include "zv/evalkit/normalize.hpp"

#include <cctype>
#include <sstream>

namespace zv::eval {

std::vector<std::string> caption_tokens(const std::string& text) {
    std::string clean;
    clean.reserve(text.size());
    for (unsigned char c : text) {
        if (std::ispunct(c)) continue;
        clean.push_back(static_cast<char>(std::tolower(c)));
    }
    std::vector<std::string> out;
    std::istringstream in(clean);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::string normalize_answer(const std::string& text) {
    std::string out;
    bool first = true;
    for (const std::string& tok : caption_tokens(text)) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        if (!first) out.push_back(' ');
        out += tok;
        first = false;
    }
    return out;
}

}  // namespace zv::eval
