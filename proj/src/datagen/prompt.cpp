#include "zv/datagen/prompt.hpp"

#include <sstream>

namespace zv::datagen {

std::string serialize_symbolic_image(const SymbolicImage& image) {
    std::string out = "captions:\n";
    for (const auto& c : image.captions) out += "- " + c + "\n";
    out += "boxes:\n";
    for (const auto& b : image.boxes)
        out += fmt::format("- {}:({:.3f},{:.3f},{:.3f},{:.3f})\n", b.tag, b.x1, b.y1, b.x2, b.y2);
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

Prompt build_prompt(const GenerationJob& job, const TemplateSet& templates) {
    job.validate();
    Prompt p;
    p.system = templates.kind(job.kind);
    if (job.rewrite) {
        p.system += "\n\n";
        p.system += templates.rewrite(*job.rewrite);
    }
    p.system += fmt::format("\n\nTarget language: {}", job.target_language);

    for (const auto& ex : job.exemplars) {
        p.messages.push_back({"user", serialize_symbolic_image(ex.image)});
        p.messages.push_back(
            {"assistant", fmt::format("instruction: {}\nresponse: {}", ex.instruction,
                                      ex.response)});
    }
    if (job.kind == JobKind::Translation) {
        p.messages.push_back({"user", fmt::format("instruction: {}\nresponse: {}",
                                                  job.source->instruction,
                                                  job.source->response)});
    } else {
        p.messages.push_back({"user", serialize_symbolic_image(*job.query)});
    }
    return p;
}

std::vector<std::pair<std::string, std::string>> parse_teacher_output(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    size_t pos = 0;
    const std::string open = "```pair";
    const std::string close = "```";
    while (true) {
        size_t start = text.find(open, pos);
        if (start == std::string::npos) break;
        size_t body_start = text.find('\n', start);
        if (body_start == std::string::npos) break;
        size_t end = text.find(close, body_start);
        if (end == std::string::npos) break;
        std::string body = text.substr(body_start + 1, end - body_start - 1);
        pos = end + close.size();

        std::istringstream in(body);
        std::string line;
        std::string instruction;
        std::string response;
        bool in_response = false;
        bool have_instruction = false;
        while (std::getline(in, line)) {
            if (!in_response && line.rfind("instruction:", 0) == 0) {
                instruction = line.substr(12);
                if (!instruction.empty() && instruction.front() == ' ')
                    instruction.erase(0, 1);
                have_instruction = true;
            } else if (!in_response && line.rfind("response:", 0) == 0) {
                response = line.substr(9);
                if (!response.empty() && response.front() == ' ') response.erase(0, 1);
                in_response = true;
            } else if (in_response) {
                response += "\n" + line;
            }
        }
        while (!response.empty() && response.back() == '\n') response.pop_back();
        if (have_instruction && in_response) out.emplace_back(instruction, response);
    }
    return out;
}

}  // namespace zv::datagen
