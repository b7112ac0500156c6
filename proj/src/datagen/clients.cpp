#include "zv/datagen/clients.hpp"

#include <cstdlib>

#include <httplib.h>

#include "zv/config.hpp"
#include "zv/rng.hpp"

namespace zv::datagen {

namespace {

const std::vector<std::string> kEnWords = {
    "the",    "scene",   "shows",  "a",      "red",    "cube",   "wooden", "table",
    "near",   "window",  "light",  "falls",  "softly", "person", "stands", "beside",
    "green",  "plant",   "small",  "dog",    "rests",  "floor",  "blue",   "chair",
    "behind", "curtain", "open",   "book",   "lies",   "corner", "quiet",  "room"};

// Common CJK characters, one per entry, for the zh-flavored outputs.
const std::vector<std::string> kZhChars = {
    "图", "中", "一", "个", "红", "色", "方", "块", "放", "在", "木", "桌",
    "上", "靠", "近", "窗", "户", "光", "线", "柔", "和", "人", "站", "旁",
    "边", "绿", "植", "小", "狗", "休", "息", "地", "板", "蓝", "椅", "子"};

std::string en_sentence(Rng& rng, int words) {
    std::string s;
    for (int i = 0; i < words; ++i) {
        if (i) s += " ";
        s += kEnWords[static_cast<size_t>(rng.uniform_int(static_cast<int>(kEnWords.size())))];
    }
    return s;
}

std::string zh_sentence(Rng& rng, int chars) {
    std::string s;
    for (int i = 0; i < chars; ++i)
        s += kZhChars[static_cast<size_t>(rng.uniform_int(static_cast<int>(kZhChars.size())))];
    return s;
}

std::string marker_value(const std::string& text, const std::string& marker) {
    size_t pos = text.find(marker);
    if (pos == std::string::npos) return "";
    size_t start = pos + marker.size();
    while (start < text.size() && text[start] == ' ') ++start;
    size_t end = text.find('\n', start);
    return text.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

}  // namespace

std::string MockTeacherClient::complete(const std::string& system,
                                        const std::vector<Message>& messages) {
    uint64_t h = fnv1a64(system);
    for (const auto& m : messages) {
        h = fnv1a64(m.role, h);
        h = fnv1a64(m.content, h);
    }
    Rng rng(h);

    std::string lang = marker_value(system, "Target language:");
    bool zh = lang == "zh";
    bool conversation = system.find("kind: conversation") != std::string::npos ||
                        system.find("alternating \"User:\"") != std::string::npos;

    std::string instruction =
        zh ? zh_sentence(rng, 6 + rng.uniform_int(6)) + "？"
           : "What " + en_sentence(rng, 4 + rng.uniform_int(5)) + "?";
    std::string response;
    if (conversation) {
        int turns = 2 + rng.uniform_int(2);
        for (int turn = 0; turn < turns; ++turn) {
            response += "User: " + (zh ? zh_sentence(rng, 5 + rng.uniform_int(4)) + "？"
                                       : en_sentence(rng, 4 + rng.uniform_int(4)) + "?");
            response += "\n";
            response += "Assistant: " + (zh ? zh_sentence(rng, 8 + rng.uniform_int(8)) + "。"
                                            : en_sentence(rng, 6 + rng.uniform_int(8)) + ".");
            if (turn + 1 < turns) response += "\n";
        }
    } else {
        int sentences = 1 + rng.uniform_int(2);
        for (int s = 0; s < sentences; ++s) {
            if (s) response += " ";
            response += zh ? zh_sentence(rng, 10 + rng.uniform_int(10)) + "。"
                           : en_sentence(rng, 7 + rng.uniform_int(8)) + ".";
        }
    }
    return fmt::format("```pair\ninstruction: {}\nresponse: {}\n```\n", instruction, response);
}

std::string ProseMockClient::complete(const std::string& system,
                                      const std::vector<Message>& messages) {
    uint64_t h = fnv1a64(system);
    for (const auto& m : messages) h = fnv1a64(m.content, h);
    Rng rng(h);
    return "Here is a thought about the scene: " + en_sentence(rng, 12) + ".";
}

std::string FlakyClient::complete(const std::string& system,
                                  const std::vector<Message>& messages) {
    long n = calls_.fetch_add(1) + 1;
    if (fail_every_ > 0 && n % fail_every_ == 0)
        fail_runtime("simulated teacher failure on call {}", n);
    return inner_.complete(system, messages);
}

HttpTeacherClient::HttpTeacherClient(std::string host, int port, std::string path,
                                     std::string key_env)
    : host_(std::move(host)), path_(std::move(path)), key_env_(std::move(key_env)), port_(port) {}

std::string HttpTeacherClient::identity() const {
    return fmt::format("http:{}:{}{}", host_, port_, path_);
}

std::string HttpTeacherClient::complete(const std::string& system,
                                        const std::vector<Message>& messages) {
    ordered_json body;
    body["system"] = system;
    body["messages"] = ordered_json::array();
    for (const auto& m : messages) {
        ordered_json mj;
        mj["role"] = m.role;
        mj["content"] = m.content;
        body["messages"].push_back(std::move(mj));
    }
    httplib::Client cli(host_, port_);
    cli.set_read_timeout(30, 0);
    httplib::Headers headers;
    if (!key_env_.empty()) {
        const char* key = std::getenv(key_env_.c_str());
        if (key) headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) fail_runtime("teacher endpoint {} unreachable", identity());
    if (res->status != 200)
        fail_runtime("teacher endpoint {} returned status {}", identity(), res->status);
    return res->body;
}

std::unique_ptr<TeacherClient> make_client(const std::string& spec, const zv::IniConfig& cfg) {
    if (spec == "mock") return std::make_unique<MockTeacherClient>();
    if (spec == "mock-prose") return std::make_unique<ProseMockClient>();
    if (spec == "http") {
        std::string host = cfg.get_str("datagen", "http_host", "");
        int port = static_cast<int>(cfg.get_int("datagen", "http_port", 443));
        std::string path = cfg.get_str("datagen", "http_path", "/complete");
        std::string key_env = cfg.get_str("datagen", "http_key_env", "");
        require(!host.empty(), "http client needs [datagen] http_host in the config");
        return std::make_unique<HttpTeacherClient>(host, port, path, key_env);
    }
    fail("unknown client '{}', expected mock, mock-prose or http", spec);
}

}  // namespace zv::datagen
