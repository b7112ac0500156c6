#pragma once

#include <atomic>
#include <memory>

#include "zv/config.hpp"
#include "zv/datagen/prompt.hpp"

namespace zv::datagen {

// Teacher-model interface. The shipped mock is a pure function of its
// inputs, so pipelines built on it replay byte-identically.
class TeacherClient {
public:
    virtual ~TeacherClient() = default;
    virtual std::string complete(const std::string& system,
                                 const std::vector<Message>& messages) = 0;
    virtual std::string identity() const = 0;
};

// Deterministic offline stand-in: derives a language-appropriate pair from a
// hash of the prompt. Honors the "Target language:" line and the template's
// "kind:" marker, and emits the fenced block the parser expects.
class MockTeacherClient : public TeacherClient {
public:
    std::string complete(const std::string& system, const std::vector<Message>& messages) override;
    std::string identity() const override { return "mock:v1"; }
};

// Returns prose with no fenced block; exercises the reject path.
class ProseMockClient : public TeacherClient {
public:
    std::string complete(const std::string& system, const std::vector<Message>& messages) override;
    std::string identity() const override { return "mock-prose:v1"; }
};

// Fails every n-th call (1-based); exercises retry and failure accounting.
class FlakyClient : public TeacherClient {
public:
    FlakyClient(TeacherClient& inner, int fail_every) : inner_(inner), fail_every_(fail_every) {}
    std::string complete(const std::string& system, const std::vector<Message>& messages) override;
    std::string identity() const override { return inner_.identity() + "+flaky"; }

private:
    TeacherClient& inner_;
    int fail_every_;
    std::atomic<long> calls_{0};
};

// POSTs {system, messages} as JSON and expects the completion text back.
// The credential is read from the named environment variable, never stored.
class HttpTeacherClient : public TeacherClient {
public:
    HttpTeacherClient(std::string host, int port, std::string path, std::string key_env);
    std::string complete(const std::string& system, const std::vector<Message>& messages) override;
    std::string identity() const override;

private:
    std::string host_, path_, key_env_;
    int port_;
};

std::unique_ptr<TeacherClient> make_client(const std::string& spec, const zv::IniConfig& cfg);

}  // namespace zv::datagen
