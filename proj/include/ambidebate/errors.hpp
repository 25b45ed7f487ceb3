#pragma once

#include <stdexcept>
#include <string>

namespace ambidebate {

// Base for everything this library throws. code() is a stable, greppable
// identifier the CLI prints as `error[CODE]: ...`.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* code() const noexcept { return "E_RUNTIME"; }
};

// Distinct-instruction space (or the per-entry retry budget) ran out.
class VocabularyExhausted : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "E_VOCAB_EXHAUSTED"; }
};

class IoError : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "E_IO"; }
};

// Malformed structured input; carries the offending field path in the message.
class SchemaError : public Error {
public:
    SchemaError(const std::string& path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }
    const char* code() const noexcept override { return "E_SCHEMA"; }

private:
    std::string path_;
};

// Model response did not follow the marker grammar.
class ParseError : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "E_PARSE"; }
};

// Transport-level failure (connect/read/write); retryable.
class NetworkError : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "E_NETWORK"; }
};

class HttpStatusError : public Error {
public:
    HttpStatusError(int status, const std::string& what)
        : Error("HTTP " + std::to_string(status) + ": " + what), status_(status) {}
    int status() const noexcept { return status_; }
    const char* code() const noexcept override { return "E_HTTP_STATUS"; }

private:
    int status_ = 0;
};

// Scripted backend has no response queued for the requested key.
class ScriptExhausted : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "E_SCRIPT_EXHAUSTED"; }
};

// A record references an entry/model the current inputs do not know about.
class KeyMismatch : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "E_KEY_MISMATCH"; }
};

// Caller violated a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
    const char* code() const noexcept override { return "E_PRECONDITION"; }
};

} // namespace ambidebate
