#pragma once

#include <stdexcept>
#include <string>

namespace periodscope {

// Base for all domain errors. `code()` is the stable machine-readable name
// surfaced in API error bodies.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class DecodingError : public Error {
public:
    DecodingError(std::size_t line, const std::string& what)
        : Error("DecodingError", "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MalformedTriple : public Error {
public:
    MalformedTriple(std::size_t line, const std::string& what)
        : Error("MalformedTriple", "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line_number() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnknownCategory : public Error {
public:
    explicit UnknownCategory(const std::string& iri)
        : Error("UnknownCategory", "unknown category: " + iri) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error("ValidationError", message) {}
};

class DuplicateDocId : public Error {
public:
    explicit DuplicateDocId(const std::string& doc_id)
        : Error("DuplicateDocId", "duplicate doc_id: " + doc_id) {}
};

class OffsetOutOfBounds : public Error {
public:
    OffsetOutOfBounds(const std::string& doc_id, std::size_t link_index)
        : Error("OffsetOutOfBounds",
                "link " + std::to_string(link_index) + " of " + doc_id + " is out of bounds"),
          doc_id_(doc_id), link_index_(link_index) {}
    const std::string& doc_id() const noexcept { return doc_id_; }
    std::size_t link_index() const noexcept { return link_index_; }

private:
    std::string doc_id_;
    std::size_t link_index_;
};

class SurfaceMismatch : public Error {
public:
    SurfaceMismatch(const std::string& doc_id, std::size_t link_index)
        : Error("SurfaceMismatch", "link " + std::to_string(link_index) + " of " + doc_id +
                                       ": surface does not match text"),
          doc_id_(doc_id), link_index_(link_index) {}
    const std::string& doc_id() const noexcept { return doc_id_; }
    std::size_t link_index() const noexcept { return link_index_; }

private:
    std::string doc_id_;
    std::size_t link_index_;
};

class CorpusFormatError : public Error {
public:
    CorpusFormatError(std::size_t line, const std::string& what)
        : Error("CorpusFormatError", "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line_number() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnknownTarget : public Error {
public:
    explicit UnknownTarget(const std::string& iri)
        : Error("UnknownTarget", "target not in session scope: " + iri) {}
};

class UnknownDocument : public Error {
public:
    explicit UnknownDocument(const std::string& doc_id)
        : Error("UnknownDocument", "unknown document: " + doc_id) {}
};

class FragmentNotInResultSet : public Error {
public:
    explicit FragmentNotInResultSet(const std::string& message)
        : Error("FragmentNotInResultSet", message) {}
};

class UnknownSession : public Error {
public:
    explicit UnknownSession(const std::string& id) : Error("UnknownSession", "unknown session: " + id) {}
};

class ExportFormatError : public Error {
public:
    explicit ExportFormatError(const std::string& message) : Error("ExportFormatError", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("ConfigError", message) {}
};

}  // namespace periodscope
