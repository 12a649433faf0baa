#pragma once

#include <stdexcept>
#include <string>

namespace mc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedUri : Error {
    using Error::Error;
};

// Link-format parse failures carry the 1-based line and 0-based offset of
// the offending character.
struct LinkSyntaxError : Error {
    int line;
    int offset;
    LinkSyntaxError(const std::string& msg, int line_, int offset_)
        : Error(msg + " (line " + std::to_string(line_) + ", offset " +
                std::to_string(offset_) + ")"),
          line(line_), offset(offset_) {}
};

struct InvalidMementoEntry : LinkSyntaxError {
    using LinkSyntaxError::LinkSyntaxError;
};

struct MissingOriginal : Error {
    using Error::Error;
};

struct CdxFieldCount : Error {
    int line;
    CdxFieldCount(const std::string& msg, int line_)
        : Error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

struct CdxBadTimestamp : Error {
    int line;
    CdxBadTimestamp(const std::string& msg, int line_)
        : Error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

struct CdxjMetaError : Error {
    int line;
    CdxjMetaError(const std::string& msg, int line_)
        : Error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

struct CdxjEntryError : Error {
    int line;
    CdxjEntryError(const std::string& msg, int line_)
        : Error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

struct NetworkTimeout : Error {
    using Error::Error;
};

struct UpstreamError : Error {
    int status;
    UpstreamError(const std::string& msg, int status_)
        : Error(msg + " (HTTP " + std::to_string(status_) + ")"),
          status(status_) {}
};

struct ParseFailure : Error {
    using Error::Error;
};

struct IdentityUnavailable : Error {
    using Error::Error;
};

struct MissingOutcome : Error {
    using Error::Error;
};

struct StoreCorrupt : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace mc
