#pragma once

#include <stdexcept>
#include <string>

namespace countpa {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct CaptureError : Error {
    explicit CaptureError(const std::string& msg) : Error(msg) {}
};

struct SignatureError : Error {
    explicit SignatureError(const std::string& msg) : Error(msg) {}
};

struct UnsupportedNode : Error {
    explicit UnsupportedNode(const std::string& msg) : Error(msg) {}
};

struct NotPresbAtom : Error {
    explicit NotPresbAtom(const std::string& msg) : Error(msg) {}
};

struct SizeBudgetExceeded : Error {
    explicit SizeBudgetExceeded(const std::string& msg) : Error(msg) {}
};

struct SubsetBudgetExceeded : Error {
    explicit SubsetBudgetExceeded(const std::string& msg) : Error(msg) {}
};

struct OutOfUniverse : Error {
    explicit OutOfUniverse(const std::string& msg) : Error(msg) {}
};

struct UnknownRelation : Error {
    explicit UnknownRelation(const std::string& msg) : Error(msg) {}
};

struct InvalidParams : Error {
    explicit InvalidParams(const std::string& msg) : Error(msg) {}
};

}  // namespace countpa
