#pragma once

#include <stdexcept>
#include <string>

namespace invforge {

enum class ErrorKind {
    UnknownElement,
    IndexOutOfRange,
    EmptyTarget,
    UnsupportedFormula,
    SignatureMismatch,
    NotInAge,
    BadEmbedding,
    UnsatisfiableDemand,
    NotDuplicableInAge,
    OrderTooSmall,
    NoSplittingDeclared,
    NotAMetricModel,
    EmptySource,
    StageBudgetExceeded,
    ConstantsUnsupported,
    InvalidAddress,
    ParseError,
    ConfigError,
};

inline const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::UnknownElement: return "UnknownElement";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::EmptyTarget: return "EmptyTarget";
        case ErrorKind::UnsupportedFormula: return "UnsupportedFormula";
        case ErrorKind::SignatureMismatch: return "SignatureMismatch";
        case ErrorKind::NotInAge: return "NotInAge";
        case ErrorKind::BadEmbedding: return "BadEmbedding";
        case ErrorKind::UnsatisfiableDemand: return "UnsatisfiableDemand";
        case ErrorKind::NotDuplicableInAge: return "NotDuplicableInAge";
        case ErrorKind::OrderTooSmall: return "OrderTooSmall";
        case ErrorKind::NoSplittingDeclared: return "NoSplittingDeclared";
        case ErrorKind::NotAMetricModel: return "NotAMetricModel";
        case ErrorKind::EmptySource: return "EmptySource";
        case ErrorKind::StageBudgetExceeded: return "StageBudgetExceeded";
        case ErrorKind::ConstantsUnsupported: return "ConstantsUnsupported";
        case ErrorKind::InvalidAddress: return "InvalidAddress";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace invforge
