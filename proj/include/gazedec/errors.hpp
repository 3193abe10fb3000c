#pragma once

#include <stdexcept>
#include <string>

namespace gazedec {

// Coarse grouping used by the CLI to pick exit codes:
// usage errors -> 2, data errors -> 3, compute errors -> 4.
enum class ErrorClass { Usage, Data, Compute };

enum class ErrorKind {
    // parsing / corpus
    MissingColumn,
    DanglingReference,
    DuplicateTrial,
    EmptyTrial,
    InvalidValue,
    MalformedCorpus,
    UnknownTrial,
    IoError,
    // features
    NoOnTextFixations,
    EmptyTrainingSet,
    // nn
    ShapeMismatch,
    NonFiniteActivation,
    NonFiniteGradient,
    DivergedTraining,
    NonConvergence,
    InvalidConfig,
    // eval
    TooFewFolds,
    SingleClass,
    ColumnMismatch,
    InvalidPercent,
    // lmm
    SingularDesign,
    MissingFeature,
    // cli
    UsageError,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, ErrorClass cls, const std::string& message)
        : std::runtime_error(message), kind_(kind), class_(cls) {}

    ErrorKind kind() const { return kind_; }
    ErrorClass error_class() const { return class_; }

private:
    ErrorKind kind_;
    ErrorClass class_;
};

inline Error data_error(ErrorKind kind, const std::string& message) {
    return Error(kind, ErrorClass::Data, message);
}

inline Error compute_error(ErrorKind kind, const std::string& message) {
    return Error(kind, ErrorClass::Compute, message);
}

inline Error usage_error(const std::string& message) {
    return Error(ErrorKind::UsageError, ErrorClass::Usage, message);
}

const char* error_kind_name(ErrorKind kind);

} // namespace gazedec
