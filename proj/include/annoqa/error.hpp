#pragma once

#include <stdexcept>
#include <string>

namespace annoqa {

// Error categories map 1:1 onto CLI exit codes (see tools/annoqa.cpp):
// data errors -> 1, insufficient data -> 2, curation -> 3, evaluation -> 4,
// configuration -> 5.
enum class ErrorKind {
    Parse,             // malformed payload, bad syntax
    Referential,       // unknown image/annotator id
    Vocabulary,        // label outside the declared vocabulary
    Record,            // a single record is invalid (e.g. zero-area box)
    Validation,        // structural invariant broken
    InsufficientData,  // not enough pairable values / raters / images
    Curation,          // ground-truth construction failed (e.g. coverage hole)
    Evaluation,        // detector evaluation failed
    Config,            // bad configuration or arguments
    Io,                // file system failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::Parse:
            case ErrorKind::Referential:
            case ErrorKind::Vocabulary:
            case ErrorKind::Record:
            case ErrorKind::Validation:
            case ErrorKind::Io:
                return 1;
            case ErrorKind::InsufficientData:
                return 2;
            case ErrorKind::Curation:
                return 3;
            case ErrorKind::Evaluation:
                return 4;
            case ErrorKind::Config:
                return 5;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace annoqa
