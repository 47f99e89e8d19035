#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace scin {

// Every failure raised by the library carries one of these kinds. The CLI maps
// kinds onto process exit codes (see exit_code()).
enum class ErrorKind {
    invalid_shape,
    invalid_range,
    invalid_hyperparameter,
    invalid_label,
    invalid_parameter,
    shape_mismatch,
    config,
    manifest,
    ingest,
    too_small,
    stratification,
    evaluation,
    divergence,
    io,
    corrupt_checkpoint,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Corrupt checkpoints additionally name the field that failed validation.
class CorruptCheckpointError : public Error {
public:
    CorruptCheckpointError(std::string field, const std::string& message)
        : Error(ErrorKind::corrupt_checkpoint, "corrupt checkpoint (" + field + "): " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Divergence carries the position in training where a non-finite loss appeared.
class DivergenceError : public Error {
public:
    DivergenceError(int epoch, int batch, double loss);

    int epoch() const noexcept { return epoch_; }
    int batch() const noexcept { return batch_; }

private:
    int epoch_;
    int batch_;
};

/// Process exit codes used by the command-line tool.
///   0 success, 1 usage, 2 config, 3 ingest, 4 divergence, 5 io, 6 corrupt checkpoint
int exit_code(ErrorKind kind) noexcept;

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace scin
