#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uq {

enum class Errc {
    InvalidInput,
    EmptyVote,
    EmptyDataset,
    LengthMismatch,
    MissingSlot,
    UnparsableVerdict,
    UnparsableJudgment,
    InvalidModel,
    BackendUnavailable,
    BudgetExceeded,
    Transport,
    QuotaExhausted,
    UnknownQuestion,
    UnknownAnswer,
    DuplicateAnswer,
    InvalidConfidence,
    Unauthorized,
    Io,
};

std::string_view errc_name(Errc code) noexcept;

// Backend and budget failures map to exit code 2 in the CLI; everything else
// is an input or validation problem.
bool is_backend_failure(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Thrown by transports; `retryable` marks network failures and 5xx/429 replies.
class TransportError : public Error {
public:
    TransportError(const std::string& message, int status, bool retryable)
        : Error(Errc::Transport, message), status_(status), retryable_(retryable) {}

    int status() const noexcept { return status_; }
    bool retryable() const noexcept { return retryable_; }

private:
    int status_;
    bool retryable_;
};

}  // namespace uq
