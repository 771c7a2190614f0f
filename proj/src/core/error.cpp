#include "uq/core/error.hpp"

namespace uq {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidInput: return "InvalidInput";
        case Errc::EmptyVote: return "EmptyVote";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::MissingSlot: return "MissingSlot";
        case Errc::UnparsableVerdict: return "UnparsableVerdict";
        case Errc::UnparsableJudgment: return "UnparsableJudgment";
        case Errc::InvalidModel: return "InvalidModel";
        case Errc::BackendUnavailable: return "BackendUnavailable";
        case Errc::BudgetExceeded: return "BudgetExceeded";
        case Errc::Transport: return "Transport";
        case Errc::QuotaExhausted: return "QuotaExhausted";
        case Errc::UnknownQuestion: return "UnknownQuestion";
        case Errc::UnknownAnswer: return "UnknownAnswer";
        case Errc::DuplicateAnswer: return "DuplicateAnswer";
        case Errc::InvalidConfidence: return "InvalidConfidence";
        case Errc::Unauthorized: return "Unauthorized";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

bool is_backend_failure(Errc code) noexcept {
    switch (code) {
        case Errc::BackendUnavailable:
        case Errc::BudgetExceeded:
        case Errc::Transport:
        case Errc::QuotaExhausted:
        case Errc::UnparsableVerdict:
        case Errc::UnparsableJudgment:
            return true;
        default:
            return false;
    }
}

}  // namespace uq
