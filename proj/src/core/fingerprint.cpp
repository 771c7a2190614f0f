#include "uq/core/fingerprint.hpp"

#include <array>

#include <openssl/evp.h>

#include "uq/core/error.hpp"

namespace uq {

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::Io, "SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0f]);
    }
    return out;
}

std::string canonical_bytes(const json& value) {
    // nlohmann::json objects are std::map-backed, so keys serialize sorted.
    return value.dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string fingerprint(const json& value) { return sha256_hex(canonical_bytes(value)); }

std::string canonical_fingerprint(const QuestionRecord& question, const CandidateAnswer& answer,
                                  std::string_view prompt_text, const Sampling& sampling) {
    json answer_json = answer;
    answer_json.erase("prompt_fingerprint");
    const json payload{{"question", question},
                       {"answer", std::move(answer_json)},
                       {"prompt", std::string(prompt_text)},
                       {"sampling", sampling}};
    return fingerprint(payload);
}

}  // namespace uq
