#pragma once

#include "uq/gateway/model_call.hpp"

namespace uq::gateway {

// A model provider. Implementations throw TransportError for failures that
// the gateway may retry and uq::Error for everything else. Must be safe for
// concurrent calls.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ModelReply complete(const ModelCall& call) = 0;
};

}  // namespace uq::gateway
