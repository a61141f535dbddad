#pragma once

#include <string>

#include "core/corpus.hpp"

namespace solaudit {

// Client for an Etherscan-compatible verified-source endpoint
// (module=contract&action=getsourcecode). The API key is read from the
// environment variable named in the config; an empty variable name means the
// endpoint needs no key (mock servers, some private explorers).
class ExplorerClient {
public:
    explicit ExplorerClient(CorpusConfig config);

    // Returns a record with raw_source and solc_version populated.
    // Multi-file responses are concatenated in returned order, each file
    // preceded by a `// ---- file: <name> ----` marker line (a comment, so
    // cleaning removes it again).
    ContractRecord fetch_verified_source(const std::string& address) const;

private:
    CorpusConfig config_;
    std::string api_key_;
};

}  // namespace solaudit
