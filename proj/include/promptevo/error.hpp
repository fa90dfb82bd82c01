#pragma once

#include <stdexcept>
#include <string>

namespace promptevo {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration or input files (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A provider (LLM, embedding, perplexity) failed or broke its contract.
class ProviderError : public Error {
public:
    using Error::Error;
};

}  // namespace promptevo
