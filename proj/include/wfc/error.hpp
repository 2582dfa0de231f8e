#pragma once

#include <stdexcept>
#include <string>

namespace wfc {

/// Base for every error the toolkit raises on bad input data.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class NotAWorkflow : public Error {
public:
    using Error::Error;
};

class EmptyCorpus : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class IdMismatch : public Error {
public:
    using Error::Error;
};

class MissingRoot : public Error {
public:
    using Error::Error;
};

class ModelMissing : public Error {
public:
    using Error::Error;
};

// Raised for malformed configuration (bad ratios, mask rate out of range, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace wfc
