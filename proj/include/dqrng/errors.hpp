#pragma once

#include <stdexcept>
#include <string>

namespace dqrng {

// Base of every error raised by the library. Verification outcomes are
// reported as verdicts, never as exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

// A submission arrived in a phase that does not accept it.
class PhaseViolation : public Error {
public:
    using Error::Error;
};

// Reveal has the wrong shape: length, ordering, duplicate or out-of-range entries.
class MalformedReveal : public Error {
public:
    using Error::Error;
};

// Participant broke a protocol rule (e.g. revealed twice).
class ProtocolViolation : public Error {
public:
    using Error::Error;
};

class EmptySelection : public Error {
public:
    using Error::Error;
};

class InsufficientEntropy : public Error {
public:
    using Error::Error;
};

class FramingError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace dqrng
