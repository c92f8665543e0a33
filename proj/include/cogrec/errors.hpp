// errors.hpp — exception hierarchy shared across the toolkit.
//
// Every failure mode named in the public contracts has its own type so
// callers (and the CLI) can map errors to exit codes without string
// matching. All of them carry a human-readable message that names the
// offending file, row, or player where applicable.

#pragma once

#include <stdexcept>
#include <string>

namespace cogrec {

/// Base class for all toolkit errors. Data/validation problems derive
/// from this; anything else escaping the library is a plain std::exception.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ── Session ingestion ────────────────────────────────────────────────

class MissingChannel : public Error {
public:
    using Error::Error;
};

class NonUniformSampling : public Error {
public:
    using Error::Error;
};

class OverlappingLabels : public Error {
public:
    using Error::Error;
};

class NaNSample : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// ── Preprocessing ────────────────────────────────────────────────────

class TooShort : public Error {
public:
    using Error::Error;
};

class FlatSignal : public Error {
public:
    using Error::Error;
};

// ── Features / evaluation ────────────────────────────────────────────

class UnknownPlayer : public Error {
public:
    using Error::Error;
};

class SinglePlayerCorpus : public Error {
public:
    using Error::Error;
};

class InsufficientRounds : public Error {
public:
    using Error::Error;
};

class SamePlayer : public Error {
public:
    using Error::Error;
};

class EmptyMatrix : public Error {
public:
    using Error::Error;
};

// ── Model ────────────────────────────────────────────────────────────

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class LabelOutOfRange : public Error {
public:
    using Error::Error;
};

class FeatureOrderMismatch : public Error {
public:
    using Error::Error;
};

class VersionMismatch : public Error {
public:
    using Error::Error;
};

class CorruptModel : public Error {
public:
    using Error::Error;
};

}  // namespace cogrec
