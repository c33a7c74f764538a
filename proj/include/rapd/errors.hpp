#pragma once

#include <stdexcept>
#include <string>

namespace rapd {

// Base of every exception thrown by the library. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A contract between pipeline stages was broken (e.g. an unsmoothed trace).
class ContractError : public Error {
public:
    using Error::Error;
};

class LocalizationFailed : public Error {
public:
    using Error::Error;
};

class FitFailed : public Error {
public:
    using Error::Error;
};

/// The Hough threshold sweep ran out without detecting a circle.
class MeasurementFailed : public Error {
public:
    using Error::Error;
};

/// More than half of a sequence could not be measured.
class TraceUnusable : public Error {
public:
    using Error::Error;
};

class ExtractionError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

/// Weight file could not be loaded; the message names the offending field.
class LoadError : public Error {
public:
    using Error::Error;
};

/// A case directory, manifest or frame file could not be read.
class IngestionError : public Error {
public:
    using Error::Error;
};

}  // namespace rapd
