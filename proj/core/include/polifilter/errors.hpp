#pragma once

#include <stdexcept>
#include <string>

namespace polifilter {

/// Base of everything thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad input data or arguments. The CLI maps these to exit code 2.
class InputError : public Error {
public:
  using Error::Error;
};

/// A remote service (generation backend, scorer) failed. Exit code 3.
class ServiceError : public Error {
public:
  using Error::Error;
};

struct MalformedSource : InputError { using InputError::InputError; };
struct UnmappableLabel : InputError { using InputError::InputError; };
struct BadCounts : InputError { using InputError::InputError; };
struct IoFailure : InputError { using InputError::InputError; };
struct InvalidSpan : InputError { using InputError::InputError; };
struct NoMaskToken : InputError { using InputError::InputError; };
struct MultipleMaskTokens : InputError { using InputError::InputError; };
struct EmptyGeneration : InputError { using InputError::InputError; };
struct ParagraphTooShort : InputError { using InputError::InputError; };
struct UnknownParagraph : InputError { using InputError::InputError; };

struct BackendUnavailable : ServiceError { using ServiceError::ServiceError; };
struct AuthFailure : ServiceError { using ServiceError::ServiceError; };
struct ResponseTooLong : ServiceError { using ServiceError::ServiceError; };

}  // namespace polifilter
