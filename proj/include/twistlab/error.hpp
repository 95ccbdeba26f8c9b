#pragma once

#include <stdexcept>
#include <string>

namespace twistlab {

// Base of every engine failure. The CLI maps these to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// d(p1 o F)/dy <= 0 at an evaluated point.
class TwistViolation : public Error {
public:
    using Error::Error;
};

// The anchored lift of a one-step angle variation is ambiguous
// (mod-1 class within tolerance of a half turn from the vertical's).
class DegenerateAnchor : public Error {
public:
    using Error::Error;
};

class HorizonExceeded : public Error {
public:
    using Error::Error;
};

class NoGeneratingFunction : public Error {
public:
    using Error::Error;
};

class BracketFailure : public Error {
public:
    using Error::Error;
};

// y -> p1 o F^q(x, y) is not increasing on the searched bracket.
class NonMonotoneBracket : public Error {
public:
    using Error::Error;
};

class CoincidentPoints : public Error {
public:
    using Error::Error;
};

}  // namespace twistlab
