#pragma once

#include <stdexcept>
#include <string>

namespace mct {

// Bad caller input: shapes, ranges, invalid weights.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A file is not what it claims to be (magic number, header layout).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two inputs that must agree do not (image/label counts, manifest/checksum).
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Missing, unreadable or truncated files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed file whose content is out of domain (e.g. label 11).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mct
