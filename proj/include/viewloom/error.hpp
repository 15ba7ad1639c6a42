#pragma once

#include <stdexcept>
#include <string>

namespace viewloom {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument or broken invariant on a value passed in by the caller.
struct ValidationError : Error {
  using Error::Error;
};

// Malformed text in a pose file, manifest, or other structured input.
struct ParseError : Error {
  using Error::Error;
};

// Filesystem or codec failure.
struct IoError : Error {
  using Error::Error;
};

// A restorer broke the batch contract (wrong frame count, resolution, exit status).
struct ContractError : Error {
  using Error::Error;
};

}  // namespace viewloom
