#pragma once

#include <stdexcept>
#include <string>

namespace ftspe {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// vee() received a matrix that is not skew-symmetric within tolerance.
struct NonSkewInput : Error {
  using Error::Error;
};

// Pairwise-vector matrix D has rank < 3: collinear/degenerate feature geometry.
struct RankDeficient : Error {
  using Error::Error;
};

// Wahba gain diagonal must satisfy k1 > k2 > k3 >= 1.
struct BadKOrdering : Error {
  using Error::Error;
};

// Newton iteration for an implicit group equation did not converge.
struct ImplicitSolveFailed : Error {
  using Error::Error;
};

// Attitude profile matrix is rank-deficient; attitude unobservable.
struct DegenerateProfile : Error {
  using Error::Error;
};

// A frame with zero points was passed where measurements are required.
struct EmptyFrame : Error {
  using Error::Error;
};

// Bad configuration, preset, or input file (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace ftspe
