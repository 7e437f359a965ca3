// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace wedgetrace {

// Base class for all numerical failures raised by the library. The CLI maps
// these to exit code 3; configuration problems use ConfigError (exit code 2).
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : Error {
  using Error::Error;
};

// A quadrature node landed on (or numerically too close to) a singularity of
// the integrand.
struct NodeOnSingularity : Error {
  using Error::Error;
};

// Every coefficient of a matrix polynomial family vanished.
struct DegenerateFamily : Error {
  using Error::Error;
};

// The fiber coefficients push mass outside the retained fiber modes, so the
// finite reduction is lossy; the message carries the leakage norm.
struct TruncationWarning : Error {
  using Error::Error;
};

// The rank test of the moment matrix in the contour eigensolver had singular
// values straddling the threshold; the probe count is too small or the
// contour is badly placed.
struct RankDeficientProbe : Error {
  using Error::Error;
};

// Two poles are too close to separate with residue circles but too far apart
// to merge into one cluster.
struct PoleSeparationFailure : Error {
  using Error::Error;
};

// Halving the radial quadrature step moved the pairing value by more than the
// declared tolerance.
struct GridTooCoarse : Error {
  using Error::Error;
};

// x d/dx mapped a trace element outside the span of the supplied basis.
struct NotInvariant : Error {
  using Error::Error;
};

// A continued frame lost rank at a grid point.
struct RankLoss : Error {
  using Error::Error;
};

// The spectrum of an endomorphism comes too close to the resolvent contour.
struct ContourTooTight : Error {
  using Error::Error;
};

// The eigenvalue diameter at the base point cannot be covered by disjoint
// disks of radius < delta/2.
struct ClusteringImpossible : Error {
  using Error::Error;
};

// Input to a torus-grid norm carries energy in the top octave of frequencies.
struct AliasingError : Error {
  using Error::Error;
};

// A pairing matrix required by a linear solve is singular.
struct SingularPairing : Error {
  using Error::Error;
};

// A square-root branch cannot be continued along y (the argument winds
// around 0).
struct BranchAmbiguity : Error {
  using Error::Error;
};

// The witness basis Gram matrix is numerically rank deficient.
struct GramConditioning : Error {
  using Error::Error;
};

}  // namespace wedgetrace
