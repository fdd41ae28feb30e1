/*
 * Copyright 2026 Metaspin Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef METASPIN_ERRORS_HPP
#define METASPIN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace metaspin {

/// Base class for all library errors. `kind()` is the stable machine-readable
/// tag mirrored into CLI error JSON.
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

  private:
    std::string kind_;
};

/// Fermionic group element on the quasi-boundary: det(1 + Delta_M) below
/// threshold, Cartan decomposition and circle function undefined.
class FermionBoundaryError : public Error {
  public:
    FermionBoundaryError(const std::string& message, double determinant)
        : Error("FermionBoundary", message), determinant_(determinant) {}

    double determinant() const { return determinant_; }

  private:
    double determinant_;
};

/// A matrix required invertible by the cocycle preconditions is singular
/// below threshold.
class DegeneratePairError : public Error {
  public:
    explicit DegeneratePairError(const std::string& message) : Error("DegeneratePair", message) {}
};

/// Cover elements anchored to different reference structures were combined
/// without migrating first.
class ReferenceMismatchError : public Error {
  public:
    explicit ReferenceMismatchError(const std::string& message)
        : Error("ReferenceMismatch", message) {}
};

/// Target complex structure incompatible with the kinematic form.
class InvalidTargetError : public Error {
  public:
    explicit InvalidTargetError(const std::string& message) : Error("InvalidTarget", message) {}
};

/// repair_reference exhausted its retry budget.
class RepairFailedError : public Error {
  public:
    explicit RepairFailedError(const std::string& message) : Error("RepairFailed", message) {}
};

/// Generalized eigenbasis too ill-conditioned for a reliable Jordan
/// structure decision.
class IllConditionedError : public Error {
  public:
    IllConditionedError(const std::string& message, double condition)
        : Error("IllConditioned", message), condition_(condition) {}

    double condition() const { return condition_; }

  private:
    double condition_;
};

/// Phase-space index outside 1..2N.
class IndexOutOfRangeError : public Error {
  public:
    explicit IndexOutOfRangeError(const std::string& message)
        : Error("IndexOutOfRange", message) {}
};

/// Requested Fock space exceeds the oracle's supported size.
class DimensionTooLargeError : public Error {
  public:
    explicit DimensionTooLargeError(const std::string& message)
        : Error("DimensionTooLarge", message) {}
};

/// Bosonic truncated result failed the cutoff-doubling convergence check.
class TruncationNotConvergedError : public Error {
  public:
    explicit TruncationNotConvergedError(const std::string& message)
        : Error("TruncationNotConverged", message) {}
};

/// Both square-root branches are equidistant from the previous value; the
/// evolution step is too large to continue the sign.
class ContinuationAmbiguousError : public Error {
  public:
    explicit ContinuationAmbiguousError(const std::string& message)
        : Error("ContinuationAmbiguous", message) {}
};

}  // namespace metaspin

#endif
