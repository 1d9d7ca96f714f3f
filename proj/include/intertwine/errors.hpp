#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace intertwine {

/// Base of every error the toolkit raises. `kind()` is the stable name used in
/// CLI reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("SyntaxError", message + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class DivisionByZero : public Error {
 public:
  explicit DivisionByZero(double x)
      : Error("DivisionByZero", "division by zero at x = " + std::to_string(x)), x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class SingularMatrix : public Error {
 public:
  explicit SingularMatrix(const std::string& what = "matrix is singular")
      : Error("SingularMatrix", what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("DimensionMismatch", what) {}
};

class EmptyChainSet : public Error {
 public:
  EmptyChainSet() : Error("EmptyChainSet", "chain set is empty") {}
};

class CountMismatch : public Error {
 public:
  explicit CountMismatch(const std::string& what) : Error("CountMismatch", what) {}
};

class SingularLeading : public Error {
 public:
  SingularLeading() : Error("SingularLeading", "leading coefficient is degenerate") {}
};

class SingularWronskian : public Error {
 public:
  explicit SingularWronskian(double x)
      : Error("SingularWronskian", "Wronskian vanishes at x = " + std::to_string(x)), x_(x) {}
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class FactorInconsistent : public Error {
 public:
  explicit FactorInconsistent(const std::string& what) : Error("FactorInconsistent", what) {}
};

class ExtensionCountMismatch : public Error {
 public:
  explicit ExtensionCountMismatch(const std::string& what)
      : Error("ExtensionCountMismatch", what) {}
};

class NormalizationFailure : public Error {
 public:
  explicit NormalizationFailure(const std::string& what) : Error("NormalizationFailure", what) {}
};

class SymmetryViolated : public Error {
 public:
  explicit SymmetryViolated(double defect)
      : Error("SymmetryViolated", "symmetry defect " + std::to_string(defect)), defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

class CompositionDefect : public Error {
 public:
  explicit CompositionDefect(double residual)
      : Error("CompositionDefect", "composition residual " + std::to_string(residual)),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ScenarioError : public Error {
 public:
  explicit ScenarioError(const std::string& what) : Error("ScenarioError", what) {}
};

}  // namespace intertwine
