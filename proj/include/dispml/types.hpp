#ifndef DISPML_TYPES_HPP
#define DISPML_TYPES_HPP

#include <complex>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dispml {

using cplx = std::complex<double>;

/// A point z = nu + i*t of the complex Laplace variable. `nu` is the real
/// part (the exponential weight), `t` the imaginary part (angular frequency).
struct ComplexFreq {
  double nu = 0.0;
  double t = 0.0;

  ComplexFreq() = default;
  ComplexFreq(double nu_, double t_) : nu(nu_), t(t_) {}
  explicit ComplexFreq(cplx z) : nu(z.real()), t(z.imag()) {}

  cplx value() const { return cplx(nu, t); }
  bool finite() const { return std::isfinite(nu) && std::isfinite(t); }
};

inline ComplexFreq conj(const ComplexFreq& z) { return {z.nu, -z.t}; }

// Error taxonomy. Every failure mode callers are expected to handle has a
// distinct type; messages carry the offending values.

struct PoleError : std::runtime_error {
  explicit PoleError(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroFrequencyError : std::runtime_error {
  explicit ZeroFrequencyError(const std::string& what) : std::runtime_error(what) {}
};

struct PoleInRegion : std::runtime_error {
  ComplexFreq pole;
  PoleInRegion(const std::string& what, ComplexFreq p)
      : std::runtime_error(what), pole(p) {}
};

struct M0NotSPD : std::runtime_error {
  explicit M0NotSPD(const std::string& what) : std::runtime_error(what) {}
};

struct SingularElimination : std::runtime_error {
  explicit SingularElimination(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidVariantParams : std::runtime_error {
  explicit InvalidVariantParams(const std::string& what) : std::runtime_error(what) {}
};

struct CflViolation : std::runtime_error {
  explicit CflViolation(const std::string& what) : std::runtime_error(what) {}
};

struct NonFiniteField : std::runtime_error {
  explicit NonFiniteField(const std::string& what) : std::runtime_error(what) {}
};

struct NonPositiveValues : std::runtime_error {
  explicit NonPositiveValues(const std::string& what) : std::runtime_error(what) {}
};

struct WindowTooLong : std::runtime_error {
  explicit WindowTooLong(const std::string& what) : std::runtime_error(what) {}
};

struct KernelResolutionMismatch : std::runtime_error {
  explicit KernelResolutionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NoContraction : std::runtime_error {
  explicit NoContraction(const std::string& what) : std::runtime_error(what) {}
};

struct MaxIterReached : std::runtime_error {
  explicit MaxIterReached(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Execution policy for the data-parallel kernels. Every parallel kernel has
/// a serial twin; the two must agree exactly (bitwise for min-reductions and
/// field updates, 1e-13 relative for floating-point sums).
enum class Exec { Serial, Parallel };

}  // namespace dispml

#endif
