#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qhm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Error categories shared by every module and mirrored one-to-one by the C API.
enum class ErrorCode {
    Ok = 0,
    DomainError,
    NotPositiveDefinite,
    NotHermitian,
    DimensionMismatch,
    UnboundParameter,
    EvaluationError,
    SyntaxError,
    ComplexSpectrum,
    DegenerateSpectrum,
    DefectiveMatrix,
    DegenerateObservable,
    OutOfRange,
    SingularOmega,
    NonHermitianPushforward,
    CompatibilityViolation,
    StepSizeUnderflow,
    MissingSection,
    ConflictingMetricModes,
    InvalidScenario,
    UnsupportedFormat,
    IoError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class MetricProvenance { ClosedForm, Nullspace, MuSeries };

/// A Hermitian candidate metric with its spectral positivity certificate.
struct MetricCandidate {
    ComplexMatrix theta;
    RealVector eigenvalues;  // ascending
    double min_eigenvalue = 0.0;
    double condition_number = 0.0;  // +inf when not positive definite
    bool positive_definite = false;
    MetricProvenance provenance = MetricProvenance::Nullspace;
};

enum class FactorizationKind { Triangular, HermitianRoot, MuSeries, General };

/// Invertible Omega with Omega^dagger Omega equal to the source metric.
struct MappingFactorization {
    ComplexMatrix omega;
    ComplexMatrix omega_inverse;
    FactorizationKind kind = FactorizationKind::General;
};

const char* to_string(MetricProvenance p) noexcept;
const char* to_string(FactorizationKind k) noexcept;

// Small helpers used throughout the library and its tests.

double max_abs(const ComplexMatrix& m);
double hermiticity_defect(const ComplexMatrix& m);  // max |A - A^dagger|
bool all_finite(const ComplexMatrix& m);
void require_square(const ComplexMatrix& m, const char* what);

/// Real Frobenius inner product Re tr(A^dagger B).
double frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b);

/// Eigenvalues of a general complex matrix sorted ascending by real part, then imaginary part.
Eigen::VectorXcd sorted_eigenvalues(const ComplexMatrix& m);

}  // namespace qhm
