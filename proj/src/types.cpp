#include "qhm/types.hpp"

#include <algorithm>
#include <cmath>

namespace qhm {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Ok: return "Ok";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::UnboundParameter: return "UnboundParameter";
        case ErrorCode::EvaluationError: return "EvaluationError";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::ComplexSpectrum: return "ComplexSpectrum";
        case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorCode::DefectiveMatrix: return "DefectiveMatrix";
        case ErrorCode::DegenerateObservable: return "DegenerateObservable";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::SingularOmega: return "SingularOmega";
        case ErrorCode::NonHermitianPushforward: return "NonHermitianPushforward";
        case ErrorCode::CompatibilityViolation: return "CompatibilityViolation";
        case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
        case ErrorCode::MissingSection: return "MissingSection";
        case ErrorCode::ConflictingMetricModes: return "ConflictingMetricModes";
        case ErrorCode::InvalidScenario: return "InvalidScenario";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

const char* to_string(MetricProvenance p) noexcept {
    switch (p) {
        case MetricProvenance::ClosedForm: return "closed_form";
        case MetricProvenance::Nullspace: return "nullspace";
        case MetricProvenance::MuSeries: return "mu_series";
    }
    return "?";
}

const char* to_string(FactorizationKind k) noexcept {
    switch (k) {
        case FactorizationKind::Triangular: return "triangular";
        case FactorizationKind::HermitianRoot: return "hermitian_root";
        case FactorizationKind::MuSeries: return "mu_series";
        case FactorizationKind::General: return "general";
    }
    return "?";
}

double max_abs(const ComplexMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    return max_abs(m - m.adjoint());
}

bool all_finite(const ComplexMatrix& m) {
    return std::all_of(m.data(), m.data() + m.size(), [](const Complex& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must be a non-empty square matrix");
    }
}

double frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "frobenius_inner: shape mismatch");
    }
    return (a.conjugate().cwiseProduct(b)).sum().real();
}

Eigen::VectorXcd sorted_eigenvalues(const ComplexMatrix& m) {
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, false);
    Eigen::VectorXcd ev = solver.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](const Complex& a, const Complex& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return ev;
}

}  // namespace qhm
