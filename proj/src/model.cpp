#include "qhm/model.hpp"

#include <cmath>

#include "qhm/metric.hpp"

namespace qhm {

namespace {

void require_r(double r) {
    if (r == 0.0 || !std::isfinite(r)) throw Error(ErrorCode::DomainError, "model parameter r must be nonzero");
}

}  // namespace

ComplexMatrix am_hamiltonian(const AMModelParams& p) {
    require_r(p.r);
    const Complex phase = std::polar(1.0, p.beta);
    ComplexMatrix h(2, 2);
    h << 0.0, p.r * phase,
         std::conj(phase) / p.r, 0.0;
    return h;
}

MetricCandidate am_metric(const AMModelParams& p) {
    require_r(p.r);
    if (!(p.f > 0.0)) throw Error(ErrorCode::DomainError, "metric scale f must be positive");
    if (std::abs(std::sin(p.Z)) < kSingularSine) {
        throw Error(ErrorCode::NotPositiveDefinite, "metric Theta_Z is singular at sin Z = 0");
    }
    const Complex off = p.r * std::polar(1.0, p.beta) * std::cos(p.Z);
    ComplexMatrix theta(2, 2);
    theta << 1.0, off,
             std::conj(off), p.r * p.r;
    theta *= p.f;
    MetricCandidate c = positivity_certificate(theta);
    c.provenance = MetricProvenance::ClosedForm;
    return c;
}

ComplexMatrix am_physical_hamiltonian(const AMModelParams& p) {
    const double s = std::sin(p.Z);
    if (std::abs(s) < kSingularSine) throw Error(ErrorCode::DomainError, "physical Hamiltonian undefined at sin Z = 0");
    const double c = std::cos(p.Z);
    const Complex phase = std::polar(1.0, p.beta);
    ComplexMatrix h(2, 2);
    h << c, phase * s,
         std::conj(phase) * s, -c;
    return h;
}

MappingFactorization am_mapping(const AMModelParams& p) {
    require_r(p.r);
    if (!(p.f > 0.0)) throw Error(ErrorCode::DomainError, "metric scale f must be positive");
    const double s = std::sin(p.Z);
    if (std::abs(s) < kSingularSine) throw Error(ErrorCode::NotPositiveDefinite, "Omega_Z is singular at sin Z = 0");
    const double c = std::cos(p.Z);
    const Complex phase = std::polar(1.0, p.beta);
    const double scale = std::sqrt(p.f);

    MappingFactorization m;
    m.kind = FactorizationKind::Triangular;
    m.omega.resize(2, 2);
    m.omega << 1.0, p.r * phase * c,
               0.0, p.r * s;
    m.omega *= scale;
    m.omega_inverse.resize(2, 2);
    m.omega_inverse << 1.0, -phase * (c / s),
                       0.0, 1.0 / (p.r * s);
    m.omega_inverse /= scale;
    return m;
}

TimeDependentOperator::TimeDependentOperator(int dim, std::vector<Expression> entries)
    : dim_(dim), entries_(std::move(entries)) {
    if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "operator dimension must be at least 1");
    if (entries_.size() != static_cast<std::size_t>(dim) * dim) {
        throw Error(ErrorCode::DimensionMismatch, "operator needs dim*dim entries");
    }
}

TimeDependentOperator TimeDependentOperator::parse(int dim, const std::vector<std::string>& entries) {
    std::vector<Expression> parsed;
    parsed.reserve(entries.size());
    for (const auto& e : entries) parsed.push_back(Expression::parse(e));
    return TimeDependentOperator(dim, std::move(parsed));
}

TimeDependentOperator TimeDependentOperator::constant(const ComplexMatrix& m) {
    require_square(m, "operator");
    std::vector<Expression> entries;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back(Expression::constant(m(r, c)));
    }
    return TimeDependentOperator(static_cast<int>(m.rows()), std::move(entries));
}

ComplexMatrix TimeDependentOperator::evaluate(double t, const ParameterMap& params) const {
    ComplexMatrix m(dim_, dim_);
    for (int r = 0; r < dim_; ++r) {
        for (int c = 0; c < dim_; ++c) m(r, c) = entry(r, c).evaluate(t, params);
    }
    return m;
}

TimeDependentOperator TimeDependentOperator::derivative() const {
    std::vector<Expression> d;
    d.reserve(entries_.size());
    for (const auto& e : entries_) d.push_back(e.derivative());
    return TimeDependentOperator(dim_, std::move(d));
}

bool TimeDependentOperator::depends_on_time() const {
    for (const auto& e : entries_) {
        if (e.depends_on_time()) return true;
    }
    return false;
}

std::set<std::string> TimeDependentOperator::parameters() const {
    std::set<std::string> out;
    for (const auto& e : entries_) out.merge(e.parameters());
    return out;
}

ComplexMatrix evaluate(const TimeDependentOperator& op, double t, const ParameterMap& params) {
    return op.evaluate(t, params);
}

TimeDependentOperator am_hamiltonian_operator(const Expression& r, const Expression& beta) {
    const Expression i = Expression::constant(kI);
    return TimeDependentOperator(2, {Expression::constant(0.0), r * exp(i * beta),
                                     exp(-(i * beta)) / r, Expression::constant(0.0)});
}

TimeDependentOperator am_omega_operator(const Expression& r, const Expression& beta, const Expression& Z) {
    const Expression i = Expression::constant(kI);
    return TimeDependentOperator(2, {Expression::constant(1.0), r * exp(i * beta) * cos(Z),
                                     Expression::constant(0.0), r * sin(Z)});
}

}  // namespace qhm
