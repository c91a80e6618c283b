#include "linear_space.hpp"

#include <cmath>

namespace qhm::detail {

std::vector<ComplexMatrix> hermitian_basis(int n) {
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<ComplexMatrix> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int k = j; k < n; ++k) {
            ComplexMatrix e = ComplexMatrix::Zero(n, n);
            if (j == k) {
                e(j, j) = 1.0;
                out.push_back(e);
                continue;
            }
            e(j, k) = s;
            e(k, j) = s;
            out.push_back(e);
            e(j, k) = Complex(0.0, s);
            e(k, j) = Complex(0.0, -s);
            out.push_back(e);
        }
    }
    return out;
}

std::vector<ComplexMatrix> complex_basis(int n) {
    std::vector<ComplexMatrix> out;
    out.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            ComplexMatrix e = ComplexMatrix::Zero(n, n);
            e(j, k) = 1.0;
            out.push_back(e);
            e(j, k) = kI;
            out.push_back(e);
        }
    }
    return out;
}

std::vector<ComplexMatrix> real_nullspace(const std::vector<ComplexMatrix>& params,
                                          const std::vector<LinearMap>& maps, double tol) {
    if (params.empty()) return {};
    const Eigen::Index unknowns = static_cast<Eigen::Index>(params.size());

    std::vector<RealMatrix> blocks;
    Eigen::Index rows = 0;
    for (const auto& map : maps) {
        RealMatrix block;
        for (Eigen::Index k = 0; k < unknowns; ++k) {
            const ComplexMatrix image = map(params[static_cast<std::size_t>(k)]);
            const Eigen::Index m = image.size();
            if (block.size() == 0) block.resize(2 * m, unknowns);
            for (Eigen::Index e = 0; e < m; ++e) {
                block(2 * e, k) = image.data()[e].real();
                block(2 * e + 1, k) = image.data()[e].imag();
            }
        }
        rows += block.rows();
        blocks.push_back(std::move(block));
    }

    RealMatrix a(std::max<Eigen::Index>(rows, 1), unknowns);
    a.setZero();
    Eigen::Index offset = 0;
    for (const auto& b : blocks) {
        a.middleRows(offset, b.rows()) = b;
        offset += b.rows();
    }

    Eigen::JacobiSVD<RealMatrix> svd(a, Eigen::ComputeFullV);
    const RealVector& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double cutoff = tol * sigma_max;

    std::vector<ComplexMatrix> out;
    const RealMatrix& v = svd.matrixV();
    for (Eigen::Index c = 0; c < unknowns; ++c) {
        const bool null = c >= sigma.size() || sigma(c) <= cutoff;
        if (!null) continue;
        ComplexMatrix m = ComplexMatrix::Zero(params[0].rows(), params[0].cols());
        for (Eigen::Index k = 0; k < unknowns; ++k) m += v(k, c) * params[static_cast<std::size_t>(k)];
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace qhm::detail
