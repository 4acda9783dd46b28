#include "bohr/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bohr/rng.hpp"

namespace bohr {

namespace {

double infinity_norm(const Matrix& m) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
        best = std::max(best, row);
    }
    return best;
}

} // namespace

HermitianOperator HermitianOperator::from(Matrix m) {
    if (m.rows() == 0 || m.rows() != m.cols())
        throw InvalidObservable("operator matrix must be square and nonempty");
    const double sc = std::max(infinity_norm(m), 1e-300);
    const double dev = infinity_norm(m - m.adjoint());
    if (dev > kHermitianTol * sc)
        throw InvalidObservable("matrix is not hermitian: deviation " + std::to_string(dev) +
                                " exceeds " + std::to_string(kHermitianTol) + " * scale");
    HermitianOperator h;
    h.dim = static_cast<int>(m.rows());
    h.entries = std::move(m);
    return h;
}

double HermitianOperator::scale() const {
    return std::max(infinity_norm(entries), 1e-300);
}

State State::from_vector(CVector v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw InvariantError("vector state requires a nonzero finite vector");
    v /= n;
    State s;
    s.dim = static_cast<int>(v.size());
    s.density = v * v.adjoint();
    s.vector = std::move(v);
    return s;
}

State State::from_density(Matrix rho) {
    if (rho.rows() == 0 || rho.rows() != rho.cols())
        throw InvariantError("density matrix must be square and nonempty");
    const double sc = std::max(infinity_norm(rho), 1.0);
    if (infinity_norm(rho - rho.adjoint()) > kHermitianTol * sc)
        throw InvariantError("density matrix is not hermitian");
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol)
        throw InvariantError("density matrix trace " + std::to_string(tr) + " is not 1");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericFailure("density eigenvalue check failed to converge");
    if (solver.eigenvalues().minCoeff() < kStateEigFloor)
        throw InvariantError("density matrix has eigenvalue below -1e-10");
    State s;
    s.dim = static_cast<int>(rho.rows());
    s.density = std::move(rho);
    return s;
}

State State::maximally_mixed(int n) {
    if (n < 1) throw InvariantError("dimension must be positive");
    State s;
    s.dim = n;
    s.density = Matrix::Identity(n, n) / static_cast<double>(n);
    return s;
}

SpectralDecomposition spectral_decompose(const HermitianOperator& h, double merge_tol) {
    const double sc = h.scale();
    if (merge_tol < 0.0) merge_tol = kEigenMergeRel * sc;

    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.entries);
    if (solver.info() != Eigen::Success)
        throw NumericFailure("hermitian eigendecomposition failed to converge");
    const Eigen::VectorXd vals = solver.eigenvalues();
    const Matrix vecs = solver.eigenvectors();

    SpectralDecomposition out;
    int i = 0;
    while (i < h.dim) {
        int j = i + 1;
        while (j < h.dim && vals(j) - vals(j - 1) < merge_tol) ++j;
        double lambda = 0.0;
        Matrix proj = Matrix::Zero(h.dim, h.dim);
        for (int k = i; k < j; ++k) {
            lambda += vals(k);
            proj.noalias() += vecs.col(k) * vecs.col(k).adjoint();
        }
        out.eigenvalues.push_back(lambda / (j - i));
        out.projections.push_back(std::move(proj));
        i = j;
    }
    return out;
}

HermitianOperator functional_calculus(const HermitianOperator& h,
                                      const std::function<double(double)>& f) {
    const SpectralDecomposition sd = spectral_decompose(h);
    Matrix out = Matrix::Zero(h.dim, h.dim);
    for (size_t k = 0; k < sd.eigenvalues.size(); ++k) {
        const double y = f(sd.eigenvalues[k]);
        if (!std::isfinite(y))
            throw DomainError("function undefined at eigenvalue " +
                              std::to_string(sd.eigenvalues[k]));
        out.noalias() += y * sd.projections[k];
    }
    return HermitianOperator::from(std::move(out));
}

DiscreteProbabilityMeasure born_measure(const HermitianOperator& h, const State& s) {
    if (h.dim != s.dim)
        throw DimensionError("observable dimension " + std::to_string(h.dim) +
                             " does not match state dimension " + std::to_string(s.dim));
    const SpectralDecomposition sd = spectral_decompose(h);
    DiscreteProbabilityMeasure m;
    double total = 0.0;
    for (size_t k = 0; k < sd.eigenvalues.size(); ++k) {
        const double w = (s.density * sd.projections[k]).trace().real();
        if (w < -kTraceTol)
            throw InvariantError("Born weight " + std::to_string(w) + " is negative");
        m.support.push_back(sd.eigenvalues[k]);
        m.weights.push_back(std::max(w, 0.0));
        total += m.weights.back();
    }
    if (std::abs(total - 1.0) > kTraceTol)
        throw InvariantError("Born weights sum to " + std::to_string(total) + ", not 1");
    return m;
}

double expectation(const HermitianOperator& h, const State& s,
                   const std::function<double(double)>& f) {
    const DiscreteProbabilityMeasure m = born_measure(h, s);
    double out = 0.0;
    for (size_t k = 0; k < m.support.size(); ++k) {
        const double y = f(m.support[k]);
        if (!std::isfinite(y))
            throw DomainError("function undefined at eigenvalue " + std::to_string(m.support[k]));
        out += y * m.weights[k];
    }
    return out;
}

std::vector<double> sample_outcomes(const DiscreteProbabilityMeasure& m,
                                    long long count, std::uint64_t seed) {
    if (m.support.empty()) throw InvalidMeasure("cannot sample from an empty measure");
    if (m.support.size() != m.weights.size())
        throw InvalidMeasure("support and weight lengths differ");
    if (count < 1) throw InvariantError("sample count must be at least 1");

    std::vector<double> cdf(m.weights.size());
    double acc = 0.0;
    for (size_t k = 0; k < m.weights.size(); ++k) {
        acc += m.weights[k];
        cdf[k] = acc;
    }
    cdf.back() = std::max(cdf.back(), 1.0);   // guard the final bin against rounding

    Rng rng(seed);
    std::vector<double> out;
    out.reserve(static_cast<size_t>(count));
    for (long long i = 0; i < count; ++i) {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const size_t k = std::min(static_cast<size_t>(it - cdf.begin()), cdf.size() - 1);
        out.push_back(m.support[k]);
    }
    return out;
}

} // namespace bohr
