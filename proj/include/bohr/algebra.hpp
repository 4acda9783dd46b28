#pragma once
// Finite-dimensional hermitian spectral calculus: observables, states,
// spectral decompositions, functional calculus, Born measures, sampling.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bohr/errors.hpp"

namespace bohr {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-12;   // relative to operator scale
inline constexpr double kProjectionTol = 1e-10;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kStateEigFloor = -1e-10;
inline constexpr double kVectorStateTol = 1e-10;
inline constexpr double kEigenMergeRel = 1e-8;   // degeneracy merge, times operator scale

struct HermitianOperator {
    int dim = 0;
    Matrix entries;

    // validates squareness and hermiticity (1e-12 relative to scale)
    static HermitianOperator from(Matrix m);

    // infinity-norm bound on the spectral norm, used to scale tolerances
    double scale() const;
};

struct SpectralDecomposition {
    std::vector<double> eigenvalues;   // distinct, ascending
    std::vector<Matrix> projections;   // hermitian idempotents summing to identity

    int dim() const { return projections.empty() ? 0 : static_cast<int>(projections.front().rows()); }
};

struct State {
    int dim = 0;
    Matrix density;
    std::optional<CVector> vector;

    // normalizes v and builds the vector state v v*
    static State from_vector(CVector v);
    // validates hermiticity, unit trace (1e-12), positivity (min eigenvalue >= -1e-10)
    static State from_density(Matrix rho);
    static State maximally_mixed(int n);
};

struct DiscreteProbabilityMeasure {
    std::vector<double> support;   // distinct, ascending
    std::vector<double> weights;   // nonnegative, sum to 1 within 1e-12
};

// merge_tol < 0 selects the default 1e-8 * scale
SpectralDecomposition spectral_decompose(const HermitianOperator& h, double merge_tol = -1.0);

// f returning NaN or Inf at an eigenvalue raises DomainError
HermitianOperator functional_calculus(const HermitianOperator& h,
                                      const std::function<double(double)>& f);

DiscreteProbabilityMeasure born_measure(const HermitianOperator& h, const State& s);

double expectation(const HermitianOperator& h, const State& s,
                   const std::function<double(double)>& f);

std::vector<double> sample_outcomes(const DiscreteProbabilityMeasure& m,
                                    long long count, std::uint64_t seed);

} // namespace bohr
