#pragma once
// Symmetric tridiagonal eigensolver: Sturm-sequence bisection for eigenvalues,
// inverse iteration for vectors, and exact even/odd folding for palindromic
// matrices so degenerate parity pairs are resolved without mixing.

#include <cstdint>
#include <vector>

#include "bohr/errors.hpp"

namespace bohr {

inline constexpr double kResidualRel = 1e-10;   // ||Tv - Ev|| <= kResidualRel * scale

struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;   // size diag.size() - 1

    int size() const { return static_cast<int>(diag.size()); }
    double scale() const;      // Gershgorin magnitude bound
    void apply(const std::vector<double>& v, std::vector<double>& out) const;
};

// bit-exact mirror symmetry of diag and off
bool is_palindromic(const SymTridiag& t);

// number of eigenvalues strictly below x
int sturm_count(const SymTridiag& t, double x);

// k-th smallest eigenvalue (0-based) by bisection
double bisect_eigenvalue(const SymTridiag& t, int k);

struct EigenPair {
    double value = 0.0;
    std::vector<double> vector;   // 2-norm normalized, largest component positive
    int parity = 0;               // +1 even, -1 odd, 0 unknown (general path)
};

// lowest `count` eigenpairs of an arbitrary symmetric tridiagonal matrix
std::vector<EigenPair> lowest_eigenpairs_tridiag(const SymTridiag& t, int count,
                                                 std::uint64_t seed = 0);

// palindromic odd-size matrices only: solves the even and odd sectors
// separately and merges; vectors carry exact parity
std::vector<EigenPair> lowest_eigenpairs_folded(const SymTridiag& t, int count);

} // namespace bohr
