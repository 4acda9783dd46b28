#pragma once
// Symmetric tensor powers over M_n: symmetrizers, the embeddings j_NM,
// frequency operators and their spectra, product-state evaluation, and
// closed-form section norms for words in a projection and its complement.

#include <cstdint>
#include <vector>

#include "bohr/algebra.hpp"

namespace bohr {

inline constexpr int kDenseCap = 4096;            // bound on n^N for dense paths
inline constexpr int kArrangementCap = 100000;    // distinct factor arrangements per term

struct ElementaryTensorSum {
    int base_dim = 0;   // n of the factor algebra M_n
    int order = 0;      // M, the common factor count
    struct Term {
        Complex coeff;
        std::vector<Matrix> factors;
    };
    std::vector<Term> terms;

    static ElementaryTensorSum make(int base_dim, std::vector<Term> terms);
    static ElementaryTensorSum single(int base_dim, Complex coeff, std::vector<Matrix> factors);
};

Matrix kron(const Matrix& a, const Matrix& b);
Matrix dense_tensor(const std::vector<Matrix>& factors);

// average over all distinct factor arrangements of each term
Matrix symmetrize_dense(const ElementaryTensorSum& a, int cap = kDenseCap);

// dense j_NM: pad with identities to order N, then symmetrize
Matrix embed_jNM_dense(const ElementaryTensorSum& aM, int N, int cap = kDenseCap);

struct SymmetricSequence {
    ElementaryTensorSum base;   // a_N = j_NM(base) for every N >= base.order
};
SymmetricSequence embed_jNM(ElementaryTensorSum aM);

Complex product_state_value(const State& omega, const ElementaryTensorSum& aM, long long N);

struct BundleSection {
    SymmetricSequence sequence;
    // the classical limit a_0(omega), already attained at N = order
    Complex classical_limit(const State& omega) const {
        return product_state_value(omega, sequence.base, sequence.base.order);
    }
};

struct FrequencySpectrum {
    long long N = 0;
    std::vector<double> values;                   // k/N for k = 0..N
    std::vector<std::uint64_t> multiplicities;    // sum to n^N
};

Matrix frequency_operator_dense(const Matrix& e, int N, int cap = kDenseCap);
FrequencySpectrum frequency_spectrum(const Matrix& e, long long N);

double frequency_variance(const State& omega, const Matrix& e, long long N);

// operator norm of j_NM(aM) for factors drawn from {e, 1-e}; occupation-sector
// eigenvalues are ratios of falling factorials
double section_norm(const ElementaryTensorSum& aM, long long N);

struct FrequencyTrialResult {
    double p = 0.0;
    std::vector<double> frequencies;   // one empirical relative frequency per trial
    double empirical_mean = 0.0;
    double max_deviation = 0.0;        // max |frequency - p|
};
FrequencyTrialResult frequency_trial(const State& omega, const Matrix& e,
                                     long long N, int trials, std::uint64_t seed);

} // namespace bohr
