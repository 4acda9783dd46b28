#include "bohr/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bohr/rng.hpp"

namespace bohr {

namespace {

double op_norm_bound(const Matrix& m) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
        best = std::max(best, row);
    }
    return best;
}

bool same_matrix(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           op_norm_bound(a - b) <= 1e-12 * std::max(1.0, op_norm_bound(a));
}

bool is_projection(const Matrix& a) {
    return op_norm_bound(a - a.adjoint()) <= kProjectionTol &&
           op_norm_bound(a * a - a) <= kProjectionTol;
}

long long dense_dim(int base_dim, long long order, int cap) {
    long long d = 1;
    for (long long i = 0; i < order; ++i) {
        d *= base_dim;
        if (d > cap)
            throw CapacityError("dense tensor dimension exceeds the cap of " +
                                std::to_string(cap));
    }
    return d;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    if (p > std::numeric_limits<std::uint64_t>::max())
        throw CapacityError("multiplicity count exceeds the 64-bit range");
    return static_cast<std::uint64_t>(p);
}

std::uint64_t checked_pow(std::uint64_t base, long long exp) {
    std::uint64_t out = 1;
    for (long long i = 0; i < exp; ++i) out = checked_mul(out, base);
    return out;
}

std::uint64_t binomial(long long n, long long k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 c = 1;
    for (long long i = 0; i < k; ++i) {
        c = c * static_cast<unsigned __int128>(n - i);
        c = c / static_cast<unsigned __int128>(i + 1);
        if (c > std::numeric_limits<std::uint64_t>::max())
            throw CapacityError("binomial coefficient exceeds the 64-bit range");
    }
    return static_cast<std::uint64_t>(c);
}

} // namespace

ElementaryTensorSum ElementaryTensorSum::make(int base_dim, std::vector<Term> terms) {
    if (base_dim < 1) throw InvariantError("tensor factor dimension must be positive");
    if (terms.empty()) throw InvariantError("tensor sum needs at least one term");
    const int order = static_cast<int>(terms.front().factors.size());
    if (order < 1) throw InvariantError("tensor terms need at least one factor");
    for (const Term& t : terms) {
        if (static_cast<int>(t.factors.size()) != order)
            throw InvariantError("tensor terms have mixed factor counts");
        for (const Matrix& f : t.factors)
            if (f.rows() != base_dim || f.cols() != base_dim)
                throw DimensionError("tensor factor does not match the base dimension");
    }
    ElementaryTensorSum a;
    a.base_dim = base_dim;
    a.order = order;
    a.terms = std::move(terms);
    return a;
}

ElementaryTensorSum ElementaryTensorSum::single(int base_dim, Complex coeff,
                                                std::vector<Matrix> factors) {
    Term t;
    t.coeff = coeff;
    t.factors = std::move(factors);
    std::vector<Term> terms;
    terms.push_back(std::move(t));
    return make(base_dim, std::move(terms));
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix dense_tensor(const std::vector<Matrix>& factors) {
    if (factors.empty()) throw InvariantError("tensor of zero factors");
    Matrix out = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
    return out;
}

Matrix symmetrize_dense(const ElementaryTensorSum& a, int cap) {
    const long long dim = dense_dim(a.base_dim, a.order, cap);
    Matrix out = Matrix::Zero(dim, dim);
    for (const ElementaryTensorSum::Term& term : a.terms) {
        std::vector<Matrix> uniques;
        std::vector<int> ids;
        for (const Matrix& f : term.factors) {
            int id = -1;
            for (std::size_t u = 0; u < uniques.size(); ++u)
                if (same_matrix(uniques[u], f)) { id = static_cast<int>(u); break; }
            if (id < 0) {
                id = static_cast<int>(uniques.size());
                uniques.push_back(f);
            }
            ids.push_back(id);
        }
        std::sort(ids.begin(), ids.end());
        Matrix acc = Matrix::Zero(dim, dim);
        long long arrangements = 0;
        do {
            if (++arrangements > kArrangementCap)
                throw CapacityError("term has more than " + std::to_string(kArrangementCap) +
                                    " distinct factor arrangements");
            std::vector<Matrix> arranged;
            arranged.reserve(ids.size());
            for (int id : ids) arranged.push_back(uniques[id]);
            acc += dense_tensor(arranged);
        } while (std::next_permutation(ids.begin(), ids.end()));
        out += (term.coeff / static_cast<double>(arrangements)) * acc;
    }
    return out;
}

Matrix embed_jNM_dense(const ElementaryTensorSum& aM, int N, int cap) {
    if (N < aM.order)
        throw OrderError("embedding target " + std::to_string(N) +
                         " is below the base order " + std::to_string(aM.order));
    const Matrix id = Matrix::Identity(aM.base_dim, aM.base_dim);
    std::vector<ElementaryTensorSum::Term> padded = aM.terms;
    for (ElementaryTensorSum::Term& t : padded)
        t.factors.insert(t.factors.end(), N - aM.order, id);
    return symmetrize_dense(ElementaryTensorSum::make(aM.base_dim, std::move(padded)), cap);
}

SymmetricSequence embed_jNM(ElementaryTensorSum aM) {
    SymmetricSequence s;
    s.base = std::move(aM);
    return s;
}

Complex product_state_value(const State& omega, const ElementaryTensorSum& aM, long long N) {
    if (omega.dim != aM.base_dim)
        throw DimensionError("state dimension does not match the tensor base dimension");
    if (N < aM.order)
        throw OrderError("evaluation order " + std::to_string(N) +
                         " is below the base order " + std::to_string(aM.order));
    Complex out = 0.0;
    for (const ElementaryTensorSum::Term& t : aM.terms) {
        Complex prod = t.coeff;
        for (const Matrix& f : t.factors) prod *= (omega.density * f).trace();
        out += prod;
    }
    return out;
}

Matrix frequency_operator_dense(const Matrix& e, int N, int cap) {
    if (!is_projection(e)) throw InvalidProjection("frequency operator needs a projection");
    if (N < 1) throw OrderError("frequency operator needs at least one factor");
    const int n = static_cast<int>(e.rows());
    const long long dim = dense_dim(n, N, cap);
    const Matrix id = Matrix::Identity(n, n);
    Matrix out = Matrix::Zero(dim, dim);
    for (int k = 0; k < N; ++k) {
        std::vector<Matrix> factors(N, id);
        factors[k] = e;
        out += dense_tensor(factors);
    }
    return out / static_cast<double>(N);
}

FrequencySpectrum frequency_spectrum(const Matrix& e, long long N) {
    if (!is_projection(e)) throw InvalidProjection("frequency spectrum needs a projection");
    if (N < 1) throw OrderError("frequency spectrum needs at least one factor");
    const long long n = e.rows();
    const long long r = std::lround(e.trace().real());
    FrequencySpectrum s;
    s.N = N;
    for (long long k = 0; k <= N; ++k) {
        s.values.push_back(static_cast<double>(k) / static_cast<double>(N));
        std::uint64_t mult = binomial(N, k);
        mult = checked_mul(mult, checked_pow(static_cast<std::uint64_t>(r), k));
        mult = checked_mul(mult, checked_pow(static_cast<std::uint64_t>(n - r), N - k));
        s.multiplicities.push_back(mult);
    }
    return s;
}

double frequency_variance(const State& omega, const Matrix& e, long long N) {
    if (!is_projection(e)) throw InvalidProjection("frequency variance needs a projection");
    if (omega.dim != e.rows())
        throw DimensionError("state dimension does not match the projection");
    if (N < 1) throw OrderError("frequency variance needs at least one factor");
    const double p = (omega.density * e).trace().real();
    return p * (1.0 - p) / static_cast<double>(N);
}

double section_norm(const ElementaryTensorSum& aM, long long N) {
    if (N < aM.order)
        throw OrderError("section norm order " + std::to_string(N) +
                         " is below the base order " + std::to_string(aM.order));

    // the factors must all equal one projection e or its complement 1 - e
    const Matrix id = Matrix::Identity(aM.base_dim, aM.base_dim);
    Matrix e;
    Matrix complement;
    bool have_e = false;
    bool have_complement = false;
    for (const ElementaryTensorSum::Term& t : aM.terms)
        for (const Matrix& f : t.factors) {
            if (have_e && same_matrix(f, e)) continue;
            if (have_complement && same_matrix(f, complement)) continue;
            if (!have_e) {
                e = f;
                complement = id - f;
                have_e = true;
                have_complement = true;
                continue;
            }
            throw UnsupportedForm("section norm needs factors drawn from one projection "
                                  "and its complement");
        }
    if (!is_projection(e))
        throw UnsupportedForm("section norm factors must be projections");

    const long long n = aM.base_dim;
    const long long r = std::lround(e.trace().real());

    double best = 0.0;
    for (long long k = 0; k <= N; ++k) {
        if (r == 0 && k != 0) continue;
        if (r == n && k != N) continue;
        Complex val = 0.0;
        for (const ElementaryTensorSum::Term& t : aM.terms) {
            long long alpha = 0;
            for (const Matrix& f : t.factors)
                if (same_matrix(f, e)) ++alpha;
            const long long beta = aM.order - alpha;
            Complex prod = t.coeff;
            for (long long i = 0; i < alpha; ++i)
                prod *= static_cast<double>(k - i) / static_cast<double>(N - i);
            for (long long j = 0; j < beta; ++j)
                prod *= static_cast<double>(N - k - j) / static_cast<double>(N - alpha - j);
            val += prod;
        }
        best = std::max(best, std::abs(val));
    }
    return best;
}

FrequencyTrialResult frequency_trial(const State& omega, const Matrix& e,
                                     long long N, int trials, std::uint64_t seed) {
    if (!is_projection(e)) throw InvalidProjection("frequency trial needs a projection");
    if (omega.dim != e.rows())
        throw DimensionError("state dimension does not match the projection");
    if (N < 1) throw OrderError("frequency trial needs at least one factor");
    if (trials < 1) throw InvariantError("frequency trial needs at least one trial");

    FrequencyTrialResult r;
    r.p = (omega.density * e).trace().real();
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, "frequency-trial-" + std::to_string(t)));
        long long hits = 0;
        for (long long i = 0; i < N; ++i)
            if (rng.uniform01() < r.p) ++hits;
        const double freq = static_cast<double>(hits) / static_cast<double>(N);
        r.frequencies.push_back(freq);
        sum += freq;
        r.max_deviation = std::max(r.max_deviation, std::abs(freq - r.p));
    }
    r.empirical_mean = sum / trials;
    return r;
}

} // namespace bohr
