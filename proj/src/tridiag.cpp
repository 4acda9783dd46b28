#include "bohr/tridiag.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

#include "bohr/rng.hpp"

namespace bohr {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

void normalize(std::vector<double>& v) {
    const double n = norm2(v);
    if (!(n > 0.0) || !std::isfinite(n))
        throw NumericFailure("inverse iteration produced a degenerate vector");
    for (double& x : v) x /= n;
}

void fix_sign(std::vector<double>& v) {
    double best = 0.0;
    for (double x : v)
        if (std::abs(x) > std::abs(best)) best = x;
    if (best < 0.0)
        for (double& x : v) x = -x;
}

double pivmin_for(const SymTridiag& t) {
    double emax2 = 1.0;
    for (double e : t.off) emax2 = std::max(emax2, e * e);
    return DBL_MIN * emax2;
}

// tridiagonal LU with partial pivoting; tiny pivots are clamped so shifts at
// an eigenvalue stay solvable
struct TriLU {
    int n = 0;
    std::vector<double> dl, d, du, du2;
    std::vector<char> swapped;

    TriLU(const SymTridiag& t, double sigma, double clamp) {
        n = t.size();
        d.resize(n);
        for (int i = 0; i < n; ++i) d[i] = t.diag[i] - sigma;
        dl.assign(t.off.begin(), t.off.end());
        du.assign(t.off.begin(), t.off.end());
        du2.assign(n > 2 ? n - 2 : 0, 0.0);
        swapped.assign(n > 1 ? n - 1 : 0, 0);

        for (int i = 0; i + 1 < n; ++i) {
            if (std::abs(d[i]) >= std::abs(dl[i])) {
                if (d[i] != 0.0) {
                    const double fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                } else {
                    dl[i] = 0.0;
                }
            } else {
                const double fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                const double temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if (i + 2 < n) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = 1;
            }
        }
        for (int i = 0; i < n; ++i)
            if (std::abs(d[i]) < clamp) d[i] = d[i] < 0.0 ? -clamp : clamp;
    }

    void solve(std::vector<double>& x) const {
        for (int i = 0; i + 1 < n; ++i) {
            if (swapped[i]) std::swap(x[i], x[i + 1]);
            x[i + 1] -= dl[i] * x[i];
        }
        x[n - 1] /= d[n - 1];
        if (n > 1) x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        for (int i = n - 3; i >= 0; --i)
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
};

double rayleigh(const SymTridiag& t, const std::vector<double>& v) {
    std::vector<double> tv;
    t.apply(v, tv);
    return dot(v, tv);
}

double residual(const SymTridiag& t, const std::vector<double>& v, double value) {
    std::vector<double> tv;
    t.apply(v, tv);
    for (int i = 0; i < t.size(); ++i) tv[i] -= value * v[i];
    return norm2(tv);
}

// one eigenvector by shifted inverse iteration with partial pivoting;
// orthogonalized against earlier vectors from the same near-degenerate cluster
std::vector<double> invit_general(const SymTridiag& t, double value,
                                  const std::vector<const std::vector<double>*>& cluster,
                                  std::uint64_t seed) {
    const int n = t.size();
    const double sc = t.scale();
    const TriLU lu(t, value, std::max(pivmin_for(t), DBL_EPSILON * sc * 1e-3));

    Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform01() - 0.5;
    normalize(v);

    for (int iter = 0; iter < 8; ++iter) {
        lu.solve(v);
        for (const std::vector<double>* w : cluster) {
            const double c = dot(v, *w);
            for (int i = 0; i < n; ++i) v[i] -= c * (*w)[i];
        }
        normalize(v);
        if (residual(t, v, rayleigh(t, v)) <= 1e-13 * sc) break;
    }
    return v;
}

// positive-definite shift below the smallest eigenvalue turns matrices with
// nonpositive off-diagonals into M-matrices; a Thomas solve from a positive
// start then keeps the ground state strictly positive
std::vector<double> invit_ground_positive(const SymTridiag& t, double value) {
    const int n = t.size();
    const double sc = t.scale();
    double delta = std::max(1e-12 * sc, 16.0 * DBL_EPSILON * sc);
    double sigma = value - delta;
    while (sturm_count(t, sigma) > 0) {
        delta *= 2.0;
        sigma = value - delta;
    }

    std::vector<double> c(n), lower(std::max(n - 1, 0));
    std::vector<double> v(n, 1.0);
    normalize(v);
    for (int iter = 0; iter < 6; ++iter) {
        // Thomas factorization of the positive-definite shift, no pivoting
        c[0] = t.diag[0] - sigma;
        for (int i = 1; i < n; ++i) {
            lower[i - 1] = t.off[i - 1] / c[i - 1];
            c[i] = t.diag[i] - sigma - lower[i - 1] * t.off[i - 1];
        }
        for (int i = 1; i < n; ++i) v[i] -= lower[i - 1] * v[i - 1];
        v[n - 1] /= c[n - 1];
        for (int i = n - 2; i >= 0; --i) v[i] = (v[i] - t.off[i] * v[i + 1]) / c[i];
        normalize(v);
        if (residual(t, v, rayleigh(t, v)) <= 1e-13 * sc) break;
    }
    return v;
}

bool nonpositive_off(const SymTridiag& t) {
    for (double e : t.off)
        if (e > 0.0) return false;
    return true;
}

std::vector<EigenPair> sector_eigenpairs(const SymTridiag& t, int count, std::uint64_t seed,
                                         bool check) {
    const double sc = t.scale();
    std::vector<EigenPair> out;
    std::vector<const std::vector<double>*> cluster;
    for (int k = 0; k < count; ++k) {
        EigenPair p;
        p.value = bisect_eigenvalue(t, k);
        cluster.clear();
        for (const EigenPair& prev : out)
            if (std::abs(prev.value - p.value) <= 1e-7 * sc)
                cluster.push_back(&prev.vector);
        if (k == 0 && cluster.empty() && nonpositive_off(t))
            p.vector = invit_ground_positive(t, p.value);
        else
            p.vector = invit_general(t, p.value, cluster,
                                     derive_seed(seed, "invit-" + std::to_string(k)));
        p.value = rayleigh(t, p.vector);
        fix_sign(p.vector);
        if (check) {
            const double res = residual(t, p.vector, p.value);
            if (res > kResidualRel * sc)
                throw NumericFailure("eigenpair " + std::to_string(k) + " residual " +
                                     std::to_string(res) + " exceeds " +
                                     std::to_string(kResidualRel * sc));
        }
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace

double SymTridiag::scale() const {
    double best = 0.0;
    for (int i = 0; i < size(); ++i) {
        double row = std::abs(diag[i]);
        if (i > 0) row += std::abs(off[i - 1]);
        if (i + 1 < size()) row += std::abs(off[i]);
        best = std::max(best, row);
    }
    return std::max(best, 1e-300);
}

void SymTridiag::apply(const std::vector<double>& v, std::vector<double>& out) const {
    const int n = size();
    out.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = diag[i] * v[i];
        if (i > 0) s += off[i - 1] * v[i - 1];
        if (i + 1 < n) s += off[i] * v[i + 1];
        out[i] = s;
    }
}

bool is_palindromic(const SymTridiag& t) {
    const int n = t.size();
    if (t.off.size() + 1 != static_cast<std::size_t>(n)) return false;
    for (int i = 0; i < n; ++i)
        if (t.diag[i] != t.diag[n - 1 - i]) return false;
    for (int i = 0; i + 1 < n; ++i)
        if (t.off[i] != t.off[n - 2 - i]) return false;
    return true;
}

int sturm_count(const SymTridiag& t, double x) {
    const double pivmin = pivmin_for(t);
    int count = 0;
    double d = 1.0;
    for (int i = 0; i < t.size(); ++i) {
        const double e2 = i > 0 ? t.off[i - 1] * t.off[i - 1] : 0.0;
        d = t.diag[i] - x - (i > 0 ? e2 / d : 0.0);
        if (std::abs(d) < pivmin) d = -pivmin;
        if (d < 0.0) ++count;
    }
    return count;
}

double bisect_eigenvalue(const SymTridiag& t, int k) {
    const int n = t.size();
    if (n < 1) throw InvariantError("empty tridiagonal matrix");
    if (k < 0 || k >= n)
        throw IndexError("eigenvalue index " + std::to_string(k) + " out of range");

    double lo = t.diag[0];
    double hi = t.diag[0];
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(t.off[i - 1]);
        if (i + 1 < n) r += std::abs(t.off[i]);
        lo = std::min(lo, t.diag[i] - r);
        hi = std::max(hi, t.diag[i] + r);
    }
    const double pad = 2.0 * DBL_EPSILON * std::max(std::abs(lo), std::abs(hi)) + DBL_MIN;
    lo -= pad;
    hi += pad;

    for (int iter = 0; iter < 200; ++iter) {
        const double mid = lo + (hi - lo) / 2.0;
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(t, mid) > k) hi = mid;
        else lo = mid;
    }
    return lo + (hi - lo) / 2.0;
}

std::vector<EigenPair> lowest_eigenpairs_tridiag(const SymTridiag& t, int count,
                                                 std::uint64_t seed) {
    if (count < 1 || count > t.size())
        throw IndexError("eigenpair count " + std::to_string(count) + " out of range");
    return sector_eigenpairs(t, count, seed, true);
}

std::vector<EigenPair> lowest_eigenpairs_folded(const SymTridiag& t, int count) {
    const int n = t.size();
    if (!is_palindromic(t) || n % 2 == 0)
        throw InvariantError("parity folding needs an odd-size palindromic matrix");
    if (count < 1 || count > n)
        throw IndexError("eigenpair count " + std::to_string(count) + " out of range");
    const int m = n / 2;
    const double sc = t.scale();
    const double sqrt2 = std::sqrt(2.0);

    SymTridiag even;
    even.diag.assign(t.diag.begin(), t.diag.begin() + m + 1);
    even.off.assign(t.off.begin(), t.off.begin() + m);
    if (m > 0) even.off[m - 1] *= sqrt2;

    SymTridiag odd;
    odd.diag.assign(t.diag.begin(), t.diag.begin() + m);
    odd.off.assign(t.off.begin(), t.off.begin() + std::max(m - 1, 0));

    const int want_even = std::min(count, even.size());
    const int want_odd = std::min(count, odd.size());
    const std::vector<EigenPair> ev = sector_eigenpairs(even, want_even, 1, false);
    const std::vector<EigenPair> od =
        odd.size() > 0 ? sector_eigenpairs(odd, want_odd, 2, false) : std::vector<EigenPair>{};

    auto unfold = [n, m, sqrt2](const EigenPair& sector, int parity) {
        EigenPair p;
        p.value = sector.value;
        p.parity = parity;
        p.vector.assign(n, 0.0);
        for (int i = 0; i < m; ++i) {
            p.vector[i] = sector.vector[i];
            p.vector[n - 1 - i] = parity > 0 ? sector.vector[i] : -sector.vector[i];
        }
        if (parity > 0) p.vector[m] = sqrt2 * sector.vector[m];
        normalize(p.vector);
        fix_sign(p.vector);
        return p;
    };

    // merge ascending; near-degenerate pairs surface the even sector first
    std::vector<EigenPair> out;
    std::size_t ie = 0;
    std::size_t io = 0;
    const double tie = 1e-12 * sc;
    while (static_cast<int>(out.size()) < count) {
        const bool even_left = ie < ev.size();
        const bool odd_left = io < od.size();
        if (!even_left && !odd_left)
            throw InvariantError("sector merge ran out of eigenpairs");
        bool take_even;
        if (!odd_left) take_even = true;
        else if (!even_left) take_even = false;
        else take_even = ev[ie].value <= od[io].value + tie;
        out.push_back(take_even ? unfold(ev[ie++], 1) : unfold(od[io++], -1));
    }

    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k].value = rayleigh(t, out[k].vector);
        const double res = residual(t, out[k].vector, out[k].value);
        if (res > kResidualRel * sc)
            throw NumericFailure("folded eigenpair " + std::to_string(k) + " residual " +
                                 std::to_string(res) + " exceeds " +
                                 std::to_string(kResidualRel * sc));
    }
    return out;
}

} // namespace bohr
