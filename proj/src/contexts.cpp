#include "bohr/contexts.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

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

// b is a subatom of a when a b = b
bool under(const Matrix& a, const Matrix& b) {
    return op_norm_bound(a * b - b) <= kProjectionTol * std::max(1.0, op_norm_bound(b));
}

bool overlaps(const Matrix& a, const Matrix& b) {
    return (a * b).trace().real() > kProjectionTol;
}

std::uint64_t refine_union(const std::vector<std::uint64_t>& table, std::uint64_t mask) {
    std::uint64_t out = 0;
    for (std::size_t k = 0; k < table.size(); ++k)
        if (mask >> k & 1) out |= table[k];
    return out;
}

void check_family(const MonotoneProjectionFamily& e) {
    if (e.poset == nullptr) throw InvariantError("projection family has no poset");
    if (e.masks.size() != static_cast<std::size_t>(e.poset->size()))
        throw InvariantError("projection family length does not match poset size");
}

void check_same_poset(const MonotoneProjectionFamily& e, const MonotoneProjectionFamily& f) {
    check_family(e);
    check_family(f);
    if (e.poset != f.poset)
        throw InvariantError("projection families live over different posets");
}

} // namespace

Context Context::make(int dim, std::vector<Matrix> atoms, std::string label) {
    if (dim < 1) throw InvalidProjection("context dimension must be positive");
    if (atoms.empty()) throw InvalidProjection("context needs at least one atom");
    if (atoms.size() > 64)
        throw CapacityError("contexts with more than 64 atoms are not supported");
    Matrix sum = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const Matrix& a = atoms[i];
        if (a.rows() != dim || a.cols() != dim)
            throw InvalidProjection("atom " + std::to_string(i) + " has wrong dimension");
        if (op_norm_bound(a - a.adjoint()) > kProjectionTol)
            throw InvalidProjection("atom " + std::to_string(i) + " is not hermitian");
        if (op_norm_bound(a * a - a) > kProjectionTol)
            throw InvalidProjection("atom " + std::to_string(i) + " is not idempotent");
        if (a.trace().real() < 0.5)
            throw InvalidProjection("atom " + std::to_string(i) + " is (numerically) zero");
        for (std::size_t j = 0; j < i; ++j)
            if (op_norm_bound(atoms[j] * a) > kProjectionTol)
                throw InvalidProjection("atoms " + std::to_string(j) + " and " +
                                        std::to_string(i) + " are not orthogonal");
        sum += a;
    }
    if (op_norm_bound(sum - Matrix::Identity(dim, dim)) > kProjectionTol)
        throw InvalidProjection("atoms do not sum to the identity");
    Context c;
    c.dim = dim;
    c.atoms = std::move(atoms);
    c.label = std::move(label);
    return c;
}

bool Context::is_maximal() const {
    if (size() != dim) return false;
    for (const Matrix& a : atoms)
        if (std::lround(a.trace().real()) != 1) return false;
    return true;
}

Matrix Context::projection_for(std::uint64_t mask) const {
    Matrix out = Matrix::Zero(dim, dim);
    for (int k = 0; k < size(); ++k)
        if (mask >> k & 1) out += atoms[k];
    return out;
}

Context bottom_context(int dim) {
    return Context::make(dim, {Matrix::Identity(dim, dim)}, "bottom");
}

Context context_from_observable(const HermitianOperator& h) {
    SpectralDecomposition sd = spectral_decompose(h);
    return Context::make(h.dim, std::move(sd.projections));
}

bool leq(const Context& c, const Context& d) {
    if (c.dim != d.dim) return false;
    for (const Matrix& a : c.atoms) {
        Matrix covered = Matrix::Zero(c.dim, c.dim);
        for (const Matrix& b : d.atoms)
            if (under(a, b)) covered += b;
        if (op_norm_bound(covered - a) > kProjectionTol) return false;
    }
    return true;
}

bool same_context(const Context& c, const Context& d) {
    return c.dim == d.dim && c.size() == d.size() && leq(c, d) && leq(d, c);
}

Context meet(const Context& c, const Context& d) {
    if (c.dim != d.dim) throw DimensionError("meet of contexts over different dimensions");
    const int nc = c.size();
    const int nd = d.size();

    // union-find over the atoms of both contexts, merged on range overlap
    std::vector<int> parent(nc + nd);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto unite = [&parent, &find](int x, int y) { parent[find(x)] = find(y); };

    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nd; ++j)
            if (overlaps(c.atoms[i], d.atoms[j])) unite(i, nc + j);

    std::vector<Matrix> merged;
    std::vector<int> root_slot(nc + nd, -1);
    for (int i = 0; i < nc; ++i) {
        const int r = find(i);
        if (root_slot[r] < 0) {
            root_slot[r] = static_cast<int>(merged.size());
            merged.push_back(c.atoms[i]);
        } else {
            merged[root_slot[r]] += c.atoms[i];
        }
    }
    return Context::make(c.dim, std::move(merged));
}

ContextPoset ContextPoset::build(std::vector<Context> generators) {
    if (generators.empty())
        throw InvariantError("context poset needs at least one generator");
    const int dim = generators.front().dim;
    for (const Context& g : generators)
        if (g.dim != dim)
            throw DimensionError("generator contexts have mixed dimensions");

    ContextPoset p;
    p.contexts.push_back(bottom_context(dim));
    p.bottom = 0;
    auto add_unique = [&p](const Context& c) {
        for (const Context& have : p.contexts)
            if (same_context(have, c)) return;
        p.contexts.push_back(c);
    };
    for (Context& g : generators) add_unique(g);

    for (std::size_t fresh = 1; fresh < p.contexts.size();) {
        const std::size_t stop = p.contexts.size();
        for (std::size_t i = fresh; i < stop; ++i)
            for (std::size_t j = 0; j < i; ++j)
                add_unique(meet(p.contexts[i], p.contexts[j]));
        fresh = stop;
    }

    const int n = p.size();
    p.order.assign(n, std::vector<char>(n, 0));
    p.refine.assign(n, std::vector<std::vector<std::uint64_t>>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (!leq(p.contexts[i], p.contexts[j])) continue;
            p.order[i][j] = 1;
            std::vector<std::uint64_t> table(p.contexts[i].size(), 0);
            for (int k = 0; k < p.contexts[i].size(); ++k)
                for (int l = 0; l < p.contexts[j].size(); ++l)
                    if (under(p.contexts[i].atoms[k], p.contexts[j].atoms[l]))
                        table[k] |= std::uint64_t{1} << l;
            p.refine[i][j] = std::move(table);
        }
    return p;
}

int ContextPoset::index_of(const Context& c) const {
    for (int i = 0; i < size(); ++i)
        if (same_context(contexts[i], c)) return i;
    return -1;
}

bool family_monotone(const ContextPoset& poset, const std::vector<std::uint64_t>& masks) {
    if (masks.size() != static_cast<std::size_t>(poset.size())) return false;
    const int n = poset.size();
    for (int i = 0; i < n; ++i) {
        const std::uint64_t full = poset.contexts[i].size() == 64
                                       ? ~std::uint64_t{0}
                                       : (std::uint64_t{1} << poset.contexts[i].size()) - 1;
        if (masks[i] & ~full) return false;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || !poset.order[i][j]) continue;
            const std::uint64_t lifted = refine_union(poset.refine[i][j], masks[i]);
            if (lifted & ~masks[j]) return false;
        }
    return true;
}

MonotoneProjectionFamily family_top(const ContextPoset& poset) {
    MonotoneProjectionFamily f;
    f.poset = &poset;
    for (const Context& c : poset.contexts) {
        const std::uint64_t full =
            c.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << c.size()) - 1;
        f.masks.push_back(full);
    }
    return f;
}

MonotoneProjectionFamily family_bottom(const ContextPoset& poset) {
    MonotoneProjectionFamily f;
    f.poset = &poset;
    f.masks.assign(poset.size(), 0);
    return f;
}

bool family_leq(const MonotoneProjectionFamily& e, const MonotoneProjectionFamily& f) {
    check_same_poset(e, f);
    for (std::size_t i = 0; i < e.masks.size(); ++i)
        if (e.masks[i] & ~f.masks[i]) return false;
    return true;
}

std::vector<MonotoneProjectionFamily> enumerate_monotone_families(const ContextPoset& poset,
                                                                  std::uint64_t cap) {
    std::uint64_t candidates = 1;
    for (const Context& c : poset.contexts) {
        const int bits = c.size();
        if (bits >= 63 || candidates > (cap >> bits))
            throw CapacityError("monotone family enumeration would exceed the cap of " +
                                std::to_string(cap) + " candidates");
        candidates <<= bits;
    }

    const int n = poset.size();
    std::vector<MonotoneProjectionFamily> out;
    std::vector<std::uint64_t> masks(n, 0);

    auto consistent = [&poset, &masks](int j) {
        for (int i = 0; i < j; ++i) {
            if (poset.order[i][j] &&
                (refine_union(poset.refine[i][j], masks[i]) & ~masks[j]))
                return false;
            if (poset.order[j][i] &&
                (refine_union(poset.refine[j][i], masks[j]) & ~masks[i]))
                return false;
        }
        return true;
    };

    auto dfs = [&](auto&& self, int j) -> void {
        if (j == n) {
            MonotoneProjectionFamily f;
            f.poset = &poset;
            f.masks = masks;
            out.push_back(std::move(f));
            return;
        }
        const std::uint64_t full = (std::uint64_t{1} << poset.contexts[j].size()) - 1;
        for (std::uint64_t m = 0; m <= full; ++m) {
            masks[j] = m;
            if (consistent(j)) self(self, j + 1);
        }
        masks[j] = 0;
    };
    dfs(dfs, 0);
    return out;
}

MonotoneProjectionFamily heyting_meet(const MonotoneProjectionFamily& e,
                                      const MonotoneProjectionFamily& f) {
    check_same_poset(e, f);
    MonotoneProjectionFamily out;
    out.poset = e.poset;
    for (std::size_t i = 0; i < e.masks.size(); ++i)
        out.masks.push_back(e.masks[i] & f.masks[i]);
    return out;
}

MonotoneProjectionFamily heyting_join(const MonotoneProjectionFamily& e,
                                      const MonotoneProjectionFamily& f) {
    check_same_poset(e, f);
    MonotoneProjectionFamily out;
    out.poset = e.poset;
    for (std::size_t i = 0; i < e.masks.size(); ++i)
        out.masks.push_back(e.masks[i] | f.masks[i]);
    return out;
}

MonotoneProjectionFamily heyting_implies(const MonotoneProjectionFamily& e,
                                         const MonotoneProjectionFamily& f,
                                         std::uint64_t cap) {
    check_same_poset(e, f);
    MonotoneProjectionFamily best = family_bottom(*e.poset);
    for (const MonotoneProjectionFamily& g : enumerate_monotone_families(*e.poset, cap))
        if (family_leq(heyting_meet(g, e), f)) best = heyting_join(best, g);
    return best;
}

MonotoneProjectionFamily heyting_not(const MonotoneProjectionFamily& e, std::uint64_t cap) {
    check_family(e);
    return heyting_implies(e, family_bottom(*e.poset), cap);
}

ExcludedMiddleReport excluded_middle_report(const MonotoneProjectionFamily& e,
                                            std::uint64_t cap) {
    check_family(e);
    ExcludedMiddleReport r;
    r.family = heyting_join(e, heyting_not(e, cap));
    r.is_top = r.family == family_top(*e.poset);
    return r;
}

RayContextSystem RayContextSystem::make(int dim, std::vector<CVector> rays,
                                        std::vector<std::vector<int>> contexts) {
    if (dim < 1) throw InvalidSystem("ray system dimension must be positive");
    for (std::size_t i = 0; i < rays.size(); ++i) {
        if (rays[i].size() != dim)
            throw InvalidSystem("ray " + std::to_string(i) + " has wrong dimension");
        if (std::abs(rays[i].norm() - 1.0) > kProjectionTol)
            throw InvalidSystem("ray " + std::to_string(i) + " is not a unit vector");
    }
    for (std::size_t c = 0; c < contexts.size(); ++c) {
        const std::vector<int>& ctx = contexts[c];
        if (static_cast<int>(ctx.size()) != dim)
            throw InvalidSystem("context " + std::to_string(c) + " does not list exactly " +
                                std::to_string(dim) + " rays");
        for (int idx : ctx)
            if (idx < 0 || idx >= static_cast<int>(rays.size()))
                throw InvalidSystem("context " + std::to_string(c) +
                                    " references a ray out of range");
        for (std::size_t a = 0; a < ctx.size(); ++a)
            for (std::size_t b = a + 1; b < ctx.size(); ++b) {
                const double ip = std::abs(rays[ctx[a]].dot(rays[ctx[b]]));
                if (ip > kProjectionTol)
                    throw InvalidSystem("context " + std::to_string(c) + " rays " +
                                        std::to_string(ctx[a]) + " and " +
                                        std::to_string(ctx[b]) +
                                        " are not orthogonal (inner product " +
                                        std::to_string(ip) + ")");
            }
    }
    RayContextSystem sys;
    sys.dim = dim;
    sys.rays = std::move(rays);
    sys.contexts = std::move(contexts);
    return sys;
}

namespace {

// -1 unknown, 0 false, 1 true; returns false on contradiction
bool ks_propagate(const RayContextSystem& sys, std::vector<int>& value) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const std::vector<int>& ctx : sys.contexts) {
            int trues = 0;
            int unknowns = 0;
            int last_unknown = -1;
            for (int idx : ctx) {
                if (value[idx] == 1) ++trues;
                else if (value[idx] == -1) { ++unknowns; last_unknown = idx; }
            }
            if (trues > 1) return false;
            if (trues == 1 && unknowns > 0) {
                for (int idx : ctx)
                    if (value[idx] == -1) { value[idx] = 0; changed = true; }
            }
            if (trues == 0) {
                if (unknowns == 0) return false;
                if (unknowns == 1) { value[last_unknown] = 1; changed = true; }
            }
        }
    }
    return true;
}

bool ks_branch(const RayContextSystem& sys, std::vector<int>& value) {
    if (!ks_propagate(sys, value)) return false;

    // fail-first: branch inside the undecided context with fewest unknowns
    int best_ray = -1;
    int best_unknowns = 1 << 30;
    for (const std::vector<int>& ctx : sys.contexts) {
        int trues = 0;
        int unknowns = 0;
        int first_unknown = -1;
        for (int idx : ctx) {
            if (value[idx] == 1) ++trues;
            else if (value[idx] == -1) {
                ++unknowns;
                if (first_unknown < 0) first_unknown = idx;
            }
        }
        if (trues == 0 && unknowns > 0 && unknowns < best_unknowns) {
            best_unknowns = unknowns;
            best_ray = first_unknown;
        }
    }
    if (best_ray < 0) {
        for (std::size_t i = 0; i < value.size(); ++i)
            if (value[i] == -1) value[i] = 0;   // rays outside every undecided context
        return true;
    }

    for (int choice : {1, 0}) {
        std::vector<int> trial = value;
        trial[best_ray] = choice;
        if (ks_branch(sys, trial)) {
            value = std::move(trial);
            return true;
        }
    }
    return false;
}

} // namespace

KsResult ks_search(const RayContextSystem& sys) {
    std::vector<int> value(sys.rays.size(), -1);
    KsResult r;
    r.satisfiable = ks_branch(sys, value);
    if (r.satisfiable) {
        for (int& v : value)
            if (v == -1) v = 0;
        r.assignment = std::move(value);
        if (!ks_validate(sys, r.assignment))
            throw InvariantError("search produced an assignment that fails validation");
    }
    return r;
}

bool ks_validate(const RayContextSystem& sys, const std::vector<int>& assignment) {
    if (assignment.size() != sys.rays.size()) return false;
    for (int v : assignment)
        if (v != 0 && v != 1) return false;
    for (const std::vector<int>& ctx : sys.contexts) {
        int trues = 0;
        for (int idx : ctx) trues += assignment[idx];
        if (trues != 1) return false;
    }
    return true;
}

double gleason_additivity_check(const State& s, const std::vector<Context>& contexts) {
    double worst = 0.0;
    for (const Context& c : contexts) {
        if (c.dim != s.dim)
            throw DimensionError("context dimension does not match state dimension");
        if (c.size() > 16)
            throw CapacityError("additivity scan over more than 16 atoms per context");
        const std::uint64_t full = (std::uint64_t{1} << c.size()) - 1;
        std::vector<double> prob(full + 1, 0.0);
        for (std::uint64_t m = 1; m <= full; ++m)
            prob[m] = (s.density * c.projection_for(m)).trace().real();
        for (std::uint64_t m1 = 1; m1 <= full; ++m1)
            for (std::uint64_t m2 = m1 + 1; m2 <= full; ++m2) {
                if (m1 & m2) continue;
                worst = std::max(worst, std::abs(prob[m1 | m2] - prob[m1] - prob[m2]));
            }
        worst = std::max(worst, std::abs(prob[full] - 1.0));
    }
    return worst;
}

State pure_state_extension(const Context& c, int atom_index) {
    if (!c.is_maximal())
        throw NotMaximal("pure state extension requires a maximal context");
    if (atom_index < 0 || atom_index >= c.size())
        throw IndexError("atom index " + std::to_string(atom_index) + " out of range");
    const Matrix& a = c.atoms[atom_index];
    int best_col = 0;
    double best_norm = -1.0;
    for (int j = 0; j < c.dim; ++j) {
        const double n = a.col(j).norm();
        if (n > best_norm) { best_norm = n; best_col = j; }
    }
    return State::from_vector(a.col(best_col));
}

} // namespace bohr
