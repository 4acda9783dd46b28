#pragma once
// Context posets over M_n(C): atomic resolutions of identity ordered by
// refinement, the lattice of monotone projection families with Heyting
// implication, Kochen-Specker ray-coloring search, Gleason additivity, and
// the rank-1 pure-state extension.

#include <cstdint>
#include <string>
#include <vector>

#include "bohr/algebra.hpp"

namespace bohr {

inline constexpr std::uint64_t kFamilyCap = 1000000;   // enumeration candidate cap

struct Context {
    int dim = 0;
    std::vector<Matrix> atoms;
    std::string label;

    // validates pairwise orthogonality, projection property, completeness (1e-10)
    static Context make(int dim, std::vector<Matrix> atoms, std::string label = "");

    int size() const { return static_cast<int>(atoms.size()); }
    bool is_maximal() const;
    Matrix projection_for(std::uint64_t mask) const;   // sum of the atoms in mask
};

Context bottom_context(int dim);
Context context_from_observable(const HermitianOperator& h);

bool leq(const Context& c, const Context& d);
bool same_context(const Context& c, const Context& d);
Context meet(const Context& c, const Context& d);

struct ContextPoset {
    std::vector<Context> contexts;
    std::vector<std::vector<char>> order;   // order[i][j]: contexts[i] <= contexts[j]
    // refine[i][j][k]: mask over atoms of j summing to atom k of i, when order[i][j]
    std::vector<std::vector<std::vector<std::uint64_t>>> refine;
    int bottom = -1;

    // dedups generators, adds the bottom context, closes under pairwise meet
    static ContextPoset build(std::vector<Context> generators);

    int size() const { return static_cast<int>(contexts.size()); }
    int index_of(const Context& c) const;   // -1 when absent
};

struct MonotoneProjectionFamily {
    const ContextPoset* poset = nullptr;
    std::vector<std::uint64_t> masks;   // atom-subset mask per context

    bool operator==(const MonotoneProjectionFamily& other) const {
        return poset == other.poset && masks == other.masks;
    }
};

bool family_monotone(const ContextPoset& poset, const std::vector<std::uint64_t>& masks);
MonotoneProjectionFamily family_top(const ContextPoset& poset);
MonotoneProjectionFamily family_bottom(const ContextPoset& poset);
bool family_leq(const MonotoneProjectionFamily& e, const MonotoneProjectionFamily& f);

std::vector<MonotoneProjectionFamily> enumerate_monotone_families(
    const ContextPoset& poset, std::uint64_t cap = kFamilyCap);

MonotoneProjectionFamily heyting_meet(const MonotoneProjectionFamily& e,
                                      const MonotoneProjectionFamily& f);
MonotoneProjectionFamily heyting_join(const MonotoneProjectionFamily& e,
                                      const MonotoneProjectionFamily& f);
// join of all monotone g with g meet e <= f, by exhaustive enumeration
MonotoneProjectionFamily heyting_implies(const MonotoneProjectionFamily& e,
                                         const MonotoneProjectionFamily& f,
                                         std::uint64_t cap = kFamilyCap);
MonotoneProjectionFamily heyting_not(const MonotoneProjectionFamily& e,
                                     std::uint64_t cap = kFamilyCap);

struct ExcludedMiddleReport {
    MonotoneProjectionFamily family;   // e join (not e)
    bool is_top = false;
};
ExcludedMiddleReport excluded_middle_report(const MonotoneProjectionFamily& e,
                                            std::uint64_t cap = kFamilyCap);

struct RayContextSystem {
    int dim = 0;
    std::vector<CVector> rays;                 // unit vectors
    std::vector<std::vector<int>> contexts;    // n mutually orthogonal ray indices each

    // validates unit norms, per-context orthogonality (1e-10), index ranges
    static RayContextSystem make(int dim, std::vector<CVector> rays,
                                 std::vector<std::vector<int>> contexts);
};

struct KsResult {
    bool satisfiable = false;
    std::vector<int> assignment;   // 0/1 per ray when satisfiable, else empty
};

// exhaustive backtracking with one-true-ray-per-context propagation
KsResult ks_search(const RayContextSystem& sys);
bool ks_validate(const RayContextSystem& sys, const std::vector<int>& assignment);

// max additivity defect of P(e) = tr(rho e) over all disjoint atom-subset pairs
// in each context; |P(I) - 1| is folded into the same maximum
double gleason_additivity_check(const State& s, const std::vector<Context>& contexts);

// vector state on the range of a rank-1 atom of a maximal context
State pure_state_extension(const Context& c, int atom_index);

} // namespace bohr
