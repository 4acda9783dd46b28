#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "bohr/contexts.hpp"
#include "bohr/io.hpp"
#include "bohr/rng.hpp"
#include "oracles.hpp"

using namespace bohr;

namespace {

Matrix pauli_z() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

Matrix pauli_x() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

// bottom, C_z, C_x over M_2
ContextPoset spin_poset() {
    return ContextPoset::build({context_from_observable(HermitianOperator::from(pauli_z())),
                                context_from_observable(HermitianOperator::from(pauli_x()))});
}

Matrix basis_projection(int n, int i) {
    Matrix m = Matrix::Zero(n, n);
    m(i, i) = 1.0;
    return m;
}

std::uint64_t mask_of_atom(const Context& c, const Matrix& atom) {
    for (int k = 0; k < c.size(); ++k)
        if ((c.atoms[k] - atom).cwiseAbs().maxCoeff() < 1e-9) return 1ull << k;
    REQUIRE(false);
    return 0;
}

} // namespace

TEST_CASE("context construction validates atoms") {
    std::vector<Matrix> good = {basis_projection(2, 0), basis_projection(2, 1)};
    CHECK_NOTHROW(Context::make(2, good));

    // not idempotent
    CHECK_THROWS_AS(Context::make(2, {2.0 * basis_projection(2, 0), basis_projection(2, 1)}),
                    InvalidProjection);
    // not summing to the identity
    CHECK_THROWS_AS(Context::make(2, {basis_projection(2, 0)}), InvalidProjection);
    // not pairwise orthogonal
    CHECK_THROWS_AS(Context::make(2, {basis_projection(2, 0), basis_projection(2, 0),
                                      basis_projection(2, 1)}),
                    InvalidProjection);
    // not hermitian
    Matrix skew = Matrix::Zero(2, 2);
    skew(0, 1) = 1.0;
    CHECK_THROWS_AS(Context::make(2, {skew, Matrix::Identity(2, 2) - skew}), InvalidProjection);

    const int big = 65;
    std::vector<Matrix> atoms;
    for (int i = 0; i < big; ++i) atoms.push_back(basis_projection(big, i));
    CHECK_THROWS_AS(Context::make(big, std::move(atoms)), CapacityError);
}

TEST_CASE("context from observable matches the spectral projections") {
    const HermitianOperator h = HermitianOperator::from(pauli_z());
    const Context c = context_from_observable(h);
    CHECK(c.size() == 2);
    CHECK(c.is_maximal());

    const HermitianOperator degenerate =
        HermitianOperator::from(Matrix(Matrix::Identity(3, 3) * 2.0 + basis_projection(3, 0)));
    const Context d = context_from_observable(degenerate);
    CHECK(d.size() == 2);
    CHECK(!d.is_maximal());

    const Context bottom = bottom_context(3);
    CHECK(bottom.size() == 1);
    CHECK((bottom.atoms[0] - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("refinement order and meet behave as a lattice on random contexts") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4;
        const Context fine = oracles::random_maximal_context(rng, n);

        // coarsen by fusing two random atoms
        const int i = static_cast<int>(rng.next_u64() % n);
        int j = static_cast<int>(rng.next_u64() % n);
        if (j == i) j = (j + 1) % n;
        std::vector<Matrix> atoms;
        atoms.push_back(fine.atoms[i] + fine.atoms[j]);
        for (int k = 0; k < n; ++k)
            if (k != i && k != j) atoms.push_back(fine.atoms[k]);
        const Context coarse = Context::make(n, std::move(atoms));

        CHECK(leq(coarse, fine));
        CHECK(!leq(fine, coarse));
        CHECK(leq(bottom_context(n), fine));
        CHECK(leq(fine, fine));

        CHECK(same_context(meet(fine, fine), fine));
        CHECK(same_context(meet(fine, coarse), coarse));
        // unrelated maximal contexts generically meet at the bottom
        const Context other = oracles::random_maximal_context(rng, n);
        CHECK(same_context(meet(fine, other), bottom_context(n)));
    }
}

TEST_CASE("poset build dedups, closes under meet, and indexes the bottom first") {
    const ContextPoset p = spin_poset();
    REQUIRE(p.size() == 3);
    CHECK(p.bottom == 0);
    CHECK(p.contexts[0].size() == 1);
    CHECK(p.contexts[1].size() == 2);
    CHECK(p.contexts[2].size() == 2);
    CHECK(p.order[0][1]);
    CHECK(p.order[0][2]);
    CHECK(!p.order[1][2]);
    CHECK(!p.order[2][1]);

    // duplicate generators collapse
    const ContextPoset q = ContextPoset::build(
        {context_from_observable(HermitianOperator::from(pauli_z())),
         context_from_observable(HermitianOperator::from(Matrix(3.0 * pauli_z())))});
    CHECK(q.size() == 2);
}

TEST_CASE("refine tables decompose coarse atoms into fine ones") {
    Rng rng(22);
    std::vector<Context> gens;
    for (int t = 0; t < 3; ++t) gens.push_back(oracles::random_maximal_context(rng, 3));
    const ContextPoset p = ContextPoset::build(std::move(gens));

    for (int i = 0; i < p.size(); ++i)
        for (int j = 0; j < p.size(); ++j) {
            if (!p.order[i][j]) continue;
            std::uint64_t combined = 0;
            for (int k = 0; k < p.contexts[i].size(); ++k) {
                const std::uint64_t mask = p.refine[i][j][k];
                CHECK((combined & mask) == 0);
                combined |= mask;
                const Matrix sum = p.contexts[j].projection_for(mask);
                CHECK((sum - p.contexts[i].atoms[k]).cwiseAbs().maxCoeff() < 1e-9);
            }
            CHECK(combined + 1 == (1ull << p.contexts[j].size()));
        }
}

TEST_CASE("meet is the greatest lower bound within the diagonal M_3 poset") {
    std::vector<Context> gens;
    gens.push_back(Context::make(
        3, {basis_projection(3, 0), basis_projection(3, 1), basis_projection(3, 2)}));
    for (int i = 0; i < 3; ++i)
        gens.push_back(Context::make(
            3, {basis_projection(3, i), Matrix(Matrix::Identity(3, 3) - basis_projection(3, i))}));
    const ContextPoset p = ContextPoset::build(std::move(gens));
    REQUIRE(p.size() == 5);

    for (int i = 0; i < p.size(); ++i)
        for (int j = 0; j < p.size(); ++j) {
            const int m = p.index_of(meet(p.contexts[i], p.contexts[j]));
            REQUIRE(m >= 0);
            CHECK(p.order[m][i]);
            CHECK(p.order[m][j]);
            for (int k = 0; k < p.size(); ++k)
                if (p.order[k][i] && p.order[k][j]) CHECK(p.order[k][m]);
        }
}

TEST_CASE("monotone family enumeration matches the matrix-level oracle") {
    const ContextPoset p = spin_poset();
    const auto families = enumerate_monotone_families(p);
    CHECK(families.size() == 17);

    // brute force over all 2 * 4 * 4 candidates with matrix-level nesting
    int oracle_count = 0;
    for (std::uint64_t m0 = 0; m0 < 2; ++m0)
        for (std::uint64_t m1 = 0; m1 < 4; ++m1)
            for (std::uint64_t m2 = 0; m2 < 4; ++m2) {
                const std::vector<std::uint64_t> masks = {m0, m1, m2};
                const bool lib = family_monotone(p, masks);
                const bool oracle = oracles::family_monotone_matrix_oracle(p, masks);
                CHECK(lib == oracle);
                if (oracle) ++oracle_count;
            }
    CHECK(oracle_count == 17);

    for (const auto& f : families) CHECK(family_monotone(p, f.masks));
}

TEST_CASE("enumeration cap raises a capacity error") {
    const ContextPoset p = spin_poset();
    CHECK_THROWS_AS(enumerate_monotone_families(p, 16), CapacityError);
    CHECK_NOTHROW(enumerate_monotone_families(p, 32));
}

TEST_CASE("diagonal M_3 poset has 96 monotone families") {
    std::vector<Context> gens;
    gens.push_back(Context::make(
        3, {basis_projection(3, 0), basis_projection(3, 1), basis_projection(3, 2)}));
    for (int i = 0; i < 3; ++i)
        gens.push_back(Context::make(
            3, {basis_projection(3, i), Matrix(Matrix::Identity(3, 3) - basis_projection(3, i))}));
    const ContextPoset p = ContextPoset::build(std::move(gens));
    const auto families = enumerate_monotone_families(p);
    CHECK(families.size() == 96);
    for (const auto& f : families)
        CHECK(oracles::family_monotone_matrix_oracle(p, f.masks));
}

TEST_CASE("heyting operations satisfy lattice laws on the spin poset") {
    const ContextPoset p = spin_poset();
    const auto families = enumerate_monotone_families(p);
    const auto top = family_top(p);
    const auto bottom = family_bottom(p);

    for (const auto& e : families) {
        CHECK(family_leq(bottom, e));
        CHECK(family_leq(e, top));
        CHECK(heyting_meet(e, top) == e);
        CHECK(heyting_join(e, bottom) == e);
        for (const auto& f : families) {
            const auto m = heyting_meet(e, f);
            const auto j = heyting_join(e, f);
            CHECK(family_monotone(p, m.masks));
            CHECK(family_monotone(p, j.masks));
            CHECK(family_leq(m, e));
            CHECK(family_leq(e, j));
            CHECK(m == heyting_meet(f, e));
            CHECK(j == heyting_join(f, e));
        }
    }
}

TEST_CASE("heyting implication satisfies the adjunction exhaustively") {
    const ContextPoset p = spin_poset();
    const auto families = enumerate_monotone_families(p);

    for (const auto& e : families)
        for (const auto& f : families) {
            const auto imp = heyting_implies(e, f);
            CHECK(family_monotone(p, imp.masks));
            for (const auto& g : families) {
                const bool lhs = family_leq(g, imp);
                const bool rhs = family_leq(heyting_meet(g, e), f);
                CHECK(lhs == rhs);
            }
        }
}

TEST_CASE("meet distributes over join on the spin poset") {
    const ContextPoset p = spin_poset();
    const auto families = enumerate_monotone_families(p);
    for (const auto& e : families)
        for (const auto& f : families)
            for (const auto& g : families) {
                const auto lhs = heyting_meet(e, heyting_join(f, g));
                const auto rhs = heyting_join(heyting_meet(e, f), heyting_meet(e, g));
                CHECK(lhs == rhs);
            }
}

TEST_CASE("excluded middle and double negation fail intuitionistically") {
    const ContextPoset p = spin_poset();
    const Context& cz = p.contexts[1];
    const Matrix up = basis_projection(2, 0);
    const std::uint64_t up_mask = mask_of_atom(cz, up);
    const std::uint64_t down_mask = 3ull ^ up_mask;

    // the single-context family supported on the spin-up atom
    MonotoneProjectionFamily e{&p, {0, up_mask, 0}};
    REQUIRE(family_monotone(p, e.masks));

    const auto not_e = heyting_not(e);
    CHECK(not_e.masks == std::vector<std::uint64_t>{0, down_mask, 3});

    const auto report = excluded_middle_report(e);
    CHECK(!report.is_top);
    CHECK(report.family.masks == std::vector<std::uint64_t>{0, 3, 3});

    // here double negation recovers e
    CHECK(heyting_not(not_e) == e);

    // the family full everywhere except the bottom breaks double negation too
    MonotoneProjectionFamily open_top{&p, {0, 3, 3}};
    const auto not_open = heyting_not(open_top);
    CHECK(not_open == family_bottom(p));
    CHECK(heyting_not(not_open) == family_top(p));
    CHECK(!(heyting_not(not_open) == open_top));
    CHECK(!excluded_middle_report(open_top).is_top);

    // classical sanity at the extremes
    CHECK(excluded_middle_report(family_top(p)).is_top);
    CHECK(excluded_middle_report(family_bottom(p)).is_top);
}

TEST_CASE("ray system validation") {
    CVector e0 = CVector::Zero(2), e1 = CVector::Zero(2);
    e0(0) = 1.0;
    e1(1) = 1.0;

    CHECK_NOTHROW(RayContextSystem::make(2, {e0, e1}, {{0, 1}}));
    CHECK_THROWS_AS(RayContextSystem::make(2, {2.0 * e0, e1}, {{0, 1}}), InvalidSystem);
    CHECK_THROWS_AS(RayContextSystem::make(2, {e0, e1}, {{0, 2}}), InvalidSystem);
    CHECK_THROWS_AS(RayContextSystem::make(2, {e0, e1}, {{0}}), InvalidSystem);

    CVector tilted(2);
    tilted << 1.0, 1.0;
    tilted /= tilted.norm();
    CHECK_THROWS_AS(RayContextSystem::make(2, {e0, tilted}, {{0, 1}}), InvalidSystem);
}

TEST_CASE("ks search agrees with exhaustive enumeration on shared-ray systems") {
    Rng rng(23);
    for (int trial = 0; trial < 15; ++trial) {
        const auto basis = oracles::random_orthonormal_basis(rng, 3);
        std::vector<CVector> rays = {basis[0], basis[1], basis[2]};

        // second basis shares ray 0, third shares the rotated ray 3
        const double t1 = rng.uniform01() * 3.0 + 0.2;
        rays.push_back(std::cos(t1) * basis[1] + std::sin(t1) * basis[2]);
        rays.push_back(-std::sin(t1) * basis[1] + std::cos(t1) * basis[2]);
        const double t2 = rng.uniform01() * 3.0 + 0.2;
        rays.push_back(std::cos(t2) * basis[0] + std::sin(t2) * rays[4]);
        rays.push_back(-std::sin(t2) * basis[0] + std::cos(t2) * rays[4]);

        const RayContextSystem sys =
            RayContextSystem::make(3, rays, {{0, 1, 2}, {0, 3, 4}, {3, 5, 6}});

        const KsResult fast = ks_search(sys);
        const auto slow = oracles::naive_ks(sys);
        CHECK(fast.satisfiable == slow.satisfiable);
        if (fast.satisfiable) CHECK(ks_validate(sys, fast.assignment));
    }
}

TEST_CASE("ks validation rejects wrong counts") {
    CVector e0 = CVector::Zero(2), e1 = CVector::Zero(2);
    e0(0) = 1.0;
    e1(1) = 1.0;
    const RayContextSystem sys = RayContextSystem::make(2, {e0, e1}, {{0, 1}});
    CHECK(ks_validate(sys, {1, 0}));
    CHECK(ks_validate(sys, {0, 1}));
    CHECK(!ks_validate(sys, {1, 1}));
    CHECK(!ks_validate(sys, {0, 0}));
    CHECK(!ks_validate(sys, {1}));
}

TEST_CASE("the shipped 18-ray system admits no coloring") {
    const auto path = std::filesystem::path(BOHR_DATA_DIR) / "ks18_dim4.rays";
    const RayContextSystem sys = io::read_ray_system(path);
    CHECK(sys.dim == 4);
    CHECK(sys.rays.size() == 18);
    CHECK(sys.contexts.size() == 9);

    // every ray appears in exactly two contexts, so any coloring would give
    // nine context-sums of total parity even; nine odd sums cannot do that
    std::vector<int> uses(18, 0);
    for (const auto& ctx : sys.contexts)
        for (int r : ctx) ++uses[r];
    for (int u : uses) CHECK(u == 2);

    const KsResult result = ks_search(sys);
    CHECK(!result.satisfiable);
    CHECK(result.assignment.empty());
}

TEST_CASE("gleason additivity holds for density states") {
    Rng rng(24);
    std::vector<Context> contexts;
    for (int t = 0; t < 20; ++t) contexts.push_back(oracles::random_maximal_context(rng, 4));
    for (int t = 0; t < 20; ++t) {
        const State s = oracles::random_density(rng, 4);
        CHECK(gleason_additivity_check(s, contexts) <= 1e-12);
    }
    CHECK_THROWS_AS(
        gleason_additivity_check(State::maximally_mixed(3), contexts), DimensionError);
}

TEST_CASE("pure state extension collapses conditioning to the atom state") {
    Rng rng(25);
    for (int n = 2; n <= 6; ++n) {
        for (int t = 0; t < 10; ++t) {
            const Context c = oracles::random_maximal_context(rng, n);
            const int k = static_cast<int>(rng.next_u64() % n);
            const State ext = pure_state_extension(c, k);

            // conditioning any faithful density on the atom reaches the same state
            const Matrix sigma = oracles::random_density(rng, n).density;
            const Matrix& e = c.atoms[k];
            Matrix conditioned = e * sigma * e;
            conditioned /= conditioned.trace().real();
            CHECK((conditioned - ext.density).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(ext.vector.has_value());
        }
    }

    const Context degenerate = bottom_context(3);
    CHECK_THROWS_AS(pure_state_extension(degenerate, 0), NotMaximal);
    Rng rng2(26);
    const Context c = oracles::random_maximal_context(rng2, 3);
    CHECK_THROWS_AS(pure_state_extension(c, 5), IndexError);
}
