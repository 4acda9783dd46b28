// Release gate: one criterion per invocation, selected by argv[1] (1-11).
// Prints a single pass/fail line; a failed check or a blown time budget makes
// the process exit nonzero.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bohr/algebra.hpp"
#include "bohr/asymptotics.hpp"
#include "bohr/contexts.hpp"
#include "bohr/io.hpp"
#include "bohr/rng.hpp"
#include "bohr/semiclassics.hpp"
#include "oracles.hpp"

using namespace bohr;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Matrix diag_matrix(const std::vector<double>& d) {
    Matrix m = Matrix::Zero(d.size(), d.size());
    for (size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

// ---- criterion 1: Born measure example and normalization sweep ----

Outcome criterion1() {
    Outcome out;
    const HermitianOperator h = HermitianOperator::from(diag_matrix({1, 2, 2}));
    CVector v(3);
    v.setOnes();
    const DiscreteProbabilityMeasure m = born_measure(h, State::from_vector(v));
    out.require(m.support.size() == 2, "support size " + std::to_string(m.support.size()));
    if (m.support.size() == 2) {
        out.require(m.support[0] == 1.0 && m.support[1] == 2.0, "support values off");
        out.require(std::abs(m.weights[0] - 1.0 / 3.0) <= 1e-12 &&
                        std::abs(m.weights[1] - 2.0 / 3.0) <= 1e-12,
                    "example weights deviate beyond 1e-12");
    }

    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_u64() % 7);
        const DiscreteProbabilityMeasure r =
            born_measure(oracles::random_hermitian(rng, n), oracles::random_density(rng, n));
        double total = 0.0;
        for (double w : r.weights) {
            if (w < 0.0) out.require(false, "negative weight");
            total += w;
        }
        worst = std::max(worst, std::abs(total - 1.0));
    }
    out.require(worst <= 1e-12, "normalization defect " + fmt(worst));
    out.note("200 random pairs, worst defect " + fmt(worst));
    return out;
}

// ---- criterion 2: product-state evaluation and frequency variance ----

Outcome criterion2() {
    Outcome out;
    Rng rng(102);
    double worst_dense = 0.0, worst_comb = 0.0, worst_var = 0.0;

    for (int trial = 0; trial < 5; ++trial) {
        const State omega = oracles::random_density(rng, 2);
        const Matrix e = oracles::random_projection(rng, 2, 1);
        const double p = (omega.density * e).trace().real();
        const ElementaryTensorSum word = ElementaryTensorSum::single(2, 1.0, {e});

        for (long long N = 1; N <= 6; ++N) {
            const Complex psv = product_state_value(omega, word, N);
            worst_dense = std::max(worst_dense, std::abs(psv - Complex(p)));
            const Matrix rho_n = oracles::product_density(omega, static_cast<int>(N));
            const Matrix j = embed_jNM_dense(word, static_cast<int>(N));
            worst_dense = std::max(worst_dense, std::abs(psv - (rho_n * j).trace()));

            const double var = frequency_variance(omega, e, N);
            worst_var = std::max(worst_var, std::abs(var - p * (1.0 - p) / N));
            const Matrix f = frequency_operator_dense(e, static_cast<int>(N));
            const Matrix centered = f - p * Matrix::Identity(f.rows(), f.cols());
            const double dense_var = (rho_n * centered * centered).trace().real();
            worst_var = std::max(worst_var, std::abs(var - dense_var));
        }
        for (long long N : {10LL, 100LL, 1000LL}) {
            const Complex psv = product_state_value(omega, word, N);
            worst_comb = std::max(worst_comb, std::abs(psv - Complex(p)));
        }
    }
    out.require(worst_dense <= 1e-12, "dense-checked deviation " + fmt(worst_dense));
    out.require(worst_comb <= 1e-12, "combinatorial deviation " + fmt(worst_comb));
    out.require(worst_var <= 1e-12, "variance deviation " + fmt(worst_var));
    out.note("worst dense " + fmt(worst_dense) + ", large-N " + fmt(worst_comb) +
             ", variance " + fmt(worst_var));
    return out;
}

// ---- criterion 3: Kochen-Specker search ----

Outcome criterion3() {
    Outcome out;
    const auto path = std::filesystem::path(BOHR_DATA_DIR) / "ks18_dim4.rays";
    const RayContextSystem shipped = io::read_ray_system(path);
    const KsResult hard = ks_search(shipped);
    out.require(!hard.satisfiable, "shipped 18-ray system reported satisfiable");

    // toy systems built to admit valuations
    std::vector<RayContextSystem> toys;
    {
        CVector e0 = CVector::Zero(2), e1 = CVector::Zero(2);
        e0(0) = 1.0;
        e1(1) = 1.0;
        toys.push_back(RayContextSystem::make(2, {e0, e1}, {{0, 1}}));
        CVector plus(2), minus(2);
        plus << 1.0, 1.0;
        minus << 1.0, -1.0;
        plus /= plus.norm();
        minus /= minus.norm();
        toys.push_back(RayContextSystem::make(2, {e0, e1, plus, minus}, {{0, 1}, {2, 3}}));
    }
    {
        Rng rng(103);
        const auto basis = oracles::random_orthonormal_basis(rng, 3);
        std::vector<CVector> rays = {basis[0], basis[1], basis[2]};
        const double t = 0.73;
        rays.push_back(std::cos(t) * basis[1] + std::sin(t) * basis[2]);
        rays.push_back(-std::sin(t) * basis[1] + std::cos(t) * basis[2]);
        toys.push_back(RayContextSystem::make(3, rays, {{0, 1, 2}, {0, 3, 4}}));
    }
    for (size_t i = 0; i < toys.size(); ++i) {
        const KsResult r = ks_search(toys[i]);
        out.require(r.satisfiable, "toy " + std::to_string(i) + " reported unsatisfiable");
        if (r.satisfiable)
            out.require(ks_validate(toys[i], r.assignment),
                        "toy " + std::to_string(i) + " witness failed validation");
    }
    out.note("shipped system unsatisfiable, " + std::to_string(toys.size()) +
             " toy witnesses validated");
    return out;
}

// ---- criterion 4: Heyting structure of the spin poset ----

Outcome criterion4() {
    Outcome out;
    Matrix sz = Matrix::Zero(2, 2), sx = Matrix::Zero(2, 2);
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;
    sx(0, 1) = 1.0;
    sx(1, 0) = 1.0;
    const ContextPoset poset =
        ContextPoset::build({context_from_observable(HermitianOperator::from(sz)),
                             context_from_observable(HermitianOperator::from(sx))});
    const auto families = enumerate_monotone_families(poset);

    bool adjunction = true;
    bool distributive = true;
    for (const auto& e : families)
        for (const auto& f : families) {
            const auto imp = heyting_implies(e, f);
            for (const auto& g : families) {
                if (family_leq(g, imp) != family_leq(heyting_meet(g, e), f)) adjunction = false;
                const auto lhs = heyting_meet(e, heyting_join(f, g));
                const auto rhs = heyting_join(heyting_meet(e, f), heyting_meet(e, g));
                if (!(lhs == rhs)) distributive = false;
            }
        }
    out.require(adjunction, "adjunction failed");
    out.require(distributive, "distributivity failed");

    bool witness = false;
    for (const auto& e : families) {
        const bool em = excluded_middle_report(e).is_top;
        const bool dn = heyting_not(heyting_not(e)) == e;
        if (!em && !dn) witness = true;
    }
    out.require(witness, "no family breaks both excluded middle and double negation");
    out.note(std::to_string(families.size()) + " monotone families checked exhaustively");
    return out;
}

// ---- criterion 5: Gleason additivity in M_4 ----

Outcome criterion5() {
    Outcome out;
    Rng rng(105);
    std::vector<Context> contexts;
    for (int t = 0; t < 100; ++t) contexts.push_back(oracles::random_maximal_context(rng, 4));

    double worst = 0.0;
    for (int t = 0; t < 100; ++t)
        worst = std::max(worst,
                         gleason_additivity_check(oracles::random_density(rng, 4), contexts));
    out.require(worst <= 1e-12, "additivity deviation " + fmt(worst));
    out.note("100 states x 100 contexts, worst deviation " + fmt(worst));
    return out;
}

// ---- criterion 6: pure-state extension uniqueness ----

Outcome criterion6() {
    Outcome out;
    Rng rng(106);
    double worst = 0.0;
    int runs = 0;
    for (int n = 2; n <= 6; ++n) {
        for (int t = 0; t < 20; ++t) {
            const Context c = oracles::random_maximal_context(rng, n);
            const int k = static_cast<int>(rng.next_u64() % n);
            const State ext = pure_state_extension(c, k);
            const Matrix sigma = oracles::random_density(rng, n).density;
            Matrix conditioned = c.atoms[k] * sigma * c.atoms[k];
            conditioned /= conditioned.trace().real();
            worst = std::max(worst, (conditioned - ext.density).cwiseAbs().maxCoeff());
            ++runs;
        }
    }
    out.require(worst <= 1e-10, "conditioning deviation " + fmt(worst));
    out.note(std::to_string(runs) + " conditionings in M_2..M_6, worst " + fmt(worst));
    return out;
}

// ---- criterion 7: Husimi twin peaks across the classical limit ----

Outcome criterion7() {
    Outcome out;
    const SpatialGrid grid = SpatialGrid::make(-3.0, 3.0, 2001);
    const PhaseSpaceGrid window = PhaseSpaceGrid::default_window();
    DoubleWellParams params;

    const auto analyze = [&](double hbar) {
        params.hbar = hbar;
        const SymTridiag h = build_hamiltonian(grid, params);
        const WaveFunction psi = lowest_eigenpairs(h, grid, 1).front().second;
        const HusimiField field = husimi(psi, window, hbar);
        const auto maxima = local_maxima(field);
        const double conc = limit_concentration(psi, hbar, 0.3);
        return std::make_pair(maxima, conc);
    };

    const auto [sharp_maxima, sharp_conc] = analyze(0.01);
    out.require(sharp_maxima.size() == 2, "hbar=0.01 maxima count " +
                                              std::to_string(sharp_maxima.size()));
    const double cell_p = window.dp() * (1.0 + 1e-9);
    const double cell_q = window.dq() * (1.0 + 1e-9);
    bool near_plus = false, near_minus = false;
    for (const auto& m : sharp_maxima) {
        if (std::abs(m.p) <= cell_p && std::abs(m.q - 1.0) <= cell_q) near_plus = true;
        if (std::abs(m.p) <= cell_p && std::abs(m.q + 1.0) <= cell_q) near_minus = true;
    }
    out.require(near_plus && near_minus,
                "hbar=0.01 maxima are not within one cell of (0,+-1)");
    out.require(sharp_conc >= 0.95, "hbar=0.01 concentration " + fmt(sharp_conc));

    const auto [broad_maxima, broad_conc] = analyze(0.5);
    out.require(broad_maxima.size() == 2,
                "hbar=0.5 maxima count " + std::to_string(broad_maxima.size()) +
                    " (expected 2)");
    out.require(broad_conc < sharp_conc, "hbar=0.5 concentration " + fmt(broad_conc) +
                                             " not below " + fmt(sharp_conc));
    out.note("concentration " + fmt(sharp_conc) + " at hbar=0.01 vs " + fmt(broad_conc) +
             " at hbar=0.5");
    return out;
}

// ---- criterion 8: tunneling gap ladder ----

Outcome criterion8() {
    Outcome out;
    DoubleWellParams base;
    base.hbar = 0.5;
    const SpatialGrid grid = SpatialGrid::make(-3.0, 3.0, 12001);
    const GapExperiment g =
        gap_experiment(base, {0.5, 0.3, 0.2, 0.1, 0.07, 0.05}, grid);

    for (const GapRow& r : g.rows)
        out.require(r.gate_passed, "hbar=" + fmt(r.hbar) + " failed the doubling gate (" +
                                       fmt(r.gate_rel_change) + ")");
    out.require(g.fit.slope < 0.0, "slope " + fmt(g.fit.slope) + " not negative");
    out.require(g.fit.r2_defined && g.fit.r_squared >= 0.9,
                "r^2 " + fmt(g.fit.r_squared) + " below 0.9");
    out.note("slope " + fmt(g.fit.slope) + ", r^2 " + fmt(g.fit.r_squared) + ", " +
             std::to_string(g.fit.rows_used) + " rows");
    return out;
}

// ---- criterion 9: flea localization ladder ----

Outcome criterion9() {
    Outcome out;
    DoubleWellParams base;
    base.hbar = 0.5;
    base.flea = DoubleWellParams::default_flea(1.0, 1.0);
    const SpatialGrid grid = SpatialGrid::make(-3.0, 3.0, 2001);
    const std::vector<double> ladder = {0.5, 0.3, 0.2, 0.1, 0.07, 0.05, 0.02, 0.01};
    const auto rows = flea_experiment(base, ladder, grid);

    double prev_side = 0.0;
    bool monotone = true;
    for (size_t i = 0; i < rows.size(); i += 2) {
        const FleaRow& free_row = rows[i];
        const FleaRow& flea_row = rows[i + 1];
        out.require(free_row.ok && flea_row.ok, "hbar=" + fmt(free_row.hbar) + " row failed");
        if (!free_row.ok || !flea_row.ok) continue;

        out.require(free_row.left_mass >= 0.49 && free_row.left_mass <= 0.51 &&
                        free_row.right_mass >= 0.49 && free_row.right_mass <= 0.51,
                    "hbar=" + fmt(free_row.hbar) + " flea-free localization " +
                        fmt(free_row.left_mass) + "/" + fmt(free_row.right_mass));

        const double side = std::max(flea_row.left_mass, flea_row.right_mass);
        if (flea_row.hbar == 0.5)
            out.require(side >= 0.4 && side <= 0.6,
                        "hbar=0.5 localization " + fmt(side) + " outside [0.4,0.6]");
        if (flea_row.hbar == 0.02)
            out.require(side >= 0.95, "hbar=0.02 localization " + fmt(side) + " below 0.95");
        if (side + 1e-9 < prev_side) monotone = false;
        prev_side = side;
    }
    out.require(monotone, "flea localization not monotone along the ladder");
    out.note("final localization " + fmt(prev_side));
    return out;
}

// ---- criterion 10: section norm law ----

Outcome criterion10() {
    Outcome out;
    Matrix e = Matrix::Zero(2, 2);
    e(0, 0) = 1.0;
    const Matrix c = Matrix::Identity(2, 2) - e;
    const ElementaryTensorSum word = ElementaryTensorSum::single(2, 1.0, {e, c});

    const auto formula = [](long long N) {
        return static_cast<double>(N / 2) * static_cast<double>(N - N / 2) /
               (static_cast<double>(N) * static_cast<double>(N - 1));
    };

    double worst_dense = 0.0, worst_formula = 0.0;
    for (long long N = 2; N <= 6; ++N) {
        const double v = section_norm(word, N);
        worst_formula = std::max(worst_formula, std::abs(v - formula(N)));
        const double dense = oracles::operator_norm(embed_jNM_dense(word, static_cast<int>(N)));
        worst_dense = std::max(worst_dense, std::abs(v - dense));
    }
    out.require(worst_formula <= 1e-15, "formula deviation " + fmt(worst_formula));
    out.require(worst_dense <= 1e-12, "dense-oracle deviation " + fmt(worst_dense));

    bool envelope = true;
    long long first_bad = 0;
    for (long long N = 2; N <= 10000; ++N) {
        const double v = section_norm(word, N);
        // even N lands exactly on the bound, so allow one part in 1e15 of the
        // norm itself for rounding; the bound is never below 2.5e-5
        if (std::abs(v - 0.25) > 0.25 / static_cast<double>(N - 1) + 1e-15) {
            envelope = false;
            if (first_bad == 0) first_bad = N;
        }
    }
    out.require(envelope, "1/4-envelope violated first at N=" + std::to_string(first_bad));
    out.note("worst dense " + fmt(worst_dense) + ", envelope held through N=10000");
    return out;
}

// ---- criterion 11: Husimi mass and Berezin duality ----

Outcome criterion11() {
    Outcome out;
    DoubleWellParams params;

    {
        params.hbar = 0.01;
        const SpatialGrid grid = SpatialGrid::make(-3.0, 3.0, 2001);
        const WaveFunction psi =
            lowest_eigenpairs(build_hamiltonian(grid, params), grid, 1).front().second;
        const HusimiField field = husimi(psi, PhaseSpaceGrid::default_window(), 0.01);
        out.require(std::abs(field.total_mass - 1.0) <= 1e-3,
                    "hbar=0.01 mass " + fmt(field.total_mass));
        out.note("mass " + fmt(field.total_mass) + " at hbar=0.01");
    }
    {
        params.hbar = 0.5;
        const SpatialGrid grid = SpatialGrid::make(-4.0, 4.0, 2001);
        const WaveFunction psi =
            lowest_eigenpairs(build_hamiltonian(grid, params), grid, 1).front().second;
        const PhaseSpaceGrid wide = PhaseSpaceGrid::make(-4.0, 4.0, -4.0, 4.0, 161, 161);
        const HusimiField field = husimi(psi, wide, 0.5);
        out.require(std::abs(field.total_mass - 1.0) <= 1e-3,
                    "hbar=0.5 mass " + fmt(field.total_mass));
        out.note("mass " + fmt(field.total_mass) + " at hbar=0.5");
    }
    {
        params.hbar = 0.1;
        const SpatialGrid grid = SpatialGrid::make(-3.0, 3.0, 401);
        const WaveFunction psi =
            lowest_eigenpairs(build_hamiltonian(grid, params), grid, 1).front().second;
        const PhaseSpaceGrid window = PhaseSpaceGrid::make(-2.5, 2.5, -2.5, 2.5, 101, 101);
        const auto f = [](double p, double q) {
            return std::exp(-p * p - (q - 0.5) * (q - 0.5));
        };
        const HermitianOperator op = berezin_quantize(f, 0.1, grid, window);

        CVector weighted(grid.points);
        for (int i = 0; i < grid.points; ++i)
            weighted(i) = std::sqrt(grid.weight(i)) * psi.values[i];
        const double via_operator = (weighted.adjoint() * op.entries * weighted)(0, 0).real();

        const HusimiField field = husimi(psi, window, 0.1);
        double via_measure = 0.0;
        for (int ip = 0; ip < window.p_points; ++ip)
            for (int iq = 0; iq < window.q_points; ++iq)
                via_measure += field.at(ip, iq) * f(window.p_at(ip), window.q_at(iq));
        via_measure *= window.dp() * window.dq() / (2.0 * 3.14159265358979323846 * 0.1);

        const double gap = std::abs(via_operator - via_measure);
        out.require(gap <= 1e-6, "duality gap " + fmt(gap));
        out.note("duality gap " + fmt(gap));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1-11>\n");
        return 2;
    }
    const int k = std::atoi(argv[1]);
    Outcome (*const table[])() = {criterion1, criterion2, criterion3, criterion4,
                                  criterion5, criterion6, criterion7, criterion8,
                                  criterion9, criterion10, criterion11};
    if (k < 1 || k > 11) {
        std::fprintf(stderr, "criterion %d out of range\n", k);
        return 2;
    }
    const std::map<int, double> budgets = {{1, 1.0}, {2, 10.0}, {3, 60.0}, {4, 5.0},
                                           {7, 120.0}, {8, 60.0}, {9, 120.0}};

    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = table[k - 1]();
    } catch (const std::exception& e) {
        outcome.pass = false;
        outcome.note(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto budget = budgets.find(k);
    if (budget != budgets.end() && seconds > budget->second) {
        outcome.pass = false;
        outcome.note("exceeded the " + fmt(budget->second) + "s budget");
    }

    std::printf("criterion %d: %s (%.2fs)%s%s\n", k, outcome.pass ? "PASS" : "FAIL", seconds,
                outcome.detail.empty() ? "" : "; ", outcome.detail.c_str());
    return outcome.pass ? 0 : 1;
}
