#pragma once
// Double-well semiclassics: finite-difference Hamiltonians, ground states,
// coherent-state overlaps, Husimi phase-space fields, Berezin quantization,
// flea localization runs, and tunneling-gap fits.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bohr/algebra.hpp"
#include "bohr/tridiag.hpp"

namespace bohr {

inline constexpr double kWaveNormTol = 1e-10;
inline constexpr double kHusimiMassTol = 1e-3;
inline constexpr double kMaximaFloorRel = 1e-9;   // noise floor for counting field maxima

struct SpatialGrid {
    double x_min = 0.0, x_max = 0.0;
    int points = 0;

    // points odd and >= 3; symmetric grids get bit-exact mirrored nodes
    static SpatialGrid make(double x_min, double x_max, int points);

    double spacing() const { return (x_max - x_min) / (points - 1); }
    bool symmetric() const { return x_min == -x_max; }
    double node(int i) const;
    double weight(int i) const;   // trapezoid quadrature weight
};

struct FleaSpec {
    double epsilon = 0.0;   // height
    double center = 0.0;
    double width = 0.0;

    double value(double x) const;
};

struct DoubleWellParams {
    double hbar = 0.0;
    double m = 1.0;
    double lambda = 1.0;
    double a = 1.0;
    std::optional<FleaSpec> flea;

    double barrier_height() const { return lambda * a * a * a * a / 4.0; }
    double well_potential(double x) const;
    double potential(double x) const;   // well plus flea

    // bump on the +a well: height 2% of the barrier, width a/10
    static FleaSpec default_flea(double lambda, double a);
};

struct WaveFunction {
    SpatialGrid grid;
    std::vector<Complex> values;

    // validates trapezoid normalization within 1e-10
    static WaveFunction make(SpatialGrid grid, std::vector<Complex> values);
    double norm2() const;
    bool is_real() const;
};

// second-order central differences, Dirichlet boundaries
SymTridiag build_hamiltonian(const SpatialGrid& grid, const DoubleWellParams& params,
                             std::vector<std::string>* warnings = nullptr);

// eigenpairs in increasing energy; ground state phase-fixed real nonnegative;
// palindromic matrices are solved per parity sector
std::vector<std::pair<double, WaveFunction>> lowest_eigenpairs(const SymTridiag& h,
                                                               const SpatialGrid& grid,
                                                               int count);

Complex coherent_overlap(const WaveFunction& psi, double p, double q, double hbar,
                         std::vector<std::string>* warnings = nullptr);

struct PhaseSpaceGrid {
    double p_min = 0.0, p_max = 0.0, q_min = 0.0, q_max = 0.0;
    int p_points = 0, q_points = 0;

    static PhaseSpaceGrid make(double p_min, double p_max, double q_min, double q_max,
                               int p_points, int q_points);
    static PhaseSpaceGrid default_window();   // [-2.5, 2.5]^2 at 201 x 201

    double dp() const { return (p_max - p_min) / (p_points - 1); }
    double dq() const { return (q_max - q_min) / (q_points - 1); }
    double p_at(int ip) const { return p_min + ip * dp(); }
    double q_at(int iq) const { return q_min + iq * dq(); }
};

struct HusimiField {
    PhaseSpaceGrid window;
    double hbar = 0.0;
    std::vector<double> density;   // row-major, q varying along rows: [ip * q_points + iq]
    double total_mass = 0.0;       // sum density * dp dq / (2 pi hbar)
    double kappa = 1.0;            // window coverage factor: 1 covered, 10 truncating
    std::vector<std::string> warnings;

    double at(int ip, int iq) const { return density[static_cast<size_t>(ip) * window.q_points + iq]; }
};

HusimiField husimi(const WaveFunction& psi, const PhaseSpaceGrid& window, double hbar);

struct FieldMaximum {
    double p = 0.0, q = 0.0, value = 0.0;
    int ip = 0, iq = 0;
};
// strict 8-neighbor maxima above floor_rel * max density
std::vector<FieldMaximum> local_maxima(const HusimiField& field,
                                       double floor_rel = kMaximaFloorRel);

// p-window spanning the grid Nyquist momentum pi*hbar/spacing, on which the
// coherent-state resolution of identity is quadrature-exact
PhaseSpaceGrid nyquist_window(const SpatialGrid& grid, double hbar,
                              int p_points, int q_points);

// dense operator in the orthonormalized grid basis: quadratic forms against a
// grid function psi use coefficients sqrt(weight_i) * psi_i
HermitianOperator berezin_quantize(const std::function<double(double, double)>& f,
                                   double hbar, const SpatialGrid& grid,
                                   const PhaseSpaceGrid& window,
                                   std::vector<std::string>* warnings = nullptr);
HermitianOperator berezin_quantize(const std::vector<double>& f_values,
                                   double hbar, const SpatialGrid& grid,
                                   const PhaseSpaceGrid& window,
                                   std::vector<std::string>* warnings = nullptr);

struct Localization {
    double left_mass = 0.0;
    double right_mass = 0.0;
};
Localization localization(const WaveFunction& psi);

struct FleaRow {
    double hbar = 0.0, E0 = 0.0, E1 = 0.0, gap = 0.0;
    double left_mass = 0.0, right_mass = 0.0;
    int flea = 0;
    bool ok = true;
    std::string error;
};

// paired flea-free / flea-on rows per hbar; base.flea (or the default flea)
// defines the perturbed run
std::vector<FleaRow> flea_experiment(const DoubleWellParams& base,
                                     const std::vector<double>& hbars,
                                     const SpatialGrid& grid);

struct GapFit {
    double slope = 0.0, intercept = 0.0, r_squared = 0.0;
    bool r2_defined = false;
    int rows_used = 0;
    std::vector<std::string> warnings;
};
// least squares of log(gap) against 1/hbar over flea-free rows with positive gap
GapFit tunneling_fit(const std::vector<FleaRow>& rows);

struct GapRow {
    double hbar = 0.0, E0 = 0.0, E1 = 0.0, gap = 0.0;
    double gate_rel_change = 0.0;   // worst relative E change under grid doubling
    bool gate_passed = false;
};
struct GapExperiment {
    std::vector<GapRow> rows;
    GapFit fit;
};
// flea-free ladder with the 1e-6 grid-doubling stability gate per row
GapExperiment gap_experiment(const DoubleWellParams& base,
                             const std::vector<double>& hbars,
                             const SpatialGrid& grid);

// fraction of Husimi mass within `radius` of the classical points (0, +-a)
double limit_concentration(const WaveFunction& psi, double hbar, double radius,
                           double a = 1.0,
                           const PhaseSpaceGrid& window = PhaseSpaceGrid::default_window());

} // namespace bohr
