#include "bohr/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bohr {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sq(double x) { return x * x; }

void push_warning(std::vector<std::string>* warnings, std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
}

} // namespace

SpatialGrid SpatialGrid::make(double x_min, double x_max, int points) {
    if (!(x_min < x_max)) throw InvariantError("grid needs x_min < x_max");
    if (points < 3) throw InvariantError("grid needs at least 3 points");
    if (points % 2 == 0) throw InvariantError("grid needs an odd point count");
    SpatialGrid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.points = points;
    return g;
}

double SpatialGrid::node(int i) const {
    if (symmetric()) return (i - (points - 1) / 2) * spacing();
    return x_min + i * spacing();
}

double SpatialGrid::weight(int i) const {
    return (i == 0 || i == points - 1) ? spacing() / 2.0 : spacing();
}

double FleaSpec::value(double x) const {
    return epsilon * std::exp(-sq(x - center) / (2.0 * width * width));
}

double DoubleWellParams::well_potential(double x) const {
    return 0.25 * lambda * sq(x * x - a * a);
}

double DoubleWellParams::potential(double x) const {
    return well_potential(x) + (flea ? flea->value(x) : 0.0);
}

FleaSpec DoubleWellParams::default_flea(double lambda, double a) {
    FleaSpec f;
    f.epsilon = 0.02 * lambda * a * a * a * a / 4.0;
    f.center = a;
    f.width = a / 10.0;
    return f;
}

WaveFunction WaveFunction::make(SpatialGrid grid, std::vector<Complex> values) {
    if (values.size() != static_cast<std::size_t>(grid.points))
        throw InvariantError("wave function length does not match the grid");
    WaveFunction psi;
    psi.grid = grid;
    psi.values = std::move(values);
    const double n2 = psi.norm2();
    if (std::abs(n2 - 1.0) > kWaveNormTol)
        throw InvariantError("wave function norm^2 " + std::to_string(n2) +
                             " deviates from 1 beyond 1e-10");
    return psi;
}

double WaveFunction::norm2() const {
    double s = 0.0;
    for (int i = 0; i < grid.points; ++i) s += grid.weight(i) * std::norm(values[i]);
    return s;
}

bool WaveFunction::is_real() const {
    for (const Complex& v : values)
        if (v.imag() != 0.0) return false;
    return true;
}

SymTridiag build_hamiltonian(const SpatialGrid& grid, const DoubleWellParams& params,
                             std::vector<std::string>* warnings) {
    if (!(params.hbar > 0.0) || !(params.m > 0.0) || !(params.lambda > 0.0) ||
        !(params.a > 0.0))
        throw InvariantError("double well parameters must be positive");
    if (params.flea && !(params.flea->width > 0.0))
        throw InvariantError("flea width must be positive");

    const double barrier = params.barrier_height();
    if (params.flea && std::abs(params.flea->epsilon) > 0.25 * barrier)
        push_warning(warnings, "flea height exceeds 25% of the barrier height");
    if (params.well_potential(grid.x_min) < 10.0 * barrier ||
        params.well_potential(grid.x_max) < 10.0 * barrier)
        push_warning(warnings, "grid edges reach less than 10x the barrier height");

    const double h = grid.spacing();
    const double well_width = std::sqrt(params.hbar /
                                        std::sqrt(2.0 * params.lambda * sq(params.a) * params.m));
    if (well_width / h < 8.0)
        push_warning(warnings, "resolution: fewer than 8 grid points per well width");

    const double kinetic = params.hbar * params.hbar / (params.m * h * h);
    SymTridiag t;
    t.diag.resize(grid.points);
    t.off.assign(grid.points - 1, -kinetic / 2.0);
    for (int i = 0; i < grid.points; ++i)
        t.diag[i] = kinetic + params.potential(grid.node(i));
    return t;
}

std::vector<std::pair<double, WaveFunction>> lowest_eigenpairs(const SymTridiag& h,
                                                               const SpatialGrid& grid,
                                                               int count) {
    if (h.size() != grid.points)
        throw DimensionError("matrix size does not match the grid");
    const std::vector<EigenPair> pairs =
        (is_palindromic(h) && h.size() % 2 == 1) ? lowest_eigenpairs_folded(h, count)
                                                 : lowest_eigenpairs_tridiag(h, count);
    std::vector<std::pair<double, WaveFunction>> out;
    for (const EigenPair& p : pairs) {
        std::vector<Complex> values(grid.points);
        for (int i = 0; i < grid.points; ++i)
            values[i] = p.vector[i] / std::sqrt(grid.weight(i));
        out.emplace_back(p.value, WaveFunction::make(grid, std::move(values)));
    }
    return out;
}

Complex coherent_overlap(const WaveFunction& psi, double p, double q, double hbar,
                         std::vector<std::string>* warnings) {
    if (!(hbar > 0.0)) throw InvariantError("hbar must be positive");
    const SpatialGrid& g = psi.grid;
    const double sigma = std::sqrt(hbar);
    if (q - 6.0 * sigma < g.x_min || q + 6.0 * sigma > g.x_max)
        push_warning(warnings, "coherent state mass extends beyond the grid");
    if (std::abs(p) > kPi * hbar / g.spacing())
        push_warning(warnings, "momentum exceeds the grid Nyquist momentum");

    const double amp = std::pow(kPi * hbar, -0.25);
    const Complex i_unit(0.0, 1.0);
    Complex s = 0.0;
    for (int i = 0; i < g.points; ++i) {
        const double x = g.node(i);
        const Complex phi_conj =
            amp * std::exp(i_unit * (p * q / (2.0 * hbar)) - i_unit * (p * x / hbar) -
                           sq(x - q) / (2.0 * hbar));
        s += g.weight(i) * phi_conj * psi.values[i];
    }
    return s;
}

PhaseSpaceGrid PhaseSpaceGrid::make(double p_min, double p_max, double q_min, double q_max,
                                    int p_points, int q_points) {
    if (!(p_min < p_max) || !(q_min < q_max))
        throw InvariantError("phase-space window needs positive extents");
    if (p_points < 2 || q_points < 2)
        throw InvariantError("phase-space window needs at least 2 points per axis");
    PhaseSpaceGrid w;
    w.p_min = p_min;
    w.p_max = p_max;
    w.q_min = q_min;
    w.q_max = q_max;
    w.p_points = p_points;
    w.q_points = q_points;
    return w;
}

PhaseSpaceGrid PhaseSpaceGrid::default_window() {
    return make(-2.5, 2.5, -2.5, 2.5, 201, 201);
}

HusimiField husimi(const WaveFunction& psi, const PhaseSpaceGrid& window, double hbar) {
    if (!(hbar > 0.0)) throw InvariantError("hbar must be positive");
    const SpatialGrid& g = psi.grid;
    const double amp = std::pow(kPi * hbar, -0.25);
    const double support = 9.0 * std::sqrt(hbar);

    HusimiField field;
    field.window = window;
    field.hbar = hbar;
    field.density.assign(static_cast<std::size_t>(window.p_points) * window.q_points, 0.0);

    // per-q Gaussian envelopes on their node support, with psi folded in
    std::vector<int> first(window.q_points);
    std::vector<std::vector<Complex>> enveloped(window.q_points);
    for (int iq = 0; iq < window.q_points; ++iq) {
        const double q = window.q_at(iq);
        int i0 = static_cast<int>(std::ceil((q - support - g.x_min) / g.spacing()));
        int i1 = static_cast<int>(std::floor((q + support - g.x_min) / g.spacing()));
        i0 = std::max(i0, 0);
        i1 = std::min(i1, g.points - 1);
        first[iq] = i0;
        if (i1 < i0) continue;
        enveloped[iq].resize(i1 - i0 + 1);
        for (int i = i0; i <= i1; ++i) {
            const double x = g.node(i);
            enveloped[iq][i - i0] =
                g.weight(i) * amp * std::exp(-sq(x - q) / (2.0 * hbar)) * psi.values[i];
        }
    }

    std::vector<Complex> phase(g.points);
    const Complex i_unit(0.0, 1.0);
    for (int ip = 0; ip < window.p_points; ++ip) {
        const double p = window.p_at(ip);
        for (int i = 0; i < g.points; ++i)
            phase[i] = std::exp(-i_unit * (p * g.node(i) / hbar));
        for (int iq = 0; iq < window.q_points; ++iq) {
            Complex s = 0.0;
            const std::vector<Complex>& env = enveloped[iq];
            const int i0 = first[iq];
            for (std::size_t k = 0; k < env.size(); ++k) s += phase[i0 + k] * env[k];
            field.density[static_cast<std::size_t>(ip) * window.q_points + iq] = std::norm(s);
        }
    }

    const double cell = window.dp() * window.dq() / (2.0 * kPi * hbar);
    double mass = 0.0;
    double max_all = 0.0;
    double max_boundary = 0.0;
    for (int ip = 0; ip < window.p_points; ++ip)
        for (int iq = 0; iq < window.q_points; ++iq) {
            const double d = field.at(ip, iq);
            mass += d * cell;
            max_all = std::max(max_all, d);
            if (ip == 0 || iq == 0 || ip == window.p_points - 1 || iq == window.q_points - 1)
                max_boundary = std::max(max_boundary, d);
        }
    field.total_mass = mass;
    field.kappa = 1.0;
    if (max_boundary > 1e-6 * max_all) {
        field.kappa = 10.0;
        field.warnings.push_back("window truncates the state; boundary density is "
                                 "above 1e-6 of the peak");
    }
    if (std::abs(mass - 1.0) > kHusimiMassTol * field.kappa)
        throw InvariantError("Husimi mass " + std::to_string(mass) +
                             " deviates from 1 beyond the window tolerance");
    return field;
}

std::vector<FieldMaximum> local_maxima(const HusimiField& field, double floor_rel) {
    const PhaseSpaceGrid& w = field.window;
    double max_all = 0.0;
    for (double d : field.density) max_all = std::max(max_all, d);
    const double floor = floor_rel * max_all;

    std::vector<FieldMaximum> out;
    for (int ip = 1; ip + 1 < w.p_points; ++ip)
        for (int iq = 1; iq + 1 < w.q_points; ++iq) {
            const double c = field.at(ip, iq);
            if (c <= floor) continue;
            bool peak = true;
            for (int dp = -1; dp <= 1 && peak; ++dp)
                for (int dq = -1; dq <= 1 && peak; ++dq) {
                    if (dp == 0 && dq == 0) continue;
                    if (field.at(ip + dp, iq + dq) >= c) peak = false;
                }
            if (!peak) continue;
            FieldMaximum m;
            m.ip = ip;
            m.iq = iq;
            m.p = w.p_at(ip);
            m.q = w.q_at(iq);
            m.value = c;
            out.push_back(m);
        }
    std::sort(out.begin(), out.end(),
              [](const FieldMaximum& a, const FieldMaximum& b) { return a.value > b.value; });
    return out;
}

PhaseSpaceGrid nyquist_window(const SpatialGrid& grid, double hbar,
                              int p_points, int q_points) {
    const double p_nyq = kPi * hbar / grid.spacing();
    return PhaseSpaceGrid::make(-p_nyq, p_nyq, grid.x_min, grid.x_max, p_points, q_points);
}

HermitianOperator berezin_quantize(const std::function<double(double, double)>& f,
                                   double hbar, const SpatialGrid& grid,
                                   const PhaseSpaceGrid& window,
                                   std::vector<std::string>* warnings) {
    std::vector<double> values(static_cast<std::size_t>(window.p_points) * window.q_points);
    for (int ip = 0; ip < window.p_points; ++ip)
        for (int iq = 0; iq < window.q_points; ++iq)
            values[static_cast<std::size_t>(ip) * window.q_points + iq] =
                f(window.p_at(ip), window.q_at(iq));
    return berezin_quantize(values, hbar, grid, window, warnings);
}

HermitianOperator berezin_quantize(const std::vector<double>& f_values,
                                   double hbar, const SpatialGrid& grid,
                                   const PhaseSpaceGrid& window,
                                   std::vector<std::string>* warnings) {
    if (!(hbar > 0.0)) throw InvariantError("hbar must be positive");
    if (f_values.size() != static_cast<std::size_t>(window.p_points) * window.q_points)
        throw DimensionError("phase-space samples do not match the window");
    const double p_nyq = kPi * hbar / grid.spacing();
    if (window.p_max < 0.999 * p_nyq || window.p_min > -0.999 * p_nyq)
        push_warning(warnings, "momentum window is below the grid Nyquist momentum; "
                               "the resolution of identity is truncated");

    const int n = grid.points;
    const double amp2 = 1.0 / std::sqrt(kPi * hbar);   // |phi|^2 prefactor
    const double support = 9.0 * std::sqrt(hbar);
    const Complex i_unit(0.0, 1.0);

    auto p_weight = [&window](int ip) {
        return (ip == 0 || ip == window.p_points - 1) ? window.dp() / 2.0 : window.dp();
    };
    auto q_weight = [&window](int iq) {
        return (iq == 0 || iq == window.q_points - 1) ? window.dq() / 2.0 : window.dq();
    };

    Matrix kernel = Matrix::Zero(n, n);
    std::vector<double> envelope;
    std::vector<Complex> transform;
    for (int iq = 0; iq < window.q_points; ++iq) {
        const double q = window.q_at(iq);
        int i0 = static_cast<int>(std::ceil((q - support - grid.x_min) / grid.spacing()));
        int i1 = static_cast<int>(std::floor((q + support - grid.x_min) / grid.spacing()));
        i0 = std::max(i0, 0);
        i1 = std::min(i1, n - 1);
        if (i1 < i0) continue;
        const int span = i1 - i0 + 1;

        envelope.assign(span, 0.0);
        for (int i = i0; i <= i1; ++i)
            envelope[i - i0] = std::exp(-sq(grid.node(i) - q) / (2.0 * hbar));

        // p-sum depends only on the node separation d = i - j
        transform.assign(span, 0.0);
        for (int ip = 0; ip < window.p_points; ++ip) {
            const double p = window.p_at(ip);
            const double wf = p_weight(ip) *
                              f_values[static_cast<std::size_t>(ip) * window.q_points + iq];
            if (wf == 0.0) continue;
            const Complex step = std::exp(i_unit * (p * grid.spacing() / hbar));
            Complex rot = 1.0;
            for (int d = 0; d < span; ++d) {
                transform[d] += wf * rot;
                rot *= step;
            }
        }

        const double qfac = q_weight(iq) * amp2 / (2.0 * kPi * hbar);
        for (int i = i0; i <= i1; ++i)
            for (int j = i0; j <= i1; ++j) {
                const int d = i - j;
                const Complex t = d >= 0 ? transform[d] : std::conj(transform[-d]);
                kernel(i, j) += qfac * envelope[i - i0] * envelope[j - i0] * t;
            }
    }

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            kernel(i, j) *= std::sqrt(grid.weight(i)) * std::sqrt(grid.weight(j));
    return HermitianOperator::from(std::move(kernel));
}

Localization localization(const WaveFunction& psi) {
    const SpatialGrid& g = psi.grid;
    bool has_zero = false;
    for (int i = 0; i < g.points && !has_zero; ++i)
        if (g.node(i) == 0.0) has_zero = true;
    if (!has_zero) throw InvariantError("localization needs a grid node at 0");

    Localization loc;
    for (int i = 0; i < g.points; ++i) {
        const double x = g.node(i);
        const double mass = g.weight(i) * std::norm(psi.values[i]);
        if (x < 0.0) loc.left_mass += mass;
        else if (x > 0.0) loc.right_mass += mass;
    }
    return loc;
}

namespace {

FleaRow solve_row(DoubleWellParams params, double hbar, bool with_flea,
                  const FleaSpec& flea, const SpatialGrid& grid) {
    FleaRow row;
    row.hbar = hbar;
    row.flea = with_flea ? 1 : 0;
    params.hbar = hbar;
    params.flea.reset();
    if (with_flea) params.flea = flea;
    try {
        const SymTridiag h = build_hamiltonian(grid, params);
        const auto pairs = lowest_eigenpairs(h, grid, 2);
        row.E0 = pairs[0].first;
        row.E1 = pairs[1].first;
        row.gap = row.E1 - row.E0;
        const Localization loc = localization(pairs[0].second);
        row.left_mass = loc.left_mass;
        row.right_mass = loc.right_mass;
    } catch (const NumericFailure& e) {
        row.ok = false;
        row.error = e.what();
    }
    return row;
}

} // namespace

std::vector<FleaRow> flea_experiment(const DoubleWellParams& base,
                                     const std::vector<double>& hbars,
                                     const SpatialGrid& grid) {
    if (hbars.empty()) throw InvariantError("flea experiment needs at least one hbar");
    const FleaSpec flea =
        base.flea ? *base.flea : DoubleWellParams::default_flea(base.lambda, base.a);
    std::vector<FleaRow> rows;
    for (double hbar : hbars) {
        rows.push_back(solve_row(base, hbar, false, flea, grid));
        rows.push_back(solve_row(base, hbar, true, flea, grid));
    }
    return rows;
}

GapFit tunneling_fit(const std::vector<FleaRow>& rows) {
    GapFit fit;
    std::vector<double> xs, ys;
    for (const FleaRow& r : rows) {
        if (r.flea != 0) continue;
        if (!r.ok) {
            fit.warnings.push_back("row hbar=" + std::to_string(r.hbar) +
                                   " excluded: " + r.error);
            continue;
        }
        if (!(r.gap > 0.0)) {
            fit.warnings.push_back("row hbar=" + std::to_string(r.hbar) +
                                   " excluded: non-positive gap");
            continue;
        }
        xs.push_back(1.0 / r.hbar);
        ys.push_back(std::log(r.gap));
    }
    fit.rows_used = static_cast<int>(xs.size());
    if (fit.rows_used < 2) {
        fit.warnings.push_back("fewer than 2 usable rows; no fit");
        return fit;
    }

    const int n = fit.rows_used;
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) { mx += xs[i]; my += ys[i]; }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += sq(xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += sq(ys[i] - my);
    }
    if (sxx == 0.0) {
        fit.warnings.push_back("all rows share one hbar; no fit");
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (int i = 0; i < n; ++i)
            ss_res += sq(ys[i] - (fit.intercept + fit.slope * xs[i]));
        fit.r_squared = 1.0 - ss_res / syy;
        fit.r2_defined = true;
    }
    return fit;
}

GapExperiment gap_experiment(const DoubleWellParams& base,
                             const std::vector<double>& hbars,
                             const SpatialGrid& grid) {
    if (hbars.empty()) throw InvariantError("gap experiment needs at least one hbar");
    const SpatialGrid doubled = SpatialGrid::make(grid.x_min, grid.x_max, 2 * grid.points - 1);

    GapExperiment out;
    std::vector<FleaRow> for_fit;
    for (double hbar : hbars) {
        DoubleWellParams params = base;
        params.hbar = hbar;
        params.flea.reset();

        GapRow row;
        row.hbar = hbar;
        const auto coarse = lowest_eigenpairs(build_hamiltonian(grid, params), grid, 2);
        const auto fine = lowest_eigenpairs(build_hamiltonian(doubled, params), doubled, 2);
        row.E0 = coarse[0].first;
        row.E1 = coarse[1].first;
        row.gap = row.E1 - row.E0;
        const double change0 =
            std::abs(row.E0 - fine[0].first) / std::max(std::abs(fine[0].first), 1e-300);
        const double change1 =
            std::abs(row.E1 - fine[1].first) / std::max(std::abs(fine[1].first), 1e-300);
        row.gate_rel_change = std::max(change0, change1);
        row.gate_passed = row.gate_rel_change <= 1e-6;
        out.rows.push_back(row);

        if (row.gate_passed) {
            FleaRow fr;
            fr.hbar = hbar;
            fr.E0 = row.E0;
            fr.E1 = row.E1;
            fr.gap = row.gap;
            fr.flea = 0;
            for_fit.push_back(fr);
        }
    }
    out.fit = tunneling_fit(for_fit);
    for (const GapRow& row : out.rows)
        if (!row.gate_passed)
            out.fit.warnings.push_back("row hbar=" + std::to_string(row.hbar) +
                                       " failed the grid-doubling gate");
    return out;
}

double limit_concentration(const WaveFunction& psi, double hbar, double radius,
                           double a, const PhaseSpaceGrid& window) {
    if (!(radius > 0.0)) throw InvariantError("concentration radius must be positive");
    const HusimiField field = husimi(psi, window, hbar);
    const double cell = window.dp() * window.dq() / (2.0 * kPi * hbar);
    double near = 0.0;
    for (int ip = 0; ip < window.p_points; ++ip)
        for (int iq = 0; iq < window.q_points; ++iq) {
            const double p = window.p_at(ip);
            const double q = window.q_at(iq);
            const double dist = std::min(std::sqrt(sq(p) + sq(q - a)),
                                         std::sqrt(sq(p) + sq(q + a)));
            if (dist <= radius) near += field.at(ip, iq) * cell;
        }
    return near / field.total_mass;
}

} // namespace bohr
