#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bohr/algebra.hpp"
#include "bohr/asymptotics.hpp"
#include "bohr/contexts.hpp"
#include "bohr/io.hpp"
#include "bohr/rng.hpp"
#include "bohr/semiclassics.hpp"

namespace {

using nlohmann::json;

void emit(const std::string& content, const std::string& output) {
    if (output.empty())
        std::cout << content;
    else
        bohr::io::atomic_write(output, content);
}

struct BornOpts {
    std::string observable, state, output;
    std::string format = "json";
    long long samples = 0;
};

struct FreqOpts {
    std::string projection, state, output;
    std::string format = "json";
    long long n = 6;
    int trials = 0;
};

struct ContextsOpts {
    std::string manifest, state, output;
    std::string format = "json";
    std::uint64_t cap = bohr::kFamilyCap;
};

struct KsOpts {
    std::string rays, output;
    std::string format = "text";
};

struct GridOpts {
    double x_min = -3.0;
    double x_max = 3.0;
    int points = 2001;
};

struct WellOpts {
    double m = 1.0;
    double lambda = 1.0;
    double a = 1.0;
};

struct FleaOpts {
    GridOpts grid;
    WellOpts well;
    std::vector<double> hbars{0.5, 0.3, 0.2, 0.1, 0.07, 0.05, 0.02, 0.01};
    double flea_epsilon = -1.0;   // negative selects the default height
    double flea_center = std::numeric_limits<double>::quiet_NaN();   // NaN follows +a
    double flea_width = -1.0;     // negative selects the default width
    std::string output;
    std::string format = "csv";
};

struct HusimiOpts {
    GridOpts grid;
    WellOpts well;
    double hbar = 0.01;
    double p_min = -2.5, p_max = 2.5, q_min = -2.5, q_max = 2.5;
    int p_points = 201, q_points = 201;
    std::string output, wave_output;
    std::string format = "pgm";
};

struct GapOpts {
    GridOpts grid{-3.0, 3.0, 12001};
    WellOpts well;
    std::vector<double> hbars{0.5, 0.3, 0.2, 0.1, 0.07, 0.05};
    std::string output;
    std::string format = "csv";
};

void add_grid_options(CLI::App* cmd, GridOpts& g) {
    cmd->add_option("--grid-min", g.x_min, "left edge of the spatial grid")
        ->capture_default_str();
    cmd->add_option("--grid-max", g.x_max, "right edge of the spatial grid")
        ->capture_default_str();
    cmd->add_option("--grid-points", g.points, "grid node count (odd)")
        ->capture_default_str();
}

void add_well_options(CLI::App* cmd, WellOpts& w) {
    cmd->add_option("--mass", w.m, "particle mass")->capture_default_str();
    cmd->add_option("--lambda", w.lambda, "quartic coupling")->capture_default_str();
    cmd->add_option("--well-a", w.a, "well minimum position")->capture_default_str();
}

bohr::DoubleWellParams make_params(const WellOpts& w, double hbar) {
    bohr::DoubleWellParams p;
    p.hbar = hbar;
    p.m = w.m;
    p.lambda = w.lambda;
    p.a = w.a;
    return p;
}

int run_born(const BornOpts& o, std::uint64_t seed) {
    const bohr::HermitianOperator h = bohr::io::read_operator(o.observable);
    const bohr::State s = bohr::io::read_state(o.state);
    const bohr::DiscreteProbabilityMeasure m = bohr::born_measure(h, s);
    if (o.format == "csv") {
        if (o.samples > 0)
            throw bohr::UsageError("--samples needs --format json");
        emit(bohr::io::measure_csv(m), o.output);
        return 0;
    }
    if (o.samples == 0) {
        emit(bohr::io::measure_json(m), o.output);
        return 0;
    }
    json j = json::parse(bohr::io::measure_json(m));
    j["samples"] = bohr::sample_outcomes(
        m, o.samples, bohr::derive_seed(seed, "born samples=" + std::to_string(o.samples)));
    emit(j.dump() + "\n", o.output);
    return 0;
}

int run_freq(const FreqOpts& o, std::uint64_t seed) {
    const bohr::HermitianOperator e = bohr::io::read_operator(o.projection);
    const bohr::FrequencySpectrum spec = bohr::frequency_spectrum(e.entries, o.n);
    if (o.format == "csv") {
        std::string out = "value,multiplicity\n";
        for (std::size_t k = 0; k < spec.values.size(); ++k)
            out += bohr::io::format_real(spec.values[k]) + "," +
                   std::to_string(spec.multiplicities[k]) + "\n";
        emit(out, o.output);
        return 0;
    }
    json j;
    j["N"] = spec.N;
    j["values"] = spec.values;
    j["multiplicities"] = spec.multiplicities;
    if (!o.state.empty()) {
        const bohr::State omega = bohr::io::read_state(o.state);
        j["p"] = (omega.density * e.entries).trace().real();
        j["variance"] = bohr::frequency_variance(omega, e.entries, o.n);
        if (o.trials > 0) {
            const bohr::FrequencyTrialResult r = bohr::frequency_trial(
                omega, e.entries, o.n, o.trials,
                bohr::derive_seed(seed, "freq N=" + std::to_string(o.n) +
                                            " trials=" + std::to_string(o.trials)));
            j["frequencies"] = r.frequencies;
            j["empirical_mean"] = r.empirical_mean;
            j["max_deviation"] = r.max_deviation;
        }
    } else if (o.trials > 0) {
        throw bohr::UsageError("--trials needs --state");
    }
    emit(j.dump() + "\n", o.output);
    return 0;
}

int run_contexts(const ContextsOpts& o) {
    std::vector<bohr::Context> generators;
    for (const auto& path : bohr::io::read_manifest(o.manifest))
        generators.push_back(bohr::context_from_observable(bohr::io::read_operator(path)));
    if (generators.empty())
        throw bohr::UsageError("manifest " + o.manifest + " lists no observable files");
    const bohr::ContextPoset poset = bohr::ContextPoset::build(std::move(generators));
    const auto families = bohr::enumerate_monotone_families(poset, o.cap);

    int excluded_middle_holds = 0;
    int double_negation_holds = 0;
    json witness;
    for (const auto& e : families) {
        const bohr::ExcludedMiddleReport r = bohr::excluded_middle_report(e, o.cap);
        const bool dn = bohr::heyting_not(bohr::heyting_not(e, o.cap), o.cap) == e;
        if (r.is_top) ++excluded_middle_holds;
        if (dn) ++double_negation_holds;
        if (!r.is_top && !dn && witness.is_null()) witness = e.masks;
    }

    json j;
    j["contexts"] = poset.size();
    json sizes = json::array();
    for (const auto& c : poset.contexts) sizes.push_back(c.size());
    j["context_sizes"] = std::move(sizes);
    j["monotone_families"] = families.size();
    j["excluded_middle_holds"] = excluded_middle_holds;
    j["double_negation_holds"] = double_negation_holds;
    if (!witness.is_null()) j["intuitionistic_witness_masks"] = std::move(witness);
    if (!o.state.empty()) {
        const bohr::State s = bohr::io::read_state(o.state);
        j["gleason_max_deviation"] = bohr::gleason_additivity_check(s, poset.contexts);
    }
    emit(j.dump() + "\n", o.output);
    return 0;
}

int run_ks(const KsOpts& o) {
    const bohr::RayContextSystem sys = bohr::io::read_ray_system(o.rays);
    const bohr::KsResult r = bohr::ks_search(sys);
    if (o.format == "json") {
        json j;
        j["satisfiable"] = r.satisfiable;
        if (r.satisfiable) j["assignment"] = r.assignment;
        emit(j.dump() + "\n", o.output);
        return 0;
    }
    std::string out;
    if (!r.satisfiable) {
        out = "UNSAT\n";
    } else {
        out = "SAT\n";
        for (std::size_t i = 0; i < r.assignment.size(); ++i) {
            if (i > 0) out += ' ';
            out += std::to_string(r.assignment[i]);
        }
        out += "\n";
    }
    emit(out, o.output);
    return 0;
}

int run_flea(const FleaOpts& o) {
    const bohr::SpatialGrid grid = bohr::SpatialGrid::make(o.grid.x_min, o.grid.x_max,
                                                           o.grid.points);
    bohr::DoubleWellParams base = make_params(o.well, o.hbars.empty() ? 1.0 : o.hbars.front());
    bohr::FleaSpec flea = bohr::DoubleWellParams::default_flea(o.well.lambda, o.well.a);
    if (o.flea_epsilon >= 0.0) flea.epsilon = o.flea_epsilon;
    if (!std::isnan(o.flea_center)) flea.center = o.flea_center;
    if (o.flea_width > 0.0) flea.width = o.flea_width;
    base.flea = flea;

    const std::vector<bohr::FleaRow> rows = bohr::flea_experiment(base, o.hbars, grid);
    if (o.format == "csv") {
        emit(bohr::io::flea_csv(rows), o.output);
        return 0;
    }
    json arr = json::array();
    for (const bohr::FleaRow& r : rows) {
        json row;
        row["hbar"] = r.hbar;
        row["flea"] = r.flea;
        row["ok"] = r.ok;
        if (r.ok) {
            row["E0"] = r.E0;
            row["E1"] = r.E1;
            row["gap"] = r.gap;
            row["left_mass"] = r.left_mass;
            row["right_mass"] = r.right_mass;
        } else {
            row["error"] = r.error;
        }
        arr.push_back(std::move(row));
    }
    json j;
    j["rows"] = std::move(arr);
    emit(j.dump() + "\n", o.output);
    return 0;
}

int run_husimi(const HusimiOpts& o) {
    const bohr::SpatialGrid grid = bohr::SpatialGrid::make(o.grid.x_min, o.grid.x_max,
                                                           o.grid.points);
    const bohr::DoubleWellParams params = make_params(o.well, o.hbar);
    const bohr::SymTridiag h = bohr::build_hamiltonian(grid, params);
    const auto pairs = bohr::lowest_eigenpairs(h, grid, 1);
    const bohr::WaveFunction& psi = pairs[0].second;
    const bohr::PhaseSpaceGrid window = bohr::PhaseSpaceGrid::make(
        o.p_min, o.p_max, o.q_min, o.q_max, o.p_points, o.q_points);
    const bohr::HusimiField field = bohr::husimi(psi, window, o.hbar);

    if (!o.wave_output.empty())
        bohr::io::atomic_write(o.wave_output, bohr::io::wave_dump(psi));

    json sidecar = json::parse(bohr::io::husimi_sidecar_json(field));
    sidecar["E0"] = pairs[0].first;
    json maxima = json::array();
    for (const bohr::FieldMaximum& m : bohr::local_maxima(field)) {
        json entry;
        entry["p"] = m.p;
        entry["q"] = m.q;
        entry["value"] = m.value;
        maxima.push_back(std::move(entry));
    }
    sidecar["maxima"] = std::move(maxima);

    if (o.format == "json") {
        sidecar["density"] = field.density;
        emit(sidecar.dump() + "\n", o.output);
        return 0;
    }
    emit(bohr::io::husimi_pgm(field), o.output);
    const std::string sidecar_text = sidecar.dump() + "\n";
    if (o.output.empty())
        std::cout << sidecar_text;
    else
        bohr::io::atomic_write(o.output + ".json", sidecar_text);
    return 0;
}

int run_gap(const GapOpts& o) {
    const bohr::SpatialGrid grid = bohr::SpatialGrid::make(o.grid.x_min, o.grid.x_max,
                                                           o.grid.points);
    const bohr::DoubleWellParams base = make_params(o.well,
                                                    o.hbars.empty() ? 1.0 : o.hbars.front());
    const bohr::GapExperiment g = bohr::gap_experiment(base, o.hbars, grid);
    emit(o.format == "csv" ? bohr::io::gap_csv(g) : bohr::io::gap_json(g), o.output);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bohrlab: finite-dimensional spectral calculus, context posets, "
                 "symmetric tensor limits, and double-well semiclassics"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value file merged beneath command-line flags");
    app.allow_config_extras(false);

    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "base seed for every stochastic operation")
        ->capture_default_str();

    BornOpts born;
    CLI::App* born_cmd =
        app.add_subcommand("born", "spectral measure of an observable in a state");
    born_cmd->add_option("--observable", born.observable, "observable matrix file")
        ->required();
    born_cmd->add_option("--state", born.state, "state matrix file")->required();
    born_cmd->add_option("--format", born.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    born_cmd->add_option("--samples", born.samples, "also draw this many outcomes")
        ->capture_default_str();
    born_cmd->add_option("--output", born.output, "output file (stdout when absent)");

    FreqOpts freq;
    CLI::App* freq_cmd =
        app.add_subcommand("freq", "frequency-operator spectrum over N tensor factors");
    freq_cmd->add_option("--projection", freq.projection, "projection matrix file")
        ->required();
    freq_cmd->add_option("--n", freq.n, "tensor factor count N")->capture_default_str();
    freq_cmd->add_option("--state", freq.state, "state file for variance and trials");
    freq_cmd->add_option("--trials", freq.trials, "empirical frequency trials")
        ->capture_default_str();
    freq_cmd->add_option("--format", freq.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    freq_cmd->add_option("--output", freq.output, "output file (stdout when absent)");

    ContextsOpts contexts;
    CLI::App* contexts_cmd = app.add_subcommand(
        "contexts", "context poset, monotone families, and intuitionistic structure");
    contexts_cmd
        ->add_option("--manifest", contexts.manifest,
                     "file listing observable matrix files, one per line")
        ->required();
    contexts_cmd->add_option("--state", contexts.state,
                             "state file for the additivity check");
    contexts_cmd->add_option("--cap", contexts.cap, "family enumeration cap")
        ->capture_default_str();
    contexts_cmd->add_option("--format", contexts.format, "output format")
        ->check(CLI::IsMember({"json"}))
        ->capture_default_str();
    contexts_cmd->add_option("--output", contexts.output, "output file (stdout when absent)");

    KsOpts ks;
    CLI::App* ks_cmd =
        app.add_subcommand("ks", "search for a one-true-ray-per-context valuation");
    ks_cmd->add_option("--rays", ks.rays, "ray system file")->required();
    ks_cmd->add_option("--format", ks.format, "output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    ks_cmd->add_option("--output", ks.output, "output file (stdout when absent)");

    FleaOpts flea;
    CLI::App* flea_cmd = app.add_subcommand(
        "semiclassics-flea", "paired flea-free and flea-on double-well rows per hbar");
    flea_cmd->add_option("--hbar", flea.hbars, "hbar ladder")
        ->delimiter(',')
        ->capture_default_str();
    add_grid_options(flea_cmd, flea.grid);
    add_well_options(flea_cmd, flea.well);
    flea_cmd->add_option("--flea-epsilon", flea.flea_epsilon,
                         "flea height (default 2% of the barrier)");
    flea_cmd->add_option("--flea-center", flea.flea_center, "flea center (default +a)");
    flea_cmd->add_option("--flea-width", flea.flea_width, "flea width (default a/10)");
    flea_cmd->add_option("--format", flea.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    flea_cmd->add_option("--output", flea.output, "output file (stdout when absent)");

    HusimiOpts husimi;
    CLI::App* husimi_cmd = app.add_subcommand(
        "semiclassics-husimi", "Husimi field of the flea-free ground state");
    husimi_cmd->add_option("--hbar", husimi.hbar, "hbar")->capture_default_str();
    add_grid_options(husimi_cmd, husimi.grid);
    add_well_options(husimi_cmd, husimi.well);
    husimi_cmd->add_option("--p-min", husimi.p_min, "momentum window minimum")
        ->capture_default_str();
    husimi_cmd->add_option("--p-max", husimi.p_max, "momentum window maximum")
        ->capture_default_str();
    husimi_cmd->add_option("--q-min", husimi.q_min, "position window minimum")
        ->capture_default_str();
    husimi_cmd->add_option("--q-max", husimi.q_max, "position window maximum")
        ->capture_default_str();
    husimi_cmd->add_option("--p-points", husimi.p_points, "momentum samples")
        ->capture_default_str();
    husimi_cmd->add_option("--q-points", husimi.q_points, "position samples")
        ->capture_default_str();
    husimi_cmd->add_option("--wave", husimi.wave_output,
                           "also dump the ground state to this file");
    husimi_cmd->add_option("--format", husimi.format, "output format")
        ->check(CLI::IsMember({"pgm", "json"}))
        ->capture_default_str();
    husimi_cmd->add_option("--output", husimi.output,
                           "output file; pgm adds a .json sidecar (stdout when absent)");

    GapOpts gap;
    CLI::App* gap_cmd = app.add_subcommand(
        "semiclassics-gap", "tunneling gap ladder with grid-doubling gate and log fit");
    gap_cmd->add_option("--hbar", gap.hbars, "hbar ladder")
        ->delimiter(',')
        ->capture_default_str();
    add_grid_options(gap_cmd, gap.grid);
    add_well_options(gap_cmd, gap.well);
    gap_cmd->add_option("--format", gap.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    gap_cmd->add_option("--output", gap.output, "output file (stdout when absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (born_cmd->parsed()) return run_born(born, seed);
        if (freq_cmd->parsed()) return run_freq(freq, seed);
        if (contexts_cmd->parsed()) return run_contexts(contexts);
        if (ks_cmd->parsed()) return run_ks(ks);
        if (flea_cmd->parsed()) return run_flea(flea);
        if (husimi_cmd->parsed()) return run_husimi(husimi);
        if (gap_cmd->parsed()) return run_gap(gap);
    } catch (const bohr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
