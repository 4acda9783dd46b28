#include "bohr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

namespace bohr::io {

namespace {

using nlohmann::json;

json parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError(path.string() + " is not valid structured text: " + e.what());
    }
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::filesystem::path& path) {
    if (!j.is_object()) throw UsageError(path.string() + " must hold a single object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw UsageError(path.string() + " has unknown key \"" + item.key() + "\"");
}

Matrix read_complex_matrix(const json& j, int n, const std::filesystem::path& path) {
    const json& re = j.at("re");
    const json& im = j.at("im");
    if (!re.is_array() || !im.is_array() || static_cast<int>(re.size()) != n ||
        static_cast<int>(im.size()) != n)
        throw UsageError(path.string() + ": re and im must be n x n arrays");
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        const json& rrow = re.at(i);
        const json& irow = im.at(i);
        if (!rrow.is_array() || !irow.is_array() || static_cast<int>(rrow.size()) != n ||
            static_cast<int>(irow.size()) != n)
            throw UsageError(path.string() + ": re and im must be n x n arrays");
        for (int k = 0; k < n; ++k) {
            if (!rrow.at(k).is_number() || !irow.at(k).is_number())
                throw UsageError(path.string() + ": matrix entries must be numbers");
            m(i, k) = Complex(rrow.at(k).get<double>(), irow.at(k).get<double>());
        }
    }
    return m;
}

int read_dim(const json& j, const std::filesystem::path& path) {
    if (!j.contains("n") || !j.at("n").is_number_integer())
        throw UsageError(path.string() + ": field n must be an integer");
    const int n = j.at("n").get<int>();
    if (n < 1) throw UsageError(path.string() + ": field n must be positive");
    return n;
}

void matrix_to_json_parts(const Matrix& m, json& re, json& im) {
    const int n = static_cast<int>(m.rows());
    re = json::array();
    im = json::array();
    for (int i = 0; i < n; ++i) {
        json rrow = json::array();
        json irow = json::array();
        for (int k = 0; k < n; ++k) {
            rrow.push_back(m(i, k).real());
            irow.push_back(m(i, k).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
}

std::string format_shortest(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw UsageError("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw UsageError("cannot move output into place at " + path.string());
    }
}

HermitianOperator read_operator(const std::filesystem::path& path) {
    const json j = parse_file(path);
    reject_unknown_keys(j, {"n", "re", "im"}, path);
    const int n = read_dim(j, path);
    return HermitianOperator::from(read_complex_matrix(j, n, path));
}

std::string operator_json(const HermitianOperator& h) {
    json j;
    j["n"] = h.dim;
    matrix_to_json_parts(h.entries, j["re"], j["im"]);
    return j.dump() + "\n";
}

State read_state(const std::filesystem::path& path) {
    const json j = parse_file(path);
    reject_unknown_keys(j, {"n", "re", "im", "vector_re", "vector_im"}, path);
    const int n = read_dim(j, path);
    State s = State::from_density(read_complex_matrix(j, n, path));
    const bool have_re = j.contains("vector_re");
    const bool have_im = j.contains("vector_im");
    if (have_re != have_im)
        throw UsageError(path.string() + ": vector_re and vector_im must appear together");
    if (have_re) {
        const json& vre = j.at("vector_re");
        const json& vim = j.at("vector_im");
        if (!vre.is_array() || !vim.is_array() || static_cast<int>(vre.size()) != n ||
            static_cast<int>(vim.size()) != n)
            throw UsageError(path.string() + ": vector arrays must have length n");
        CVector v(n);
        for (int i = 0; i < n; ++i)
            v(i) = Complex(vre.at(i).get<double>(), vim.at(i).get<double>());
        if (std::abs(v.norm() - 1.0) > kVectorStateTol)
            throw InvariantError(path.string() + ": state vector is not a unit vector");
        const Matrix outer = v * v.adjoint();
        if ((s.density - outer).cwiseAbs().maxCoeff() > kVectorStateTol)
            throw InvariantError(path.string() +
                                 ": vector does not reproduce the density matrix");
        s.vector = std::move(v);
    }
    return s;
}

std::string state_json(const State& s) {
    json j;
    j["n"] = s.dim;
    matrix_to_json_parts(s.density, j["re"], j["im"]);
    if (s.vector) {
        json vre = json::array();
        json vim = json::array();
        for (int i = 0; i < s.dim; ++i) {
            vre.push_back((*s.vector)(i).real());
            vim.push_back((*s.vector)(i).imag());
        }
        j["vector_re"] = std::move(vre);
        j["vector_im"] = std::move(vim);
    }
    return j.dump() + "\n";
}

RayContextSystem read_ray_system(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path.string());

    std::string keyword;
    int dim = 0;
    if (!(in >> keyword) || keyword != "dim" || !(in >> dim) || dim < 1)
        throw UsageError(path.string() + ": expected header \"dim n\"");

    std::vector<CVector> rays;
    std::vector<std::vector<int>> contexts;
    std::string token;
    while (in >> token) {
        if (token == "contexts") break;
        CVector ray(dim);
        for (int i = 0; i < dim; ++i) {
            double re = 0.0;
            double im = 0.0;
            if (i == 0) {
                try {
                    re = std::stod(token);
                } catch (const std::exception&) {
                    throw UsageError(path.string() + ": ray entry \"" + token +
                                     "\" is not a number");
                }
            } else if (!(in >> re)) {
                throw UsageError(path.string() + ": truncated ray line");
            }
            if (!(in >> im)) throw UsageError(path.string() + ": truncated ray line");
            ray(i) = Complex(re, im);
        }
        rays.push_back(std::move(ray));
    }
    if (token != "contexts")
        throw UsageError(path.string() + ": missing \"contexts\" section");
    int idx = 0;
    std::vector<int> current;
    while (in >> idx) {
        current.push_back(idx);
        if (static_cast<int>(current.size()) == dim) {
            contexts.push_back(current);
            current.clear();
        }
    }
    if (!in.eof() && in.fail())
        throw UsageError(path.string() + ": malformed context index");
    if (!current.empty())
        throw UsageError(path.string() + ": trailing context indices");
    return RayContextSystem::make(dim, std::move(rays), std::move(contexts));
}

std::string ray_system_text(const RayContextSystem& sys) {
    std::ostringstream out;
    out << "dim " << sys.dim << "\n";
    for (const CVector& ray : sys.rays) {
        for (int i = 0; i < sys.dim; ++i) {
            if (i > 0) out << ' ';
            out << format_shortest(ray(i).real()) << ' ' << format_shortest(ray(i).imag());
        }
        out << "\n";
    }
    out << "contexts\n";
    for (const std::vector<int>& ctx : sys.contexts) {
        for (std::size_t i = 0; i < ctx.size(); ++i) {
            if (i > 0) out << ' ';
            out << ctx[i];
        }
        out << "\n";
    }
    return out.str();
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string flea_csv(const std::vector<FleaRow>& rows) {
    std::ostringstream out;
    out << "hbar,E0,E1,gap,left_mass,right_mass,flea\n";
    for (const FleaRow& r : rows) {
        if (!r.ok) {
            out << "# error hbar=" << format_real(r.hbar) << " flea=" << r.flea << ": "
                << r.error << "\n";
            continue;
        }
        out << format_real(r.hbar) << ',' << format_real(r.E0) << ',' << format_real(r.E1)
            << ',' << format_real(r.gap) << ',' << format_real(r.left_mass) << ','
            << format_real(r.right_mass) << ',' << r.flea << "\n";
    }
    return out.str();
}

std::string gap_csv(const GapExperiment& g) {
    std::ostringstream out;
    out << "hbar,E0,E1,gap,gate_rel_change,gate_passed\n";
    for (const GapRow& r : g.rows)
        out << format_real(r.hbar) << ',' << format_real(r.E0) << ',' << format_real(r.E1)
            << ',' << format_real(r.gap) << ',' << format_real(r.gate_rel_change) << ','
            << (r.gate_passed ? 1 : 0) << "\n";
    out << "# fit slope=" << format_real(g.fit.slope)
        << " intercept=" << format_real(g.fit.intercept);
    if (g.fit.r2_defined) out << " r_squared=" << format_real(g.fit.r_squared);
    else out << " r_squared=undefined";
    out << " rows_used=" << g.fit.rows_used << "\n";
    for (const std::string& w : g.fit.warnings) out << "# warning " << w << "\n";
    return out.str();
}

std::string gap_json(const GapExperiment& g) {
    json rows = json::array();
    for (const GapRow& r : g.rows) {
        json row;
        row["hbar"] = r.hbar;
        row["E0"] = r.E0;
        row["E1"] = r.E1;
        row["gap"] = r.gap;
        row["gate_rel_change"] = r.gate_rel_change;
        row["gate_passed"] = r.gate_passed;
        rows.push_back(std::move(row));
    }
    json fit;
    fit["slope"] = g.fit.slope;
    fit["intercept"] = g.fit.intercept;
    if (g.fit.r2_defined) fit["r_squared"] = g.fit.r_squared;
    else fit["r_squared"] = nullptr;
    fit["rows_used"] = g.fit.rows_used;
    fit["warnings"] = g.fit.warnings;
    json j;
    j["rows"] = std::move(rows);
    j["fit"] = std::move(fit);
    return j.dump() + "\n";
}

std::string measure_json(const DiscreteProbabilityMeasure& m) {
    if (m.support.empty())
        throw InvalidMeasure("refusing to emit a measure with empty support");
    json support = json::array();
    for (double v : m.support) {
        if (v == std::rint(v) && std::abs(v) < 9.0e15)
            support.push_back(static_cast<long long>(v));
        else
            support.push_back(v);
    }
    json j;
    j["support"] = std::move(support);
    j["weights"] = m.weights;
    return j.dump() + "\n";
}

std::string measure_csv(const DiscreteProbabilityMeasure& m) {
    if (m.support.empty())
        throw InvalidMeasure("refusing to emit a measure with empty support");
    std::ostringstream out;
    out << "value,weight\n";
    for (std::size_t i = 0; i < m.support.size(); ++i)
        out << format_real(m.support[i]) << ',' << format_real(m.weights[i]) << "\n";
    return out.str();
}

std::string husimi_pgm(const HusimiField& field) {
    double max_all = 0.0;
    for (double d : field.density) max_all = std::max(max_all, d);
    const double scale = max_all > 0.0 ? 65535.0 / max_all : 0.0;

    std::ostringstream out;
    out << "P2\n" << field.window.q_points << ' ' << field.window.p_points << "\n65535\n";
    for (int ip = 0; ip < field.window.p_points; ++ip) {
        for (int iq = 0; iq < field.window.q_points; ++iq) {
            if (iq > 0) out << ' ';
            out << static_cast<int>(std::lround(field.at(ip, iq) * scale));
        }
        out << "\n";
    }
    return out.str();
}

std::string husimi_sidecar_json(const HusimiField& field) {
    double max_all = 0.0;
    for (double d : field.density) max_all = std::max(max_all, d);
    json j;
    j["p_min"] = field.window.p_min;
    j["p_max"] = field.window.p_max;
    j["q_min"] = field.window.q_min;
    j["q_max"] = field.window.q_max;
    j["p_points"] = field.window.p_points;
    j["q_points"] = field.window.q_points;
    j["hbar"] = field.hbar;
    j["max_density"] = max_all;
    j["pgm_scale"] = max_all > 0.0 ? 65535.0 / max_all : 0.0;
    j["total_mass"] = field.total_mass;
    j["kappa"] = field.kappa;
    j["warnings"] = field.warnings;
    return j.dump() + "\n";
}

std::string wave_dump(const WaveFunction& psi) {
    const bool complex_part = !psi.is_real();
    std::ostringstream out;
    for (int i = 0; i < psi.grid.points; ++i) {
        out << format_real(psi.grid.node(i)) << ' ' << format_real(psi.values[i].real());
        if (complex_part) out << ' ' << format_real(psi.values[i].imag());
        out << "\n";
    }
    return out.str();
}

std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path.string());
    const std::filesystem::path base = path.parent_path();
    std::vector<std::filesystem::path> out;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        const std::size_t end = line.find_last_not_of(" \t\r");
        std::filesystem::path entry(line.substr(begin, end - begin + 1));
        out.push_back(entry.is_absolute() ? entry : base / entry);
    }
    return out;
}

} // namespace bohr::io
