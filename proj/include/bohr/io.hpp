#pragma once
// File formats: matrix/state interchange, ray-system files, flea CSV, Husimi
// PGM with JSON sidecar, wave dumps, manifests, atomic writes.

#include <filesystem>
#include <string>
#include <vector>

#include "bohr/algebra.hpp"
#include "bohr/contexts.hpp"
#include "bohr/semiclassics.hpp"

namespace bohr::io {

// temp file in the target directory followed by rename; no partial outputs
void atomic_write(const std::filesystem::path& path, const std::string& contents);

// interchange object {"n": int, "re": n x n, "im": n x n}; unknown keys rejected
HermitianOperator read_operator(const std::filesystem::path& path);
std::string operator_json(const HermitianOperator& h);

// same plus optional "vector_re"/"vector_im" of length n
State read_state(const std::filesystem::path& path);
std::string state_json(const State& s);

// header `dim n`, rays as 2n reals (re/im alternating), a `contexts` line,
// then n 0-based indices per context line
RayContextSystem read_ray_system(const std::filesystem::path& path);
std::string ray_system_text(const RayContextSystem& sys);

// 12 significant digits, shortest form
std::string format_real(double v);

// header hbar,E0,E1,gap,left_mass,right_mass,flea
std::string flea_csv(const std::vector<FleaRow>& rows);

std::string gap_csv(const GapExperiment& g);
std::string gap_json(const GapExperiment& g);

// refuses empty support (invariant violation)
std::string measure_json(const DiscreteProbabilityMeasure& m);
std::string measure_csv(const DiscreteProbabilityMeasure& m);

// ASCII PGM (P2), q varying along rows, linear rescale to 0..65535
std::string husimi_pgm(const HusimiField& field);
std::string husimi_sidecar_json(const HusimiField& field);

// two columns x and Re psi; imaginary column appended when any Im is nonzero
std::string wave_dump(const WaveFunction& psi);

// one matrix-file path per line, '#' comments, resolved against the manifest dir
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path);

} // namespace bohr::io
