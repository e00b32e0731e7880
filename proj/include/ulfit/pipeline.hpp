#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ulfit/fields.hpp"
#include "ulfit/forward.hpp"
#include "ulfit/phantom.hpp"
#include "ulfit/recon_control.hpp"
#include "ulfit/recon_orthofield.hpp"
#include "ulfit/virtual_current.hpp"

namespace ulfit {

enum class Method { Control, Orthofield };
std::string method_name(Method m);

// Parsed "[section]" / "key = value" configuration text. Repeated keys
// accumulate (used for phantom shapes).
struct ConfigFile {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;

  static ConfigFile parse(const std::string& text);
  static ConfigFile parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_number(const std::string& section, const std::string& key, double fallback) const;
  std::vector<std::string> get_all(const std::string& section, const std::string& key) const;
};

struct RunConfig {
  // geometry
  double width = 2.0;
  double height = 1.0;
  // meshes; the solver mesh must be coarser by a factor >= 1.5 so the
  // reconstruction never inverts on the grid that produced the data
  double data_h = 0.01;
  double solver_h = 0.02;
  // phantom
  PhantomSpec phantom;
  // pulse plan
  std::vector<double> angles_deg = {20.0, 110.0};
  double beam_radius = 0.03;
  double spacing = 0.0;   // 0 = beam_radius / 2
  double eta = 0.08;
  double dz = 0.0;        // 0 = eta / 8
  double speed = 1.0;
  double standoff = 0.3;
  // deconvolution
  double snr_override = -1.0;  // <= 0: estimate per curve
  // experiment
  std::vector<double> noise_levels = {0.0};  // relative to the clean RMS
  std::vector<Method> methods = {Method::Orthofield};
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  // solver settings
  ControlConfig control;
  OrthoConfig ortho;  // clip bounds filled from the phantom bounds

  static RunConfig from_config(const ConfigFile& file);
  void validate() const;
};

struct SweepRow {
  double noise_level = 0.0;  // relative
  Method method = Method::Orthofield;
  double relative_l2_error = 0.0;
  double wall_seconds = 0.0;
};

struct SweepFailure {
  double noise_level = 0.0;
  std::string method;  // empty when the whole level failed
  std::string message;
};

struct NoiseSweepReport {
  std::vector<SweepRow> rows;  // sorted by (noise level, method)
  std::vector<SweepFailure> failures;
};

// sqrt( sum a_T (rec(c_T) - true_T)^2 / sum a_T true_T^2 ) over the truth's
// mesh, sampling the reconstruction by piecewise-constant lookup.
double relative_l2_error(const ConductivityMap& rec, const ConductivityMap& truth);

// Piecewise-constant resampling of per-triangle data onto another mesh.
// smooth = true averages 16 interior sample points per target triangle
// (steadier when the lattices are incommensurate); false looks up the
// centroid only (sharp, right when interfaces lie on both lattices).
VectorField resample_to(const VectorField& src, MeshPtr target, bool smooth = true);

// Internal current recovered from measurements: Wiener deconvolution of
// every curve, directional data per fan, gamma inversion on the solver
// mesh. fans[i] gives the pulse index range of direction i in `set`.
struct FanRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};
VectorField recover_internal_current(const MeasurementSet& set,
                                     const std::vector<FanRange>& fans, MeshPtr solver_mesh,
                                     double snr_override);

// End-to-end experiment: synthesize on the data mesh, corrupt, deconvolve,
// invert gamma, reconstruct with each method, and report the error per
// noise level. A failing stage records its message and the remaining levels
// continue. Deterministic for a fixed config and seed.
NoiseSweepReport run_pipeline(const RunConfig& cfg, bool write_artifacts = true);

void write_report_csv(const NoiseSweepReport& report, const std::string& path);
void write_summary_json(const RunConfig& cfg, const NoiseSweepReport& report,
                        const std::string& path);

// Single stages used by the CLI verbs.
void run_synthesize(const RunConfig& cfg);
void run_reconstruct(const RunConfig& cfg);
void run_phantom(const RunConfig& cfg);

}  // namespace ulfit
