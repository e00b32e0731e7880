#include "ulfit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ulfit/errors.hpp"

namespace ulfit {

std::string method_name(Method m) {
  return m == Method::Control ? "control" : "orthofield";
}

// --- configuration ----------------------------------------------------------

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  auto trim = [](std::string s) {
    auto is_space = [](unsigned char c) { return std::isspace(c); };
    while (!s.empty() && is_space(s.front())) s.erase(s.begin());
    while (!s.empty() && is_space(s.back())) s.pop_back();
    return s;
  };
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ValidationError("config line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      cfg.sections[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.sections[section].emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto it = sections.find(section);
  if (it == sections.end()) return false;
  for (const auto& [k, v] : it->second)
    if (k == key) return true;
  return false;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  auto it = sections.find(section);
  if (it == sections.end()) return fallback;
  std::string result = fallback;
  for (const auto& [k, v] : it->second)
    if (k == key) result = v;  // last occurrence wins
  return result;
}

double ConfigFile::get_number(const std::string& section, const std::string& key,
                              double fallback) const {
  std::string s = get(section, key, "");
  if (s.empty()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config: [" + section + "] " + key + " = '" + s + "' is not a number");
  }
}

std::vector<std::string> ConfigFile::get_all(const std::string& section,
                                             const std::string& key) const {
  std::vector<std::string> out;
  auto it = sections.find(section);
  if (it == sections.end()) return out;
  for (const auto& [k, v] : it->second)
    if (k == key) out.push_back(v);
  return out;
}

namespace {

std::vector<double> parse_number_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ValidationError("config: bad number in " + what + ": '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("config: empty list for " + what);
  return out;
}

PhantomShape parse_shape(const std::string& s) {
  std::istringstream ss(s);
  std::string kind;
  ss >> kind;
  PhantomShape shape;
  if (kind == "disk") {
    double cx, cy, r, v;
    if (!(ss >> cx >> cy >> r >> v))
      throw ValidationError("config: disk shape needs 'disk cx cy r value'");
    shape.kind = PhantomShape::Kind::Disk;
    shape.center = {cx, cy};
    shape.extent = {r, r};
    shape.value = v;
  } else if (kind == "rect") {
    double x0, y0, x1, y1, v;
    if (!(ss >> x0 >> y0 >> x1 >> y1 >> v))
      throw ValidationError("config: rect shape needs 'rect x0 y0 x1 y1 value'");
    shape.kind = PhantomShape::Kind::Rect;
    shape.center = {x0, y0};
    shape.extent = {x1, y1};
    shape.value = v;
  } else {
    throw ValidationError("config: unknown shape kind '" + kind + "'");
  }
  return shape;
}

std::string level_tag(double level) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", level);
  std::string s(buf);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return s;
}

}  // namespace

RunConfig RunConfig::from_config(const ConfigFile& f) {
  RunConfig c;
  c.width = f.get_number("domain", "width", c.width);
  c.height = f.get_number("domain", "height", c.height);
  c.data_h = f.get_number("mesh", "data_h", c.data_h);
  c.solver_h = f.get_number("mesh", "solver_h", c.solver_h);

  c.phantom.background = f.get_number("phantom", "background", 1.0);
  c.phantom.sigma_low = f.get_number("phantom", "sigma_low", 0.5);
  c.phantom.sigma_high = f.get_number("phantom", "sigma_high", 10.0);
  for (const std::string& s : f.get_all("phantom", "shape"))
    c.phantom.shapes.push_back(parse_shape(s));
  if (f.get("phantom", "use_default_shapes", "false") == "true")
    for (const PhantomShape& s : default_phantom_shapes()) c.phantom.shapes.push_back(s);

  if (f.has("pulses", "angles_deg"))
    c.angles_deg = parse_number_list(f.get("pulses", "angles_deg", ""), "angles_deg");
  c.beam_radius = f.get_number("pulses", "beam_radius", c.beam_radius);
  c.spacing = f.get_number("pulses", "spacing", 0.0);
  c.eta = f.get_number("pulses", "eta", c.eta);
  c.dz = f.get_number("pulses", "dz", 0.0);
  c.speed = f.get_number("pulses", "speed", c.speed);
  c.standoff = f.get_number("pulses", "standoff", c.standoff);

  std::string snr = f.get("deconv", "snr", "auto");
  c.snr_override = snr == "auto" ? -1.0 : f.get_number("deconv", "snr", -1.0);

  if (f.has("noise", "levels"))
    c.noise_levels = parse_number_list(f.get("noise", "levels", ""), "noise levels");

  std::string method = f.get("run", "method", "orthofield");
  if (method == "control")
    c.methods = {Method::Control};
  else if (method == "orthofield")
    c.methods = {Method::Orthofield};
  else if (method == "both")
    c.methods = {Method::Control, Method::Orthofield};
  else
    throw ValidationError("config: method must be control, orthofield, or both");
  c.seed = static_cast<std::uint64_t>(f.get_number("run", "seed", 1.0));
  c.out_dir = f.get("run", "out", c.out_dir);

  c.control.max_iters = static_cast<int>(f.get_number("control", "max_iters", 200));
  c.control.step_init = f.get_number("control", "step_init", 1.0);
  c.control.armijo_c = f.get_number("control", "armijo_c", 1e-4);
  c.control.tv_epsilon = f.get_number("control", "tv_epsilon", 0.0);
  c.control.tv_delta = f.get_number("control", "tv_delta", 0.0);
  c.control.grad_tol = f.get_number("control", "grad_tol", 1e-8);

  c.ortho.epsilon = f.get_number("orthofield", "epsilon", 1e-3);
  c.ortho.refine_rounds = static_cast<int>(f.get_number("orthofield", "refine_rounds", 2));
  c.ortho.refine_fraction = f.get_number("orthofield", "refine_fraction", 0.2);
  c.ortho.sigma_clip_low = f.get_number("orthofield", "clip_low", c.phantom.sigma_low);
  c.ortho.sigma_clip_high = f.get_number("orthofield", "clip_high", c.phantom.sigma_high);

  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("config: bad domain dimensions");
  if (data_h <= 0 || solver_h <= 0) throw ValidationError("config: bad mesh resolution");
  if (solver_h < 1.5 * data_h)
    throw ValidationError(
        "config: solver mesh must be coarser than the data mesh (h ratio >= 1.5)");
  if (angles_deg.size() < 2) throw ValidationError("config: need at least two pulse directions");
  if (beam_radius <= 0 || eta <= 0 || speed <= 0 || standoff <= 0)
    throw ValidationError("config: bad pulse parameters");
  if (spacing < 0 || (spacing > 0 && spacing > beam_radius / 2 + 1e-15))
    throw ValidationError("config: spacing must be in ]0, R/2]");
  if (dz < 0 || (dz > 0 && dz > eta / 8 + 1e-15))
    throw ValidationError("config: dz must be in ]0, eta/8]");
  for (double l : noise_levels)
    if (l < 0) throw ValidationError("config: negative noise level");
  if (methods.empty()) throw ValidationError("config: no method selected");
  control.validate();
  ortho.validate();
}

// --- pipeline helpers --------------------------------------------------------

double relative_l2_error(const ConductivityMap& rec, const ConductivityMap& truth) {
  PointLocator locator(*rec.mesh);
  const TriMesh& mesh = *truth.mesh;
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    double a = mesh.signed_area(t);
    double rec_value = rec.sigma[locator.locate(mesh.centroid(t))];
    double diff = rec_value - truth.sigma[t];
    num += a * diff * diff;
    den += a * truth.sigma[t] * truth.sigma[t];
  }
  if (den == 0) throw ValidationError("relative_l2_error: zero reference");
  return std::sqrt(num / den);
}

VectorField resample_to(const VectorField& src, MeshPtr target, bool smooth) {
  PointLocator locator(*src.mesh);
  VectorField out(target);
  if (!smooth) {
    for (std::size_t t = 0; t < target->triangle_count(); ++t)
      out.values[t] = src.values[locator.locate(target->centroid(t))];
    return out;
  }
  // average over a 16-point barycentric grid per target triangle; plain
  // centroid lookup of a discontinuous field jitters at interfaces when the
  // two lattices are incommensurate, and the rotated-field solve amplifies
  // that jitter
  std::vector<std::array<double, 3>> bary;
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j + i <= 5; ++j) {
      double a = i / 6.0, b = j / 6.0;
      bary.push_back({a, b, 1.0 - a - b});
    }
  for (std::size_t t = 0; t < target->triangle_count(); ++t) {
    const auto& tri = target->triangles[t];
    Vec2 acc{0.0, 0.0};
    for (const auto& w : bary) {
      Vec2 p = w[0] * target->nodes[tri[0]] + w[1] * target->nodes[tri[1]] +
               w[2] * target->nodes[tri[2]];
      acc += src.values[locator.locate(p)];
    }
    out.values[t] = acc / static_cast<double>(bary.size());
  }
  return out;
}

namespace {

struct PulsePlan {
  std::vector<PulseSpec> pulses;
  std::vector<FanRange> fans;
  ZGrid grid;
};

PulsePlan build_pulse_plan(const RunConfig& cfg, const TriMesh& domain_mesh) {
  PulsePlan plan;
  PulseProfile w = PulseProfile::bump(cfg.eta);
  BeamProfile beam = BeamProfile::bump(cfg.beam_radius);
  double spacing = cfg.spacing > 0 ? cfg.spacing : cfg.beam_radius / 2;
  double z_exit = 0.0;
  for (double deg : cfg.angles_deg) {
    double rad = deg * std::numbers::pi / 180.0;
    Vec2 xi{std::cos(rad), std::sin(rad)};
    PulseFan fan =
        make_parallel_fan(domain_mesh, xi, w, beam, spacing, cfg.standoff, cfg.speed);
    FanRange range{plan.pulses.size(), plan.pulses.size() + fan.pulses.size()};
    plan.fans.push_back(range);
    for (auto& p : fan.pulses) plan.pulses.push_back(std::move(p));
    z_exit = std::max(z_exit, fan.z_exit);
  }
  double dz = cfg.dz > 0 ? cfg.dz : cfg.eta / 8;
  plan.grid = make_z_grid(z_exit, dz);
  return plan;
}

ConductivityMap midpoint_map(MeshPtr mesh, double lo, double hi) {
  return ConductivityMap(mesh, 0.5 * (lo + hi), lo, hi);
}

}  // namespace

VectorField recover_internal_current(const MeasurementSet& set,
                                     const std::vector<FanRange>& fans, MeshPtr solver_mesh,
                                     double snr_override) {
  set.validate();
  if (fans.size() < 2)
    throw ValidationError("recover_internal_current: need at least two directions");

  std::vector<DirectionalData> directions;
  for (const FanRange& fan : fans) {
    if (fan.end > set.pulses.size() || fan.begin >= fan.end)
      throw ValidationError("recover_internal_current: bad fan range");
    std::vector<PulseSpec> pulses(set.pulses.begin() + fan.begin,
                                  set.pulses.begin() + fan.end);
    // one kernel per fan; all pulses of a fan share the profile
    int kernel_len = static_cast<int>(std::ceil(pulses[0].w.eta / set.grid.dz)) + 1;
    std::vector<double> kernel(kernel_len);
    for (int m = 0; m < kernel_len; ++m) kernel[m] = pulses[0].w(-m * set.grid.dz);
    double kbw = kernel_bandwidth_fraction(kernel);

    std::vector<std::vector<double>> profiles;
    profiles.reserve(pulses.size());
    for (std::size_t p = fan.begin; p < fan.end; ++p) {
      WienerConfig wc;
      wc.noise_variance = set.noise_level * set.noise_level;
      double q = snr_override > 0 ? snr_override : estimate_snr(set.curves[p], kbw);
      if (set.noise_level > 0) q = std::max(q, 1e-12);
      wc.snr_estimate = q;
      profiles.push_back(deconvolved_profile(set.curves[p], set.pulses[p].w, set.grid, wc));
    }
    directions.push_back(build_directional_data(pulses, profiles, set.grid, solver_mesh));
  }
  return invert_gamma(directions).current;
}

// --- experiment loop ----------------------------------------------------------

NoiseSweepReport run_pipeline(const RunConfig& cfg, bool write_artifacts) {
  cfg.validate();
  namespace fs = std::filesystem;
  if (write_artifacts) fs::create_directories(cfg.out_dir);

  int data_nx = std::max(2, static_cast<int>(std::lround(cfg.width / cfg.data_h)));
  int data_ny = std::max(2, static_cast<int>(std::lround(cfg.height / cfg.data_h)));
  int solver_nx = std::max(2, static_cast<int>(std::lround(cfg.width / cfg.solver_h)));
  int solver_ny = std::max(2, static_cast<int>(std::lround(cfg.height / cfg.solver_h)));
  if (data_nx == solver_nx && data_ny == solver_ny)
    throw ValidationError("run_pipeline: data and solver meshes coincide (inverse crime)");
  auto data_mesh = std::make_shared<TriMesh>(make_rect_mesh(data_nx, data_ny, cfg.width, cfg.height));
  auto solver_mesh =
      std::make_shared<TriMesh>(make_rect_mesh(solver_nx, solver_ny, cfg.width, cfg.height));

  ConductivityMap sigma_true = make_phantom(data_mesh, cfg.phantom);
  PulsePlan plan = build_pulse_plan(cfg, *data_mesh);
  MeasurementSet clean = synthesize(sigma_true, plan.pulses, plan.grid);

  double rms = 0.0;
  std::size_t count = 0;
  for (const auto& curve : clean.curves)
    for (double v : curve) {
      rms += v * v;
      ++count;
    }
  rms = count ? std::sqrt(rms / count) : 0.0;

  if (write_artifacts) {
    write_mesh_file(*data_mesh, cfg.out_dir + "/data_mesh.txt");
    write_mesh_file(*solver_mesh, cfg.out_dir + "/solver_mesh.txt");
    write_sigma_csv(sigma_true, cfg.out_dir + "/phantom.csv");
    write_measurements_file(clean, cfg.out_dir + "/measurements.csv");
  }

  std::vector<double> levels = cfg.noise_levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  std::vector<Method> methods = cfg.methods;
  std::sort(methods.begin(), methods.end(),
            [](Method a, Method b) { return method_name(a) < method_name(b); });

  NoiseSweepReport report;
  for (std::size_t li = 0; li < levels.size(); ++li) {
    double level = levels[li];
    try {
      MeasurementSet noisy = add_noise(clean, level * rms, derive_seed(cfg.seed, li));
      VectorField current =
          recover_internal_current(noisy, plan.fans, solver_mesh, cfg.snr_override);
      if (write_artifacts)
        write_current_csv(current, cfg.out_dir + "/current_" + level_tag(level) + ".csv");

      for (Method method : methods) {
        auto t0 = std::chrono::steady_clock::now();
        try {
          ConductivityMap rec;
          if (method == Method::Orthofield) {
            OrthoResult ortho = adaptive_reconstruct(current, cfg.ortho);
            rec = ortho.sigma_rec;
            if (write_artifacts) {
              std::ofstream diag(cfg.out_dir + "/diag_orthofield_" + level_tag(level) + ".csv");
              diag << "round,eps,residual,error_if_known\n";
              char buf[128];
              for (const auto& d : ortho.diagnostics) {
                std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,\n", d.round, d.eps,
                              d.residual);
                diag << buf;
              }
            }
          } else {
            ConductivityMap sigma0 =
                midpoint_map(solver_mesh, cfg.phantom.sigma_low, cfg.phantom.sigma_high);
            ReconResult r = minimize(sigma0, current, cfg.control);
            rec = r.sigma;
          }
          double err = relative_l2_error(rec, sigma_true);
          double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          report.rows.push_back({level, method, err, wall});
          if (write_artifacts)
            write_sigma_csv(rec, cfg.out_dir + "/sigma_" + method_name(method) + "_" +
                                     level_tag(level) + ".csv");
        } catch (const std::exception& e) {
          report.failures.push_back({level, method_name(method), e.what()});
        }
      }
    } catch (const std::exception& e) {
      report.failures.push_back({level, "", e.what()});
    }
  }

  if (write_artifacts) {
    write_report_csv(report, cfg.out_dir + "/report.csv");
    write_summary_json(cfg, report, cfg.out_dir + "/summary.json");
  }
  return report;
}

void write_report_csv(const NoiseSweepReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open report for writing: " + path);
  f << "noise_level,method,relative_l2_error\n";
  char buf[128];
  for (const SweepRow& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%s,%.12g\n", row.noise_level,
                  method_name(row.method).c_str(), row.relative_l2_error);
    f << buf;
  }
}

void write_summary_json(const RunConfig& cfg, const NoiseSweepReport& report,
                        const std::string& path) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out_dir;
  j["rows"] = nlohmann::json::array();
  for (const SweepRow& row : report.rows)
    j["rows"].push_back({{"noise_level", row.noise_level},
                         {"method", method_name(row.method)},
                         {"relative_l2_error", row.relative_l2_error},
                         {"wall_seconds", row.wall_seconds}});
  j["failures"] = nlohmann::json::array();
  for (const SweepFailure& fail : report.failures)
    j["failures"].push_back(
        {{"noise_level", fail.noise_level}, {"method", fail.method}, {"message", fail.message}});
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open summary for writing: " + path);
  f << j.dump(2) << "\n";
}

// --- CLI verbs -----------------------------------------------------------------

void run_synthesize(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  int data_nx = std::max(2, static_cast<int>(std::lround(cfg.width / cfg.data_h)));
  int data_ny = std::max(2, static_cast<int>(std::lround(cfg.height / cfg.data_h)));
  auto data_mesh = std::make_shared<TriMesh>(make_rect_mesh(data_nx, data_ny, cfg.width, cfg.height));
  ConductivityMap sigma_true = make_phantom(data_mesh, cfg.phantom);
  PulsePlan plan = build_pulse_plan(cfg, *data_mesh);
  MeasurementSet clean = synthesize(sigma_true, plan.pulses, plan.grid);

  write_mesh_file(*data_mesh, cfg.out_dir + "/data_mesh.txt");
  write_sigma_csv(sigma_true, cfg.out_dir + "/phantom.csv");
  write_measurements_file(clean, cfg.out_dir + "/measurements.csv");

  double rms = 0.0;
  std::size_t count = 0;
  for (const auto& curve : clean.curves)
    for (double v : curve) {
      rms += v * v;
      ++count;
    }
  rms = count ? std::sqrt(rms / count) : 0.0;
  for (std::size_t li = 0; li < cfg.noise_levels.size(); ++li) {
    double level = cfg.noise_levels[li];
    if (level <= 0) continue;
    MeasurementSet noisy = add_noise(clean, level * rms, derive_seed(cfg.seed, li));
    write_measurements_file(noisy,
                            cfg.out_dir + "/measurements_" + level_tag(level) + ".csv");
  }
  std::printf("synthesize: %zu pulses, %d samples each -> %s\n", clean.pulses.size(),
              clean.grid.n, cfg.out_dir.c_str());
}

void run_reconstruct(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  MeasurementData data = read_measurements_file(cfg.out_dir + "/measurements.csv");

  int data_nx = std::max(2, static_cast<int>(std::lround(cfg.width / cfg.data_h)));
  int data_ny = std::max(2, static_cast<int>(std::lround(cfg.height / cfg.data_h)));
  int solver_nx = std::max(2, static_cast<int>(std::lround(cfg.width / cfg.solver_h)));
  int solver_ny = std::max(2, static_cast<int>(std::lround(cfg.height / cfg.solver_h)));
  auto data_mesh = std::make_shared<TriMesh>(make_rect_mesh(data_nx, data_ny, cfg.width, cfg.height));
  auto solver_mesh =
      std::make_shared<TriMesh>(make_rect_mesh(solver_nx, solver_ny, cfg.width, cfg.height));

  PulsePlan plan = build_pulse_plan(cfg, *data_mesh);
  if (plan.pulses.size() != data.curves.size())
    throw ValidationError("reconstruct: measurement file does not match the configured plan");
  for (std::size_t p = 0; p < plan.pulses.size(); ++p)
    if (norm(plan.pulses[p].origin - data.origins[p]) > 1e-9 ||
        norm(plan.pulses[p].xi - data.directions[p]) > 1e-9)
      throw ValidationError("reconstruct: pulse geometry mismatch at pulse " +
                            std::to_string(p));
  if (std::abs(plan.grid.dz - data.grid.dz) > 1e-12 || plan.grid.n != data.grid.n)
    throw ValidationError("reconstruct: sample grid mismatch");

  MeasurementSet set;
  set.pulses = plan.pulses;
  set.grid = data.grid;
  set.curves = data.curves;
  set.noise_level = 0.0;  // unknown; the Wiener weight comes from --snr or the estimator

  VectorField current = recover_internal_current(set, plan.fans, solver_mesh, cfg.snr_override);
  write_current_csv(current, cfg.out_dir + "/current.csv");

  for (Method method : cfg.methods) {
    if (method == Method::Orthofield) {
      OrthoResult ortho = adaptive_reconstruct(current, cfg.ortho);
      write_sigma_csv(ortho.sigma_rec, cfg.out_dir + "/sigma_orthofield.csv");
      write_mesh_file(*ortho.sigma_rec.mesh, cfg.out_dir + "/sigma_orthofield_mesh.txt");
    } else {
      ConductivityMap sigma0 =
          midpoint_map(solver_mesh, cfg.phantom.sigma_low, cfg.phantom.sigma_high);
      ReconResult r = minimize(sigma0, current, cfg.control);
      write_sigma_csv(r.sigma, cfg.out_dir + "/sigma_control.csv");
      write_mesh_file(*solver_mesh, cfg.out_dir + "/sigma_control_mesh.txt");
    }
    std::printf("reconstruct: %s done\n", method_name(method).c_str());
  }
}

void run_phantom(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  int data_nx = std::max(2, static_cast<int>(std::lround(cfg.width / cfg.data_h)));
  int data_ny = std::max(2, static_cast<int>(std::lround(cfg.height / cfg.data_h)));
  auto mesh = std::make_shared<TriMesh>(make_rect_mesh(data_nx, data_ny, cfg.width, cfg.height));
  ConductivityMap sigma = make_phantom(mesh, cfg.phantom);
  write_mesh_file(*mesh, cfg.out_dir + "/data_mesh.txt");
  write_sigma_csv(sigma, cfg.out_dir + "/phantom.csv");
  std::printf("phantom: %zu triangles -> %s\n", mesh->triangle_count(), cfg.out_dir.c_str());
}

}  // namespace ulfit
