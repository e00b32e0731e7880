// Batch driver for the Lorentz-force impedance imaging pipeline:
// phantom generation, measurement synthesis, noise sweeps, and both
// reconstruction methods.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ulfit/errors.hpp"
#include "ulfit/pipeline.hpp"

namespace {

ulfit::RunConfig load_config(const std::string& path, long long seed, const std::string& out,
                             const std::string& method, double snr) {
  ulfit::ConfigFile file = ulfit::ConfigFile::parse_file(path);
  ulfit::RunConfig cfg = ulfit::RunConfig::from_config(file);
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (!out.empty()) cfg.out_dir = out;
  if (!method.empty()) {
    if (method == "control")
      cfg.methods = {ulfit::Method::Control};
    else if (method == "orthofield")
      cfg.methods = {ulfit::Method::Orthofield};
    else if (method == "both")
      cfg.methods = {ulfit::Method::Control, ulfit::Method::Orthofield};
    else
      throw ulfit::ValidationError("--method must be control, orthofield, or both");
  }
  if (snr > 0) cfg.snr_override = snr;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D Lorentz-force impedance imaging toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string method;
  long long seed = -1;
  double snr = -1.0;
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--method", method, "control | orthofield | both");
  app.add_option("--snr", snr, "fixed nu/S for the Wiener filter (default: estimated)");

  auto* synthesize = app.add_subcommand("synthesize", "forward model only: write measurements");
  auto* reconstruct =
      app.add_subcommand("reconstruct", "invert measurements written by synthesize");
  auto* sweep = app.add_subcommand("sweep", "full noise sweep with error report");
  auto* phantom = app.add_subcommand("phantom", "write the phantom and its mesh");

  CLI11_PARSE(app, argc, argv);

  try {
    ulfit::RunConfig cfg = load_config(config_path, seed, out_dir, method, snr);
    if (synthesize->parsed()) {
      ulfit::run_synthesize(cfg);
    } else if (reconstruct->parsed()) {
      ulfit::run_reconstruct(cfg);
    } else if (sweep->parsed()) {
      ulfit::NoiseSweepReport report = ulfit::run_pipeline(cfg);
      for (const auto& row : report.rows)
        std::printf("noise %-8g %-11s error %.6g\n", row.noise_level,
                    ulfit::method_name(row.method).c_str(), row.relative_l2_error);
      for (const auto& fail : report.failures)
        std::fprintf(stderr, "failed: level %g %s: %s\n", fail.noise_level,
                     fail.method.c_str(), fail.message.c_str());
      if (report.rows.empty() && !report.failures.empty())
        throw ulfit::NumericalError("sweep: every level failed");
    } else if (phantom->parsed()) {
      ulfit::run_phantom(cfg);
    }
  } catch (const ulfit::ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const ulfit::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
