// inrmri command line: simulate, reconstruct, grappa, evaluate, sweep.
//
// Exit codes: 0 ok, 2 usage / invalid argument, 3 I/O, 4 divergence,
// 5 GRAPPA calibration underdetermined.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "inrmri/inrmri.hpp"

namespace fs = std::filesystem;
using namespace inrmri;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDiverged = 4;
constexpr int kExitCalibration = 5;

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string() + ": " + ec.message());
}

std::string dump_sorted(const io::json& j) { return j.dump(2) + "\n"; }  // nlohmann::json keeps keys sorted

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw IoError(path.string() + ": cannot write");
}

// loss history with the first iteration prepended, so the CSV shows the start point
std::vector<LossRecord> full_history(const ReconResult& r) {
  std::vector<LossRecord> h;
  if (r.loss_history.empty() || r.loss_history.front().iteration != 1) h.push_back({1, r.first_loss});
  h.insert(h.end(), r.loss_history.begin(), r.loss_history.end());
  return h;
}

ReconConfig load_config(const std::string& preset, const std::string& path) {
  ReconConfig base;
  if (preset == "knee") {
    base = ReconConfig::knee();
  } else if (preset == "brain") {
    base = ReconConfig::brain();
  } else {
    detail::invalid("unknown preset '" + preset + "' (expected knee or brain)");
  }
  if (path.empty()) return base;
  return io::config_from_json(io::read_json(path), base);
}

// ---- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::size_t height = 128, width = 128, coils = 8;
  int R = 4, acs = 24, offset = 0;
  double noise = 0.005;
  std::uint64_t seed = 1, smap_seed = 7;
  std::string out_dir;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  auto* c = app.add_subcommand("simulate", "Write a synthetic Shepp-Logan acquisition");
  c->add_option("--height", a.height, "image rows")->capture_default_str();
  c->add_option("--width", a.width, "image columns")->capture_default_str();
  c->add_option("--coils", a.coils, "receiver coils")->capture_default_str();
  c->add_option("--R", a.R, "acceleration")->capture_default_str();
  c->add_option("--acs", a.acs, "ACS lines")->capture_default_str();
  c->add_option("--offset", a.offset, "first sampled modular row")->capture_default_str();
  c->add_option("--noise", a.noise, "noise std per real/imag component")->capture_default_str();
  c->add_option("--seed", a.seed, "noise seed")->capture_default_str();
  c->add_option("--smap-seed", a.smap_seed, "sensitivity map seed")->capture_default_str();
  c->add_option("--out-dir", a.out_dir, "output directory")->required();
}

int run_simulate(const SimulateArgs& a) {
  const ComplexImage truth = shepp_logan(a.height, a.width);
  const SensitivityMaps smaps = synth_smaps(a.coils, a.height, a.width, a.smap_seed);
  const SamplingMask mask = make_uniform_mask(a.height, a.width, a.R, a.acs, a.offset);
  const KSpaceGrid k = simulate_acquisition(truth, smaps, mask, a.noise, a.seed);
  const fs::path dir(a.out_dir);
  make_dir(dir);
  io::save_image(dir / "phantom.cplx", truth);
  io::save_smaps(dir / "smaps.cplx", smaps, {{"seed", a.smap_seed}});
  io::save_mask(dir / "mask.cplx", mask);
  io::save_kspace(dir / "kspace.cplx", k, {{"noise_sigma", a.noise}, {"seed", a.seed}, {"rng", "philox4x32-10"}});
  return 0;
}

// ---- reconstruct -------------------------------------------------------------

struct ReconArgs {
  std::string kspace, smaps, mask, config, preset = "knee", ablation = "none", out_dir, reference;
  std::optional<int> iterations;
  bool save_networks = false, quiet = false;
};

void add_reconstruct(CLI::App& app, ReconArgs& a) {
  auto* c = app.add_subcommand("reconstruct", "Fit the coordinate networks and reconstruct");
  c->add_option("--kspace", a.kspace, "acquired k-space")->required();
  c->add_option("--smaps", a.smaps, "sensitivity maps")->required();
  c->add_option("--mask", a.mask, "sampling mask")->required();
  c->add_option("--config", a.config, "JSON config overlaid on the preset");
  c->add_option("--preset", a.preset, "knee or brain")->capture_default_str();
  c->add_option("--ablation", a.ablation, "none, sine, tv or kc")->capture_default_str();
  c->add_option("--iterations", a.iterations, "override the iteration count");
  c->add_option("--reference", a.reference, "reference image for metrics.json");
  c->add_option("--out-dir", a.out_dir, "output directory")->required();
  c->add_flag("--save-networks", a.save_networks, "write the trained networks to out-dir/networks");
  c->add_flag("--quiet", a.quiet, "no progress lines");
}

void write_metrics(const fs::path& path, const ComplexImage& img, const std::string& reference) {
  const ComplexImage ref = io::load_image(reference);
  write_text(path, dump_sorted(io::metrics_json(psnr(img, ref), ssim(img, ref))));
}

template <class T>
ReconResult reconstruct_and_save(const KSpaceGrid& k, const SensitivityMaps& s, const SamplingMask& m,
                                 const ReconConfig& cfg, const ProgressFn& progress, const fs::path& net_dir) {
  TrainResult<T> trained = train<T>(k, s, m, cfg, progress);
  ReconResult out = infer(trained.networks, k, s, m, cfg);
  out.loss_history = std::move(trained.history);
  out.first_loss = trained.first;
  if (!net_dir.empty()) io::save_networks(net_dir, trained.networks);
  return out;
}

int run_reconstruct(const ReconArgs& a) {
  ReconConfig cfg = apply_ablation(load_config(a.preset, a.config), ablation_from_string(a.ablation));
  if (a.iterations) cfg.iterations = *a.iterations;
  cfg.validate();
  const KSpaceGrid k = io::load_kspace(a.kspace);
  const SensitivityMaps s = io::load_smaps(a.smaps);
  const SamplingMask m = io::load_mask(a.mask);
  const fs::path dir(a.out_dir);
  make_dir(dir);

  ProgressFn progress;
  if (!a.quiet) {
    progress = [](const LossRecord& r) {
      std::fprintf(stderr, "iter %d  dc %.6g  tv %.6g  total %.6g\n", r.iteration, r.loss.dc, r.loss.tv,
                   r.loss.total);
    };
  }
  const fs::path net_dir = a.save_networks ? dir / "networks" : fs::path();
  const ReconResult r = cfg.precision == Precision::Float32
                            ? reconstruct_and_save<float>(k, s, m, cfg, progress, net_dir)
                            : reconstruct_and_save<double>(k, s, m, cfg, progress, net_dir);

  io::save_image(dir / "combined.cplx", r.combined);
  io::save_kspace(dir / "kspace.cplx", r.final_kspace);
  io::write_loss_csv(dir / "loss.csv", full_history(r));
  write_text(dir / "config.json", dump_sorted(io::config_to_json(cfg)));
  if (!a.reference.empty()) write_metrics(dir / "metrics.json", r.combined, a.reference);
  return 0;
}

// ---- grappa ------------------------------------------------------------------

struct GrappaArgs {
  std::string kspace, smaps, mask, out_dir, reference, kernel, kernel_out;
  int kx = 5, ky_taps = 4;
  double tikhonov = 1e-6;
};

void add_grappa(CLI::App& app, GrappaArgs& a) {
  auto* c = app.add_subcommand("grappa", "GRAPPA baseline reconstruction");
  c->add_option("--kspace", a.kspace, "acquired k-space")->required();
  c->add_option("--smaps", a.smaps, "sensitivity maps")->required();
  c->add_option("--mask", a.mask, "sampling mask")->required();
  c->add_option("--kx", a.kx, "kernel extent along kx (odd)")->capture_default_str();
  c->add_option("--ky-taps", a.ky_taps, "acquired rows per kernel")->capture_default_str();
  c->add_option("--tikhonov", a.tikhonov, "relative Tikhonov damping")->capture_default_str();
  c->add_option("--kernel", a.kernel, "use a saved kernel instead of calibrating");
  c->add_option("--kernel-out", a.kernel_out, "save the calibrated kernel");
  c->add_option("--reference", a.reference, "reference image for metrics.json");
  c->add_option("--out-dir", a.out_dir, "output directory")->required();
}

int run_grappa(const GrappaArgs& a) {
  const KSpaceGrid k = io::load_kspace(a.kspace);
  const SensitivityMaps s = io::load_smaps(a.smaps);
  const SamplingMask m = io::load_mask(a.mask);
  const GrappaKernel kernel = a.kernel.empty()
                                  ? grappa_calibrate(extract_acs(k, m), m.acceleration(), a.kx, a.ky_taps, a.tikhonov)
                                  : io::load_kernel(a.kernel);
  const ReconResult r = grappa_reconstruct(k, m, kernel, s);
  const fs::path dir(a.out_dir);
  make_dir(dir);
  io::save_image(dir / "combined.cplx", r.combined);
  io::save_kspace(dir / "kspace.cplx", r.final_kspace);
  if (!a.kernel_out.empty()) io::save_kernel(a.kernel_out, kernel);
  if (!a.reference.empty()) write_metrics(dir / "metrics.json", r.combined, a.reference);
  return 0;
}

// ---- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::string image, reference, out;
  bool csv = false;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* c = app.add_subcommand("evaluate", "PSNR / SSIM of an image against a reference");
  c->add_option("--image", a.image, "image under test")->required();
  c->add_option("--reference", a.reference, "reference image")->required();
  c->add_option("--out", a.out, "write to this file instead of stdout");
  c->add_flag("--csv", a.csv, "emit a psnr_db,ssim CSV row instead of JSON");
}

int run_evaluate(const EvaluateArgs& a) {
  const ComplexImage img = io::load_image(a.image);
  const ComplexImage ref = io::load_image(a.reference);
  const double p = psnr(img, ref), s = ssim(img, ref);
  const std::string text = a.csv ? "psnr_db,ssim\n" + io::format_double(p) + "," + io::format_double(s) + "\n"
                                 : dump_sorted(io::metrics_json(p, s));
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  return 0;
}

// ---- sweep -------------------------------------------------------------------

struct SweepArgs {
  std::string kspace, smaps, reference, config, preset = "knee", methods = "proposed,grappa,zero-filled", out;
  std::vector<int> R{4}, acs{24};
  std::optional<int> iterations;
  int kx = 5, ky_taps = 4;
  double tikhonov = 1e-6;
  bool no_timing = false;
};

void add_sweep(CLI::App& app, SweepArgs& a) {
  auto* c = app.add_subcommand("sweep", "Methods x R x ACS grid on fully sampled data");
  c->add_option("--kspace", a.kspace, "fully sampled k-space")->required();
  c->add_option("--smaps", a.smaps, "sensitivity maps")->required();
  c->add_option("--reference", a.reference, "reference image (default: SENSE-1 of --kspace)");
  c->add_option("--methods", a.methods, "comma list of proposed, grappa, zero-filled")->capture_default_str();
  c->add_option("--R", a.R, "accelerations")->delimiter(',');
  c->add_option("--acs", a.acs, "ACS line counts")->delimiter(',');
  c->add_option("--config", a.config, "JSON config for the proposed method");
  c->add_option("--preset", a.preset, "knee or brain")->capture_default_str();
  c->add_option("--iterations", a.iterations, "override the iteration count");
  c->add_option("--kx", a.kx, "GRAPPA kx extent")->capture_default_str();
  c->add_option("--ky-taps", a.ky_taps, "GRAPPA ky taps")->capture_default_str();
  c->add_option("--tikhonov", a.tikhonov, "GRAPPA damping")->capture_default_str();
  c->add_option("--out", a.out, "CSV path (default stdout)");
  c->add_flag("--no-timing", a.no_timing, "write 0 in the seconds column so output is reproducible");
}

std::vector<std::string> split_methods(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item != "proposed" && item != "grappa" && item != "zero-filled")
      detail::invalid("unknown method '" + item + "'");
    out.push_back(item);
  }
  if (out.empty()) detail::invalid("sweep: empty method list");
  return out;
}

int run_sweep(const SweepArgs& a) {
  const std::vector<std::string> methods = split_methods(a.methods);
  detail::require(!a.R.empty() && !a.acs.empty(), "sweep: R and ACS lists must be non-empty");
  ReconConfig cfg = load_config(a.preset, a.config);
  if (a.iterations) cfg.iterations = *a.iterations;
  cfg.validate();
  const KSpaceGrid full = io::load_kspace(a.kspace);
  const SensitivityMaps s = io::load_smaps(a.smaps);
  const ComplexImage ref = a.reference.empty() ? zero_filled(full, s) : io::load_image(a.reference);

  std::string csv = "method,R,acs,psnr_db,ssim,seconds,status\n";
  for (int R : a.R)
    for (int acs : a.acs)
      for (const std::string& method : methods) {
        std::string metrics = ",", status = "ok";
        double seconds = 0.0;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const SamplingMask m = make_uniform_mask(full.height(), full.width(), R, acs);
          const KSpaceGrid k = apply_mask(full, m);
          ComplexImage img;
          if (method == "zero-filled") {
            img = zero_filled(k, s);
          } else if (method == "grappa") {
            img = grappa_reconstruct(k, m, s, a.kx, a.ky_taps, a.tikhonov).combined;
          } else {
            img = reconstruct(k, s, m, cfg).combined;
          }
          metrics = io::format_double(psnr(img, ref)) + "," + io::format_double(ssim(img, ref));
        } catch (const CalibrationError&) {
          status = "calibration";
        } catch (const DivergedError& e) {
          status = "diverged@" + std::to_string(e.iteration());
        } catch (const std::invalid_argument&) {
          status = "invalid";
        }
        if (!a.no_timing) seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        csv += method + "," + std::to_string(R) + "," + std::to_string(acs) + "," + metrics + "," +
               io::format_double(seconds) + "," + status + "\n";
        std::cerr << method << " R=" << R << " acs=" << acs << " " << status << "\n";
      }
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text(a.out, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scan-specific parallel MRI reconstruction with coordinate networks"};
  app.require_subcommand(1);
  SimulateArgs sim;
  ReconArgs rec;
  GrappaArgs gra;
  EvaluateArgs eva;
  SweepArgs swp;
  add_simulate(app, sim);
  add_reconstruct(app, rec);
  add_grappa(app, gra);
  add_evaluate(app, eva);
  add_sweep(app, swp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (app.got_subcommand("simulate")) return run_simulate(sim);
    if (app.got_subcommand("reconstruct")) return run_reconstruct(rec);
    if (app.got_subcommand("grappa")) return run_grappa(gra);
    if (app.got_subcommand("evaluate")) return run_evaluate(eva);
    return run_sweep(swp);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  }
}
