// Copyright 2026 The sparseps Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: scene synthesis, map export, training and
// evaluation. Exit status is 0 on success, 1 on a domain or I/O error and
// 2 on a usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "sparseps/sparseps.hpp"

namespace fs = std::filesystem;
using namespace sparseps;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RenderArgs {
  std::string shape = "sphere";
  std::string brdf = "lambertian";
  double albedo = 0.8;
  double kd = 0.2;
  double ks = 0.8;
  double shininess = 30.0;
  int res = 64;
  int lights = 300;
  double max_zenith = 75.0;
  unsigned long long seed = 0;
  std::string out;
};

struct MapsArgs {
  std::string scene;
  int lights = 10;
  int w = kDefaultMapWidth;
  unsigned long long seed = 0;
  std::string out;
};

struct TrainArgs {
  int points = 2000;
  int pool = 64;
  int epochs = 10;
  int batch = 128;
  double lr = 1e-3;
  bool specular_only = false;
  int w = kDefaultMapWidth;
  unsigned long long seed = 0;
  std::string out;
};

struct EvalArgs {
  std::string scene;
  std::string solver = "ls";
  std::string model;
  int trials = 100;
  int lights = 10;
  double sigma = 0.0;
  std::string sigmas = "0,2,4,6,8";
  int w = kDefaultMapWidth;
  int iterations = 20;
  unsigned long long seed = 0;
  std::string out;
};

struct InspectArgs {
  std::string scene;
  std::string pixel;
  int w = kDefaultMapWidth;
  std::string out;
};

BrdfSpec parse_brdf(const RenderArgs& a) {
  if (a.brdf == "lambertian") return Lambertian{a.albedo};
  if (a.brdf == "blinn-phong" || a.brdf == "blinnphong") return BlinnPhong{a.kd, a.ks, a.shininess};
  throw UsageError("unknown --brdf '" + a.brdf + "' (lambertian, blinn-phong)");
}

int run_render(const RenderArgs& a) {
  if (a.shape != "sphere") throw UsageError("unknown --shape '" + a.shape + "' (sphere)");
  Rng rng(a.seed);
  Scene scene = render_sphere(a.res, parse_brdf(a), sample_hemisphere_lights(a.lights, a.max_zenith, rng));
  scene.seed = a.seed;
  write_scene(scene, a.out);
  std::cout << "rendered " << scene.pixels.size() << " pixels under " << scene.lights.size() << " lights to "
            << a.out << '\n';
  return 0;
}

int run_maps(const MapsArgs& a) {
  const Scene scene = read_scene(a.scene);
  Rng rng(a.seed);
  std::vector<std::size_t> picks;
  if (a.lights > 0 && std::size_t(a.lights) < scene.lights.size()) {
    picks = draw_without_replacement(scene.lights.size(), a.lights, rng);
  } else {
    for (std::size_t j = 0; j < scene.lights.size(); ++j) picks.push_back(j);
  }
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw IoError("cannot open " + a.out + " for writing");
  long written = 0, skipped = 0;
  for (std::size_t p = 0; p < scene.pixels.size(); ++p) {
    PixelSamples s;
    for (std::size_t j : picks) s.observations.push_back({scene.lights[j], scene.pixels[p].irradiance[j]});
    ObservationMap m(a.w);
    try {
      m = build_observation_map(s, a.w);
    } catch (const DegenerateSamplesError&) {
      ++skipped;  // dark under every picked light: written as an empty map
    }
    write_map_record(out, m);
    ++written;
  }
  if (!out) throw IoError("write failed: " + a.out);
  std::cout << "wrote " << written << " maps (" << skipped << " empty) to " << a.out << '\n';
  return 0;
}

int run_train(const TrainArgs& a) {
  Rng data_rng(a.seed);
  TrainingSetConfig tc;
  tc.points = a.points;
  tc.pool_lights = a.pool;
  tc.map_width = a.w;
  tc.specular_only = a.specular_only;
  const auto data = make_sphere_training_set(tc, data_rng);

  fs::create_directories(a.out);
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.map_width = a.w;
  cfg.seed = a.seed;
  std::ofstream trace(fs::path(a.out) / "trace.txt");
  if (!trace) throw IoError("cannot write trace in " + a.out);
  trace << std::setprecision(6);
  cfg.on_epoch = [&](int epoch, const EpochStats& s) {
    std::ostringstream line;
    line << std::setprecision(6) << "epoch=" << epoch << " ne_loss=" << s.mean_ne_loss << " li_loss=" << s.mean_li_loss
         << " ne_updates=" << s.ne_updates << " li_updates=" << s.li_updates;
    trace << line.str() << '\n';
    std::cout << line.str() << std::endl;
  };
  const TrainResult r = train_alternating(data, cfg);
  std::string schedule;
  for (UpdateKind k : r.schedule) schedule += k == UpdateKind::kNe ? 'N' : 'L';
  trace << "schedule=" << schedule << '\n';
  save_checkpoint(r.li, (fs::path(a.out) / "li.spln").string());
  save_checkpoint(r.ne, (fs::path(a.out) / "ne.spln").string());
  std::cout << "saved li.spln and ne.spln to " << a.out << '\n';
  return 0;
}

Solver make_solver(const EvalArgs& a) {
  if (a.solver == "ls") return make_ls_solver();
  if (a.solver == "inpaint-ls") return make_inpaint_ls_solver(a.w, a.iterations, true);
  if (a.solver == "diffusion-ls") return make_inpaint_ls_solver(a.w, a.iterations, false);
  if (a.solver == "learned") {
    if (a.model.empty()) throw UsageError("--solver learned needs --model <dir with li.spln and ne.spln>");
    return make_learned_solver(load_checkpoint((fs::path(a.model) / "li.spln").string()),
                              load_checkpoint((fs::path(a.model) / "ne.spln").string()), a.w);
  }
  throw UsageError("unknown --solver '" + a.solver + "' (ls, inpaint-ls, diffusion-ls, learned)");
}

TrialConfig trial_config(const EvalArgs& a) {
  TrialConfig cfg;
  cfg.n_trials = a.trials;
  cfg.n_lights = a.lights;
  cfg.seed = a.seed;
  cfg.sigma_deg = a.sigma;
  return cfg;
}

int run_eval(const EvalArgs& a) {
  const Solver solver = make_solver(a);
  const EvalReport r = run_trials(read_scene(a.scene), solver, trial_config(a));
  write_report(r, a.out);
  std::cout << std::setprecision(6) << "solver=" << r.solver << " mean_error_deg=" << r.mean_error_deg
            << " excluded_pixels=" << r.excluded_pixels << '\n';
  return 0;
}

std::vector<double> parse_sigmas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("--sigmas expects comma-separated numbers, got '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("--sigmas is empty");
  return out;
}

int run_sweep(const EvalArgs& a) {
  const std::vector<double> sigmas = parse_sigmas(a.sigmas);
  const Solver solver = make_solver(a);
  const auto reports = noise_sweep(read_scene(a.scene), solver, sigmas, trial_config(a));
  fs::create_directories(a.out);
  std::ofstream summary(fs::path(a.out) / "summary.txt");
  if (!summary) throw IoError("cannot write summary in " + a.out);
  summary << std::setprecision(6);
  for (const auto& r : reports) {
    std::ostringstream name;
    name << "sigma_" << r.config.sigma_deg << ".txt";
    write_report(r, (fs::path(a.out) / name.str()).string());
    summary << "sigma=" << r.config.sigma_deg << " mean_error_deg=" << r.mean_error_deg << '\n';
    std::cout << std::setprecision(6) << "sigma=" << r.config.sigma_deg << " mean_error_deg=" << r.mean_error_deg
              << '\n';
  }
  return 0;
}

int run_inspect(const InspectArgs& a) {
  int row = -1, col = -1;
  char comma = 0;
  std::istringstream ps(a.pixel);
  if (!(ps >> row >> comma >> col) || comma != ',' || !ps.eof()) {
    throw UsageError("--pixel expects row,col, got '" + a.pixel + "'");
  }
  const Scene scene = read_scene(a.scene);
  for (std::size_t p = 0; p < scene.pixels.size(); ++p) {
    if (scene.pixels[p].row != row || scene.pixels[p].col != col) continue;
    const ObservationMap m = build_observation_map(scene.samples(p), a.w);
    write_map_pgm(m, a.out);
    std::cout << "wrote " << a.w << "x" << a.w << " map of pixel " << row << "," << col << " ("
              << m.occupied() << " occupied cells) to " << a.out << '\n';
    return 0;
  }
  throw Error("pixel " + a.pixel + " is not on the object");
}

void add_eval_flags(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--scene", a.scene, "Scene directory")->required();
  cmd->add_option("--solver", a.solver, "ls, inpaint-ls, diffusion-ls or learned");
  cmd->add_option("--model", a.model, "Directory holding li.spln and ne.spln (learned solver)");
  cmd->add_option("--trials", a.trials, "Number of random trials")->check(CLI::PositiveNumber);
  cmd->add_option("--lights", a.lights, "Lights per trial")->check(CLI::Range(3, 1 << 20));
  cmd->add_option("--w", a.w, "Observation map width");
  cmd->add_option("--iterations", a.iterations, "Relaxation sweeps of the inpainting solvers");
  cmd->add_option("--seed", a.seed, "Random seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse photometric stereo toolkit"};
  app.require_subcommand(1);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render a synthetic scene directory");
  render->add_option("--shape", ra.shape, "Object shape (sphere)");
  render->add_option("--brdf", ra.brdf, "lambertian or blinn-phong");
  render->add_option("--albedo", ra.albedo, "Lambertian albedo");
  render->add_option("--kd", ra.kd, "Blinn-Phong diffuse weight");
  render->add_option("--ks", ra.ks, "Blinn-Phong specular weight");
  render->add_option("--shininess", ra.shininess, "Blinn-Phong exponent");
  render->add_option("--res", ra.res, "Image resolution");
  render->add_option("--lights", ra.lights, "Number of random lights")->check(CLI::PositiveNumber);
  render->add_option("--max-zenith", ra.max_zenith, "Largest light zenith angle in degrees");
  render->add_option("--seed", ra.seed, "Random seed");
  render->add_option("--out", ra.out, "Output directory")->required();

  MapsArgs ma;
  auto* maps = app.add_subcommand("maps", "Write per-pixel observation maps as OBSM records");
  maps->add_option("--scene", ma.scene, "Scene directory")->required();
  maps->add_option("--lights", ma.lights, "Random lights per map (0 = all)")->check(CLI::NonNegativeNumber);
  maps->add_option("--w", ma.w, "Observation map width");
  maps->add_option("--seed", ma.seed, "Random seed");
  maps->add_option("--out", ma.out, "Output file")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train the interpolation and normal models");
  train->add_option("--points", ta.points, "Training points")->check(CLI::PositiveNumber);
  train->add_option("--pool", ta.pool, "Observations stored per point")->check(CLI::PositiveNumber);
  train->add_option("--epochs", ta.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  train->add_option("--batch", ta.batch, "Minibatch size")->check(CLI::PositiveNumber);
  train->add_option("--lr", ta.lr, "Adam learning rate")->check(CLI::PositiveNumber);
  train->add_flag("--specular-only", ta.specular_only, "Train on Blinn-Phong materials only");
  train->add_option("--w", ta.w, "Observation map width");
  train->add_option("--seed", ta.seed, "Random seed");
  train->add_option("--out", ta.out, "Output directory")->required();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Run the random-trial protocol and write a report");
  add_eval_flags(eval, ea);
  eval->add_option("--sigma", ea.sigma, "Calibration noise in degrees")->check(CLI::NonNegativeNumber);
  eval->add_option("--out", ea.out, "Report file")->required();

  EvalArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Run the protocol at several calibration noise levels");
  add_eval_flags(sweep, sa);
  sweep->add_option("--sigmas", sa.sigmas, "Comma-separated noise levels in degrees");
  sweep->add_option("--out", sa.out, "Output directory")->required();

  InspectArgs ia;
  auto* inspect = app.add_subcommand("inspect", "Export one pixel's observation map as PGM");
  inspect->add_option("--scene", ia.scene, "Scene directory")->required();
  inspect->add_option("--pixel", ia.pixel, "row,col")->required();
  inspect->add_option("--w", ia.w, "Observation map width");
  inspect->add_option("--out", ia.out, "Output PGM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*render) return run_render(ra);
    if (*maps) return run_maps(ma);
    if (*train) return run_train(ta);
    if (*eval) return run_eval(ea);
    if (*sweep) return run_sweep(sa);
    if (*inspect) return run_inspect(ia);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}
