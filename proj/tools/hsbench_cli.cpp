// hsbench: simulate -> fit -> reconstruct -> evaluate -> report.
//
// Exit codes: 0 success, 1 some scenes failed (or a fatal runtime error),
// 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hsbench/bench.hpp"
#include "hsbench/io.hpp"
#include "hsbench/rng.hpp"
#include "hsbench/synth.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace hsbench;

namespace {

constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::string, std::string> split_assignment(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
    throw UsageError(std::string(flag) + " expects NAME=VALUE, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

int report_failures(const std::vector<bench::SceneFailure>& failures) {
  for (const auto& f : failures) std::cerr << "scene " << f.scene << ": " << f.message << "\n";
  return failures.empty() ? 0 : kExitPartial;
}

io::Manifest open_manifest(const fs::path& path) {
  try {
    return io::load_manifest(path, io::PathCheck::kNone);
  } catch (const io::ManifestError& e) {
    throw UsageError(e.what());
  }
}

// Real-world inputs are normalized codes; the pseudoinverse and the
// auxiliary suite need the white level simulate used.
void adopt_white_level(bench::RunConfig& cfg, const fs::path& manifest) {
  if (!cfg.white_level) cfg.white_level = bench::sidecar_white_level(manifest.parent_path());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral reconstruction benchmark: simulate camera inputs, fit baselines, score reconstructions"};
  app.set_config("--config", "", "TOML key = value file; flags override it")->envname("HSBENCH_CONFIG");
  app.require_subcommand(1);
  app.fallthrough();

  bench::RunConfig cfg;
  std::string track = "clean";
  std::optional<double> white_level;
  app.add_option("--track", track, "clean or real_world")
      ->check(CLI::IsMember({"clean", "real_world", "real-world"}))
      ->capture_default_str();
  app.add_option("--css", cfg.css_path, "Camera sensitivity CSV (wavelength,r,g,b); default built-in curves");
  app.add_option("--photon-gain", cfg.noise.photon_gain, "Expected photons per unit signal")->capture_default_str();
  app.add_option("--dark-sigma", cfg.noise.dark_sigma, "Dark noise standard deviation")->capture_default_str();
  app.add_option("--seed", cfg.noise.seed, "Base noise seed")->capture_default_str();
  app.add_option("--jpeg-quality", cfg.jpeg_quality, "JPEG quality")->check(CLI::Range(1, 100))->capture_default_str();
  app.add_option("--white-level", white_level, "Linear value mapped to code 255 (default: p99.9 of training RGB)");
  app.add_option("--white-level-tag", cfg.white_level_tag, "Scenes used for the automatic white level")
      ->capture_default_str();
  app.add_option("--shuffle-patch", cfg.shuffle_patch, "Patch side for the spatial shuffle")->capture_default_str();
  app.add_option("--shuffle-seed", cfg.shuffle_seed, "Spatial shuffle seed")->capture_default_str();
  app.add_option("--denom-floor", cfg.metric.denom_floor, "MRAE denominator floor")->capture_default_str();
  app.add_option("--clusters", cfg.metric.cluster_count, "Clusters for weighted MRAE")->capture_default_str();
  app.add_option("--cluster-seed", cfg.metric.cluster_seed, "k-means seed")->capture_default_str();
  app.add_option("--cluster-iterations", cfg.metric.cluster_iterations, "k-means iteration cap")
      ->capture_default_str();
  app.add_option("--tau", cfg.metric.tau, "Back-projection weight")->capture_default_str();
  app.add_flag("--pooled", cfg.pooled, "Pool all entries instead of averaging per-scene MRAE");
  app.add_option("--jobs", cfg.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene set and manifest");
  fs::path synth_out;
  std::size_t synth_count = 12, synth_train = 8, synth_oos = 0, synth_h = 32, synth_w = 32;
  std::uint64_t synth_seed = 1;
  fs::path synth_css;
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--count", synth_count, "Number of scenes")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--train", synth_train, "Leading scenes tagged train (others: test)")->capture_default_str();
  synth_cmd->add_option("--out-of-scope", synth_oos, "Trailing scenes also tagged out_of_scope")
      ->capture_default_str();
  synth_cmd->add_option("--height", synth_h, "Scene height")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--width", synth_w, "Scene width")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--scene-seed", synth_seed, "Scene generator seed")->capture_default_str();
  synth_cmd->add_option("--write-css", synth_css, "Also write the built-in CSS table here");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Render track inputs for every scene of a manifest");
  fs::path sim_manifest, sim_out;
  sim_cmd->add_option("--manifest", sim_manifest, "Scene manifest (JSONL)")->required();
  sim_cmd->add_option("--out", sim_out, "Output directory")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a baseline model on simulated pairs");
  fs::path fit_manifest, fit_out;
  std::string fit_kind = "linear", fit_objective = "plain";
  bench::FitOptions fit_opts;
  fit_cmd->add_option("--manifest", fit_manifest, "Manifest written by simulate")->required();
  fit_cmd->add_option("--out", fit_out, "Model file (SBMD)")->required();
  fit_cmd->add_option("--kind", fit_kind, "linear or basis")->check(CLI::IsMember({"linear", "basis"}))
      ->capture_default_str();
  fit_cmd->add_option("--order", fit_opts.feature_order, "RGB feature order")->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  fit_cmd->add_option("--lambda", fit_opts.lambda, "Ridge strength")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  fit_cmd->add_option("--k", fit_opts.k, "Basis size")->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--iterations", fit_opts.iterations, "Alternating iterations")->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_cmd->add_option("--objective", fit_objective, "plain or css_prior")
      ->check(CLI::IsMember({"plain", "css_prior"}))
      ->capture_default_str();
  fit_cmd->add_option("--tag", fit_opts.tag, "Train only on scenes with this tag");

  // reconstruct
  auto* rec_cmd = app.add_subcommand("reconstruct", "Write a reconstruction cube for every scene");
  fs::path rec_manifest, rec_out;
  std::string rec_method;
  std::string rec_tag;
  rec_cmd->add_option("--manifest", rec_manifest, "Manifest written by simulate")->required();
  rec_cmd->add_option("--method", rec_method, "pinv or a model file")->required();
  rec_cmd->add_option("--out", rec_out, "Output directory")->required();
  rec_cmd->add_option("--tag", rec_tag, "Only scenes with this tag");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score reconstructions and run the auxiliary suite");
  fs::path eval_manifest, eval_out;
  std::vector<std::string> eval_recon, eval_aux;
  std::string eval_tag;
  eval_cmd->add_option("--manifest", eval_manifest, "Manifest with ground-truth cubes and track inputs")->required();
  eval_cmd->add_option("--recon", eval_recon, "NAME=DIR of <scene>.bhsc reconstructions (repeatable)");
  eval_cmd->add_option("--aux", eval_aux, "NAME=pinv|MODEL for the auxiliary suite (repeatable)");
  eval_cmd->add_option("--tag", eval_tag, "Only scenes with this tag");
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();

  // report
  auto* rep_cmd = app.add_subcommand("report", "Render Markdown and CSV tables");
  fs::path rep_board, rep_aux, rep_out;
  rep_cmd->add_option("--leaderboard", rep_board, "leaderboard.csv from evaluate")->required();
  rep_cmd->add_option("--aux", rep_aux, "aux.csv from evaluate");
  rep_cmd->add_option("--out", rep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    cfg.track = robustness::parse_track(track);
    cfg.white_level = white_level;
    fit_opts.kind = bench::parse_model_kind(fit_kind);
    fit_opts.objective =
        fit_objective == "plain" ? recon::BasisObjective::kPlain : recon::BasisObjective::kCssPrior;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    if (*synth_cmd) {
      if (synth_train > synth_count || synth_oos > synth_count)
        throw UsageError("--train and --out-of-scope cannot exceed --count");
      const CameraResponse css = bench::load_css(cfg);
      io::Manifest m;
      m.root = synth_out;
      for (std::size_t i = 0; i < synth_count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "scene_%03zu", i);
        const HsiCube cube =
            synth::make_scene(synth_h, synth_w, css.grid(), rng::derive_seed(synth_seed, id));
        io::write_cube(cube, synth_out / (std::string(id) + ".bhsc"));
        io::SceneRecord rec;
        rec.id = id;
        rec.cube_path = std::string(id) + ".bhsc";
        rec.tags.insert(i < synth_train ? "train" : "test");
        if (i + synth_oos >= synth_count) rec.tags.insert("out_of_scope");
        m.records.push_back(std::move(rec));
      }
      io::save_manifest(m, synth_out / "manifest.jsonl");
      if (!synth_css.empty()) io::write_css(css, synth_css);
      std::cout << "wrote " << synth_count << " scenes to " << synth_out.string() << "\n";
      return 0;
    }

    if (*sim_cmd) {
      const auto result = bench::simulate(cfg, open_manifest(sim_manifest), sim_out);
      std::cout << "simulated " << result.manifest.records.size() << " scenes (" << robustness::to_string(cfg.track)
                << ", white level " << result.white_level << ")\n";
      return report_failures(result.failures);
    }

    if (*fit_cmd) {
      const auto result = bench::fit(cfg, open_manifest(fit_manifest), fit_opts);
      recon::save_model(result.model, fit_out);
      io::write_text(fit_out.string() + ".json", bench::fit_sidecar(cfg, bench::load_css(cfg), fit_opts, result));
      std::cout << "fitted " << fit_kind << " model on " << result.scenes << " scenes, training MRAE "
                << result.training_mrae << "\n";
      return 0;
    }

    if (*rec_cmd) {
      adopt_white_level(cfg, rec_manifest);
      const CameraResponse css = bench::load_css(cfg);
      io::Manifest m = open_manifest(rec_manifest);
      if (!rec_tag.empty()) m = io::filter_by_tag(m, rec_tag);
      const auto result = bench::reconstruct(cfg, m, bench::load_method(cfg, css, rec_method), rec_out);
      const nlohmann::json sidecar = {{"config_hash", bench::config_hash(cfg, css)},
                                      {"method", rec_method},
                                      {"track", robustness::to_string(cfg.track)},
                                      {"written", result.written}};
      io::write_text(rec_out / "reconstruct.json", sidecar.dump(2) + "\n");
      std::cout << "wrote " << result.written << " reconstructions to " << rec_out.string() << "\n";
      return report_failures(result.failures);
    }

    if (*eval_cmd) {
      if (eval_recon.empty() && eval_aux.empty()) throw UsageError("evaluate needs at least one --recon or --aux");
      adopt_white_level(cfg, eval_manifest);
      const CameraResponse css = bench::load_css(cfg);
      io::Manifest m = open_manifest(eval_manifest);
      if (!eval_tag.empty()) m = io::filter_by_tag(m, eval_tag);
      std::vector<bench::Submission> subs;
      for (const auto& s : eval_recon) {
        auto [name, dir] = split_assignment(s, "--recon");
        subs.push_back({name, dir});
      }
      std::vector<bench::SceneFailure> failures;
      bench::Leaderboard board;
      board.config_hash = bench::config_hash(cfg, css);
      if (!subs.empty()) {
        auto result = bench::evaluate(cfg, m, subs);
        board = std::move(result.board);
        failures = std::move(result.failures);
      }
      io::write_text(eval_out / "leaderboard.csv", bench::leaderboard_to_csv(board));
      io::write_text(eval_out / "leaderboard.txt", bench::leaderboard_to_text(board));
      std::cout << bench::leaderboard_to_text(board);
      if (!eval_aux.empty()) {
        std::vector<robustness::AuxReport> reports;
        for (const auto& s : eval_aux) {
          auto [name, spec] = split_assignment(s, "--aux");
          reports.push_back(bench::evaluate_aux(cfg, m, bench::load_method(cfg, css, spec), name));
          for (const auto& row : reports.back().rows)
            if (!row.error.empty()) failures.push_back({name + "/" + row.scene, row.error});
        }
        io::write_text(eval_out / "aux.csv", robustness::aux_to_csv(reports, board.config_hash));
        io::write_text(eval_out / "aux.txt", robustness::aux_to_text(reports));
        std::cout << robustness::aux_to_text(reports);
      }
      return report_failures(failures);
    }

    if (*rep_cmd) {
      const auto text = [](const fs::path& p) {
        const auto bytes = io::read_file(p);
        return std::string(bytes.begin(), bytes.end());
      };
      const bench::Leaderboard board = bench::leaderboard_from_csv(text(rep_board));
      std::vector<robustness::AuxReport> aux;
      if (!rep_aux.empty()) aux = robustness::aux_from_csv(text(rep_aux));
      io::write_text(rep_out / "report.md", bench::render_report(board, aux));
      io::write_text(rep_out / "leaderboard.csv", bench::leaderboard_to_csv(board));
      if (!aux.empty()) io::write_text(rep_out / "aux.csv", robustness::aux_to_csv(aux, board.config_hash));
      std::cout << "wrote " << (rep_out / "report.md").string() << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitUsage;
}
