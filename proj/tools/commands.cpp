#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hyperalign/data.hpp"
#include "hyperalign/error.hpp"
#include "hyperalign/model_io.hpp"
#include "hyperalign/simd/kernels.hpp"

namespace hyperalign::cli {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string csv_num(double v) { return fmt("%.10g", v); }

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

Model load_checked(const std::filesystem::path& model_path, const Dataset& ds) {
  Model model = load_model(model_path);
  if (model.params.dim() != ds.dim) {
    throw InvalidInput("dimension mismatch: model dim " + std::to_string(model.params.dim()) +
                       " vs data dim " + std::to_string(ds.dim));
  }
  return model;
}

void write_history(const TrainHistory& h, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << kHistoryHeader << '\n';
  for (const auto& e : h.epochs) {
    out << e.epoch << ',' << csv_num(e.lr) << ',' << csv_num(e.loss_total) << ','
        << csv_num(e.loss_reg) << ',' << csv_num(e.loss_entail) << ',' << csv_num(e.val_srcc)
        << ',' << csv_num(e.val_plcc) << '\n';
  }
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {mean, sd};
}

nlohmann::json config_json(const TrainOptions& o) {
  const TrainConfig& c = o.config;
  return {{"lambda", c.lambda},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"lr_step", c.lr_step},
          {"lr_gamma", c.lr_gamma},
          {"patience", c.patience},
          {"min_improvement", c.min_improvement},
          {"modnet_hidden", c.modnet_hidden},
          {"curvature", c.manifold.curvature},
          {"k", c.entailment.k},
          {"contraction", c.entailment.contraction},
          {"train_fraction", o.train_fraction},
          {"val_fraction", o.val_fraction},
          {"simd_backend", std::string(simd::backend_name(simd::active_backend()))}};
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  auto parse_one = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("invalid seed '" + s + "' in '" + text + "'");
    }
    return std::stoull(s);
  };
  std::vector<std::uint64_t> seeds;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_one(text.substr(0, dots));
    const auto hi = parse_one(text.substr(dots + 2));
    if (hi < lo) throw UsageError("empty seed range '" + text + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(parse_one(item));
  if (seeds.empty()) throw UsageError("no seeds given");
  return seeds;
}

std::filesystem::path seed_path(const std::filesystem::path& base, std::uint64_t seed,
                                bool multi) {
  if (!multi) return base;
  auto p = base;
  p.replace_filename(base.stem().string() + ".seed" + std::to_string(seed) +
                     base.extension().string());
  return p;
}

void run_synth(const SynthOptions& opts) {
  if (opts.n < 10) throw UsageError("--n must be at least 10");
  if (opts.dim < 4) throw UsageError("--dim must be at least 4");
  if (!(opts.noise >= 0.0)) throw UsageError("--noise must be non-negative");
  if (opts.out.empty()) throw UsageError("--out is required");
  save_embeddings(synthetic_dataset(opts.n, opts.dim, opts.seed, opts.noise), opts.out);
}

TrainSummary run_train(const TrainOptions& opts, std::ostream& log) {
  if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0)) {
    throw UsageError("--train-fraction must lie in (0, 1)");
  }
  if (!(opts.val_fraction > 0.0 && opts.val_fraction < 1.0)) {
    throw UsageError("--val-fraction must lie in (0, 1)");
  }
  if (opts.seeds.empty()) throw UsageError("at least one seed is required");
  try {
    opts.config.validate();
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }

  const Dataset data = load_embeddings(opts.data);
  const bool multi = opts.seeds.size() > 1;
  const auto history_base = opts.history.value_or(opts.model.string() + ".history.csv");

  TrainSummary summary;
  summary.manifest_path = opts.manifest.value_or(opts.model.string() + ".manifest.json");
  for (const std::uint64_t seed : opts.seeds) {
    const Split outer = prompt_disjoint_split(data, opts.train_fraction, seed);
    const Split inner = prompt_disjoint_split(outer.train, 1.0 - opts.val_fraction, seed + 1);

    TrainConfig cfg = opts.config;
    cfg.seed = seed;
    TrainResult result = train(inner.train, inner.test, cfg);
    const Evaluation test = evaluate(outer.test, result.params, cfg.manifold, cfg.entailment);

    SeedRun run;
    run.seed = seed;
    run.test = test.metrics;
    run.epochs_run = static_cast<int>(result.history.epochs.size());
    run.best_epoch = result.history.best_epoch;
    run.best_val_srcc = result.history.best_val_srcc;
    run.train_samples = inner.train.size();
    run.val_samples = inner.test.size();
    run.test_samples = outer.test.size();
    run.model_path = seed_path(opts.model, seed, multi);
    run.history_path = seed_path(history_base, seed, multi);

    Model model{result.params, cfg.manifold, cfg.entailment,
                TrainingMetadata{seed, run.epochs_run, run.best_epoch, run.best_val_srcc}};
    save_model(model, run.model_path);
    write_history(result.history, run.history_path);
    if (opts.test_out) {
      run.test_path = seed_path(*opts.test_out, seed, multi);
      save_embeddings(outer.test, *run.test_path);
    }
    run.history = std::move(result.history);

    log << "seed " << seed << ": test SRCC " << fmt("%.4f", run.test.srcc) << " PLCC "
        << fmt("%.4f", run.test.plcc) << " (epochs " << run.epochs_run << ", best epoch "
        << run.best_epoch << ", val SRCC " << fmt("%.4f", run.best_val_srcc) << ")\n";
    summary.runs.push_back(std::move(run));
  }

  std::vector<double> s, p;
  for (const auto& r : summary.runs) {
    s.push_back(r.test.srcc);
    p.push_back(r.test.plcc);
  }
  std::tie(summary.mean_srcc, summary.std_srcc) = mean_std(s);
  std::tie(summary.mean_plcc, summary.std_plcc) = mean_std(p);

  nlohmann::json manifest;
  manifest["config"] = config_json(opts);
  manifest["data"] = opts.data.string();
  manifest["seeds"] = opts.seeds;
  manifest["runs"] = nlohmann::json::array();
  for (const auto& r : summary.runs) {
    manifest["runs"].push_back({{"seed", r.seed},
                                {"test_srcc", r.test.srcc},
                                {"test_plcc", r.test.plcc},
                                {"test_samples", r.test_samples},
                                {"train_samples", r.train_samples},
                                {"val_samples", r.val_samples},
                                {"epochs_run", r.epochs_run},
                                {"best_epoch", r.best_epoch},
                                {"best_val_srcc", r.best_val_srcc},
                                {"model", r.model_path.string()},
                                {"history", r.history_path.string()},
                                {"test_data", r.test_path ? r.test_path->string() : ""}});
  }
  manifest["aggregate"] = {{"mean_srcc", summary.mean_srcc},
                           {"std_srcc", summary.std_srcc},
                           {"mean_plcc", summary.mean_plcc},
                           {"std_plcc", summary.std_plcc}};
  std::ofstream mout(summary.manifest_path, std::ios::trunc);
  if (!mout) throw Error("cannot open " + summary.manifest_path.string() + " for writing");
  mout << manifest.dump(2) << '\n';

  if (multi) {
    log << "mean over " << summary.runs.size() << " seeds: SRCC " << fmt("%.4f", summary.mean_srcc)
        << " (std " << fmt("%.4f", summary.std_srcc) << ") PLCC "
        << fmt("%.4f", summary.mean_plcc) << " (std " << fmt("%.4f", summary.std_plcc) << ")\n";
  }
  return summary;
}

MetricReport run_eval(const EvalOptions& opts, std::ostream& out) {
  const Dataset data = load_embeddings(opts.data);
  const Model model = load_checked(opts.model, data);
  const Evaluation ev = evaluate(data, model.params, model.manifold, model.entailment);
  out << "SRCC " << fmt("%.4f", ev.metrics.srcc) << "\n";
  out << "PLCC " << fmt("%.4f", ev.metrics.plcc) << "\n";
  if (opts.out) {
    auto csv = open_csv(*opts.out);
    csv << "index,score,prediction\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      csv << i << ',' << csv_num(data.samples[i].score) << ',' << csv_num(ev.predictions[i])
          << '\n';
    }
  }
  return ev.metrics;
}

void run_score(const ScoreOptions& opts) {
  const Dataset data = load_embeddings(opts.data, ScorePolicy::kOptional);
  const Model model = load_checked(opts.model, data);
  const auto preds = predict(data, model.params, model.manifold, model.entailment);
  auto csv = open_csv(opts.out);
  csv << "group_id,prediction\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    csv << data.samples[i].group_id << ',' << csv_num(preds[i]) << '\n';
  }
}

void run_report(const ScoreOptions& opts) {
  const Dataset data = load_embeddings(opts.data, ScorePolicy::kOptional);
  const Model model = load_checked(opts.model, data);
  auto csv = open_csv(opts.out);
  csv << kReportHeader << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    Inference inf;
    try {
      inf = infer(data.samples[i], model.params, model.manifold, model.entailment);
    } catch (const Error& e) {
      throw SampleError(e.what(), i);
    }
    const auto& z = inf.primitives;
    csv << data.samples[i].group_id << ',' << csv_num(data.samples[i].score) << ','
        << csv_num(inf.prediction) << ',' << csv_num(z.distance) << ','
        << csv_num(z.exterior_angle) << ',' << csv_num(z.aperture) << ','
        << csv_num(inf.image_space_norm) << ',' << csv_num(inf.text_space_norm) << '\n';
  }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperbolic entailment-cone text-to-image alignment scoring"};
  app.require_subcommand(1);
  std::string simd_choice = "auto";
  app.add_option("--simd", simd_choice, "Kernel backend: auto, scalar, avx2, neon")
      ->check(CLI::IsMember({"auto", "scalar", "avx2", "neon"}));

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a planted synthetic embedding file");
  synth_cmd->add_option("--n", synth.n, "Number of samples")->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim, "Embedding dimension")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Uniform score noise half-width")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output HALN file")->required();

  TrainOptions tr;
  std::string seeds_text;
  std::string history_path, manifest_path, test_out;
  std::uint64_t single_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train on an embedding file");
  train_cmd->add_option("--data", tr.data, "Input HALN file")->required();
  train_cmd->add_option("--model", tr.model, "Output model file")->required();
  train_cmd->add_option("--out", history_path, "Per-epoch history CSV (default <model>.history.csv)");
  train_cmd->add_option("--manifest", manifest_path, "Run manifest JSON (default <model>.manifest.json)");
  train_cmd->add_option("--test-out", test_out, "Also write the held-out test split as HALN");
  auto* seed_opt = train_cmd->add_option("--seed", single_seed, "Split/initialization seed");
  train_cmd->add_option("--seeds", seeds_text, "Seed list: 1,2,3 or 1..10")->excludes(seed_opt);
  train_cmd->add_option("--train-fraction", tr.train_fraction)->capture_default_str();
  train_cmd->add_option("--val-fraction", tr.val_fraction)->capture_default_str();
  train_cmd->add_option("--curvature", tr.config.manifold.curvature)->capture_default_str();
  train_cmd->add_option("--k", tr.config.entailment.k)->capture_default_str();
  train_cmd->add_option("--contraction", tr.config.entailment.contraction)->capture_default_str();
  train_cmd->add_option("--lambda", tr.config.lambda)->capture_default_str();
  train_cmd->add_option("--lr", tr.config.lr)->capture_default_str();
  train_cmd->add_option("--wd", tr.config.weight_decay)->capture_default_str();
  train_cmd->add_option("--batch", tr.config.batch_size)->capture_default_str();
  train_cmd->add_option("--epochs", tr.config.max_epochs)->capture_default_str();
  train_cmd->add_option("--patience", tr.config.patience)->capture_default_str();
  train_cmd->add_option("--lr-step", tr.config.lr_step)->capture_default_str();
  train_cmd->add_option("--lr-gamma", tr.config.lr_gamma)->capture_default_str();

  EvalOptions ev;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Report SRCC/PLCC of a model on a data file");
  eval_cmd->add_option("--model", ev.model)->required();
  eval_cmd->add_option("--data", ev.data)->required();
  eval_cmd->add_option("--out", eval_out, "Optional CSV of index,score,prediction");

  ScoreOptions sc;
  auto* score_cmd = app.add_subcommand("score", "Write per-sample predictions");
  score_cmd->add_option("--model", sc.model)->required();
  score_cmd->add_option("--data", sc.data)->required();
  score_cmd->add_option("--out", sc.out)->required();

  ScoreOptions rp;
  auto* report_cmd = app.add_subcommand("report", "Write per-sample hyperbolic geometry CSV");
  report_cmd->add_option("--model", rp.model)->required();
  report_cmd->add_option("--data", rp.data)->required();
  report_cmd->add_option("--out", rp.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simd_choice != "auto") {
      const auto backend = simd_choice == "scalar" ? simd::Backend::kScalar
                           : simd_choice == "avx2" ? simd::Backend::kAvx2
                                                   : simd::Backend::kNeon;
      if (!simd::backend_available(backend)) {
        throw UsageError("SIMD backend '" + simd_choice + "' is not available on this machine");
      }
      simd::set_backend(backend);
    }

    if (synth_cmd->parsed()) {
      run_synth(synth);
    } else if (train_cmd->parsed()) {
      tr.seeds = seeds_text.empty() ? std::vector<std::uint64_t>{single_seed}
                                    : parse_seed_list(seeds_text);
      if (!history_path.empty()) tr.history = history_path;
      if (!manifest_path.empty()) tr.manifest = manifest_path;
      if (!test_out.empty()) tr.test_out = test_out;
      run_train(tr, out);
    } else if (eval_cmd->parsed()) {
      if (!eval_out.empty()) ev.out = eval_out;
      run_eval(ev, out);
    } else if (score_cmd->parsed()) {
      run_score(sc);
    } else if (report_cmd->parsed()) {
      run_report(rp);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace hyperalign::cli
