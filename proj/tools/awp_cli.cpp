// Command-line front end: dataset synthesis, training, evaluation,
// alignment dumps, and hyperparameter sweeps over one JSON config.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "awp/awp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  json j;
  f >> j;
  return j;
}

struct DataDir {
  awp::Vocabulary vocab;
  std::vector<awp::SynthUtterance> train_set;
  std::vector<awp::SynthUtterance> eval_set;
};

DataDir load_data(const fs::path& dir) {
  return {awp::Vocabulary::from_json(read_json(dir / "vocab.json")),
          awp::load_dataset((dir / "train.bin").string()),
          awp::load_dataset((dir / "eval.bin").string())};
}

int cmd_gen(const std::string& config_path, const std::string& out_dir) {
  awp::ExperimentConfig cfg = awp::ExperimentConfig::from_file(config_path);
  awp::Vocabulary v = awp::make_vocab(cfg.synth);
  auto train_set = awp::gen_dataset(cfg.synth, cfg.n_train, v, 0);
  auto eval_set = awp::gen_dataset(cfg.synth, cfg.n_eval, v, 1);
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "vocab.json", v.to_json().dump(2) + "\n");
  write_text(fs::path(out_dir) / "config.json", cfg.to_json().dump(2) + "\n");
  awp::save_dataset(train_set, (fs::path(out_dir) / "train.bin").string());
  awp::save_dataset(eval_set, (fs::path(out_dir) / "eval.bin").string());
  std::cout << "wrote " << train_set.size() << " train / " << eval_set.size()
            << " eval utterances to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir) {
  awp::ExperimentConfig cfg = awp::ExperimentConfig::from_file(config_path);
  DataDir data = load_data(data_dir);
  awp::WindowModel model = awp::make_model(cfg, data.vocab);
  awp::TrainResult tr =
      awp::train(data.train_set, data.eval_set, data.vocab, std::move(model),
                 cfg.awp, cfg.sampler, cfg.property, cfg.optimizer, cfg.train);
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "metrics.csv",
             awp::metrics_to_csv(tr.history));
  write_text(fs::path(out_dir) / "config.json", cfg.to_json().dump(2) + "\n");
  tr.state.model.save((fs::path(out_dir) / "model.bin").string());
  if (cfg.train.ema_decay > 0.0)
    tr.state.ema_model.save((fs::path(out_dir) / "model_ema.bin").string());
  if (!tr.history.empty()) {
    const awp::MetricsRecord& last = tr.history.back();
    std::cout << "final: step=" << last.step << " eval_wer=" << last.eval_wer
              << " dl_frames=" << last.dl_frames << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& run_dir, const std::string& data_dir,
             const std::string& ref_dir, bool use_beam) {
  DataDir data = load_data(data_dir);
  awp::ExperimentConfig cfg =
      awp::ExperimentConfig::from_json(read_json(fs::path(run_dir) / "config.json"));
  awp::WindowModel model =
      awp::WindowModel::load((fs::path(run_dir) / "model.bin").string());
  std::optional<awp::BeamConfig> beam;
  if (use_beam) beam = awp::BeamConfig{cfg.beam_width, 0.0, 0.0, {}, {}};
  awp::EvalMetrics m = awp::evaluate(model, data.eval_set, data.vocab, beam);

  json rep = {{"wer", m.wer},
              {"cer", m.cer},
              {"dl_frames_vs_truth", m.dl_frames},
              {"dl_ms_vs_truth", m.dl_ms},
              {"dcl_ms", m.dcl_ms},
              {"tl_ms", m.tl_ms},
              {"mean_frame_ctc_loss", m.mean_frame_ctc_loss},
              {"infeasible", m.infeasible}};

  if (!ref_dir.empty()) {
    awp::WindowModel ref =
        awp::WindowModel::load((fs::path(ref_dir) / "model.bin").string());
    double drift_sum = 0.0;
    long drift_n = 0;
    for (const awp::SynthUtterance& u : data.eval_set) {
      awp::LogProbMatrix m_ref = awp::forward(ref, u);
      awp::LogProbMatrix m_online = awp::forward(model, u);
      try {
        awp::LatencyReport lr = awp::measure_drift(
            m_ref, m_online, u.target, data.vocab.blank_id(), m.dcl_ms);
        drift_sum += lr.dl_frames * static_cast<double>(lr.per_token_drift.size());
        drift_n += static_cast<long>(lr.per_token_drift.size());
      } catch (const awp::InfeasibleTarget&) {
      }
    }
    double dl_frames = drift_n ? drift_sum / drift_n : 0.0;
    double frame_ms =
        data.eval_set.empty() ? 0.0 : data.eval_set.front().frame_duration_ms;
    rep["dl_frames_vs_ref"] = dl_frames;
    rep["dl_ms_vs_ref"] = dl_frames * frame_ms;
    rep["tl_ms_vs_ref"] = m.dcl_ms + dl_frames * frame_ms;
  }

  write_text(fs::path(run_dir) / "report.json", rep.dump(2) + "\n");
  std::string csv = "metric,value\n";
  for (const auto& [k, val] : rep.items())
    csv += k + "," + val.dump() + "\n";
  write_text(fs::path(run_dir) / "report.csv", csv);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_align(const std::string& run_dir, const std::string& data_dir,
              int utt) {
  DataDir data = load_data(data_dir);
  awp::WindowModel model =
      awp::WindowModel::load((fs::path(run_dir) / "model.bin").string());
  if (utt < 0 || utt >= static_cast<int>(data.eval_set.size()))
    throw std::runtime_error("align: utterance index out of range");
  const awp::SynthUtterance& u = data.eval_set[static_cast<std::size_t>(utt)];
  awp::LogProbMatrix m = awp::forward(model, u);
  awp::Alignment fa = awp::forced_align(m, u.target, data.vocab.blank_id());
  json j = {{"utt", utt},
            {"target_text", u.target_text},
            {"gt_emission", u.gt_emission},
            {"forced_alignment", fa},
            {"forced_alignment_text",
             awp::collapse_to_text(fa, data.vocab)},
            {"first_emission_frames",
             awp::first_emission_frames(fa, data.vocab.blank_id())},
            {"posteriors", m.to_json()}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::string& out_path) {
  awp::ExperimentConfig base = awp::ExperimentConfig::from_file(config_path);
  json grid = read_json(grid_path);
  std::vector<double> alphas =
      grid.value("alpha", std::vector<double>{base.awp.alpha});
  std::vector<double> start_epochs =
      grid.value("start_epoch", std::vector<double>{base.awp.start_epoch});
  std::vector<double> lambdas =
      grid.value("lambda", std::vector<double>{base.awp.lambda_margin});
  std::vector<std::uint64_t> seeds =
      grid.value("seeds", std::vector<std::uint64_t>{base.seed});

  std::string csv =
      "alpha,start_epoch,lambda,seed,eval_wer,eval_cer,dl_frames,dl_ms,tl_ms\n";
  for (double a : alphas)
    for (double se : start_epochs)
      for (double lm : lambdas)
        for (std::uint64_t seed : seeds) {
          awp::ExperimentConfig cfg = base;
          cfg.awp.alpha = a;
          cfg.awp.start_epoch = se;
          cfg.awp.lambda_margin = lm;
          cfg.seed = seed;
          cfg.derive_seeds();
          awp::RunResult run = awp::run_experiment(cfg);
          awp::EvalMetrics m = awp::evaluate(run.train_result.state.model,
                                             run.eval_set, run.vocab);
          char row[256];
          std::snprintf(row, sizeof(row),
                        "%.9g,%.9g,%.9g,%llu,%.9g,%.9g,%.9g,%.9g,%.9g\n", a,
                        se, lm, static_cast<unsigned long long>(seed), m.wer,
                        m.cer, m.dl_frames, m.dl_ms, m.tl_ms);
          csv += row;
          std::cout << "alpha=" << a << " start_epoch=" << se
                    << " lambda=" << lm << " seed=" << seed
                    << " wer=" << m.wer << " dl_frames=" << m.dl_frames
                    << "\n";
        }
  write_text(out_path, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CTC + Align-With-Purpose toolkit"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, run_dir, ref_dir, grid_path,
      sweep_out = "sweep.csv";
  int utt = 0;
  bool use_beam = false;

  auto* gen = app.add_subcommand("gen", "synthesize dataset splits");
  gen->add_option("--config", config_path)->required();
  gen->add_option("--out", out_dir)->required();

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", config_path)->required();
  train->add_option("--data", data_dir)->required();
  train->add_option("--out", out_dir)->required();

  auto* eval = app.add_subcommand("eval", "WER/CER/DL/TL report");
  eval->add_option("--run", run_dir)->required();
  eval->add_option("--data", data_dir)->required();
  eval->add_option("--ref", ref_dir, "reference (offline) run for DL");
  eval->add_flag("--beam", use_beam, "decode with prefix beam search");

  auto* align = app.add_subcommand("align", "dump forced alignment");
  align->add_option("--run", run_dir)->required();
  align->add_option("--data", data_dir)->required();
  align->add_option("--utt", utt)->required();

  auto* sweep = app.add_subcommand("sweep", "alpha/start-epoch/lambda grid");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--grid", grid_path)->required();
  sweep->add_option("--out", sweep_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(config_path, out_dir);
    if (train->parsed()) return cmd_train(config_path, data_dir, out_dir);
    if (eval->parsed()) return cmd_eval(run_dir, data_dir, ref_dir, use_beam);
    if (align->parsed()) return cmd_align(run_dir, data_dir, utt);
    if (sweep->parsed()) return cmd_sweep(config_path, grid_path, sweep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
