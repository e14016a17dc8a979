// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <CLI11.hpp>

#include "ltnn/commands.hpp"

namespace {

template <typename T>
void set_if(ltnn::KeyValues& kv, const char* key, const std::optional<T>& v) {
  if (!v) return;
  if constexpr (std::is_same_v<T, std::string>) {
    kv[key] = *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    kv[key] = *v ? "true" : "false";
  } else {
    kv[key] = std::to_string(*v);
  }
}

// Relative file paths in a config file are taken relative to that file.
ltnn::KeyValues resolve_paths(ltnn::KeyValues kv, const std::filesystem::path& config_file) {
  const auto base = config_file.parent_path();
  for (const char* key : {"dataset", "embeddings", "lexicon", "contractions", "out"}) {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) continue;
    std::filesystem::path p(it->second);
    if (p.is_relative()) it->second = (base / p).lexically_normal().string();
  }
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ltnn: long-tail hate speech classifiers (CNN+GRU, CNN+sCNN) and corpus analysis"};
  app.require_subcommand(1);

  // analyze
  ltnn::AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Uniqueness scores and their 11-bin distribution");
  analyze_cmd->add_option("--dataset", analyze.dataset, "CSV with header id,label,text")->required();
  analyze_cmd->add_option("--lexicon", analyze.lexicon, "Word frequency file for hashtag segmentation");
  analyze_cmd->add_option("--contractions", analyze.contractions, "Contraction table");
  analyze_cmd->add_option("--out", analyze.out, "Output directory")->required();

  // train
  std::string config_path;
  std::optional<std::string> dataset, embeddings, embeddings_format, lexicon, contractions, kind, non_hate, out;
  std::optional<std::string> second_pooling;
  std::optional<std::uint64_t> seed;
  std::optional<long long> k, epochs, batch, seq_len, emb_dim, filters;
  std::optional<bool> trainable;
  auto* train_cmd = app.add_subcommand("train", "k-fold cross-validated training");
  train_cmd->add_option("--config", config_path, "key = value run configuration file");
  train_cmd->add_option("--seed", seed, "Random seed (mandatory)");
  train_cmd->add_option("--out", out, "Output directory");
  train_cmd->add_option("--dataset", dataset);
  train_cmd->add_option("--embeddings", embeddings);
  train_cmd->add_option("--embeddings-format", embeddings_format, "word2vec-text | glove-text");
  train_cmd->add_option("--lexicon", lexicon);
  train_cmd->add_option("--contractions", contractions);
  train_cmd->add_option("--kind", kind, "base_cnn | cnn_gru | cnn_scnn");
  train_cmd->add_option("--non-hate-label", non_hate);
  train_cmd->add_option("--k", k);
  train_cmd->add_option("--epochs", epochs);
  train_cmd->add_option("--batch-size", batch);
  train_cmd->add_option("--seq-len", seq_len);
  train_cmd->add_option("--emb-dim", emb_dim);
  train_cmd->add_option("--filters", filters);
  train_cmd->add_option("--second-pooling", second_pooling, "auto | true | false");
  train_cmd->add_option("--trainable-embeddings", trainable);

  // evaluate
  ltnn::EvaluateOptions evaluate;
  std::optional<std::string> eval_non_hate;
  std::optional<std::size_t> eval_fold;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a saved fold model on a dataset");
  eval_cmd->add_option("--weights", evaluate.weights, "fold_<k>.ltnn written by train")->required();
  eval_cmd->add_option("--dataset", evaluate.dataset)->required();
  eval_cmd->add_option("--out", evaluate.out)->required();
  eval_cmd->add_option("--config", evaluate.run_config, "Run configuration (default: run.config beside the weights)");
  eval_cmd->add_option("--non-hate-label", eval_non_hate);
  eval_cmd->add_option("--folds", evaluate.folds, "folds.csv written by train");
  eval_cmd->add_option("--fold", eval_fold);
  eval_cmd->add_option("--split", evaluate.split, "test | train");
  eval_cmd->add_option("--seed", seed, "Accepted for symmetry; evaluation is deterministic");

  // compare
  ltnn::CompareOptions compare;
  auto* compare_cmd = app.add_subcommand("compare", "Additional true positives over uniqueness bins");
  compare_cmd->add_option("--dataset", compare.dataset, "Gold dataset")->required();
  compare_cmd->add_option("--pred-a", compare.pred_a, "Predictions of the method(s) under study")->required();
  compare_cmd->add_option("--pred-b", compare.pred_b, "Reference predictions")->required();
  compare_cmd->add_option("--lexicon", compare.lexicon);
  compare_cmd->add_option("--contractions", compare.contractions);
  compare_cmd->add_option("--out", compare.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ltnn::kExitUsage;
  }

  try {
    if (*analyze_cmd) {
      const auto report = ltnn::cmd_analyze(analyze);
      std::cout << "scored " << report.scores.size() << " tweets -> " << analyze.out.string() << "\n";
    } else if (*train_cmd) {
      ltnn::RunConfig run;
      if (!config_path.empty()) run.apply(resolve_paths(ltnn::read_key_values(config_path), config_path));
      ltnn::KeyValues overrides;
      set_if(overrides, "dataset", dataset);
      set_if(overrides, "embeddings", embeddings);
      set_if(overrides, "embeddings_format", embeddings_format);
      set_if(overrides, "lexicon", lexicon);
      set_if(overrides, "contractions", contractions);
      set_if(overrides, "kind", kind);
      set_if(overrides, "non_hate_label", non_hate);
      set_if(overrides, "out", out);
      set_if(overrides, "k", k);
      set_if(overrides, "epochs", epochs);
      set_if(overrides, "batch_size", batch);
      set_if(overrides, "seq_len", seq_len);
      set_if(overrides, "emb_dim", emb_dim);
      set_if(overrides, "filters", filters);
      set_if(overrides, "second_pooling", second_pooling);
      set_if(overrides, "trainable_embeddings", trainable);
      run.apply(overrides);
      // The seed must be given on the command line for every training run.
      run.seed = seed;
      const auto summary = ltnn::cmd_train(run);
      std::cout << "kind=" << ltnn::to_string(run.model.kind) << " parameters=" << summary.parameter_count
                << " macro_f1=" << summary.cv.average.macro.f1 << " macro_f1_hate=" << summary.cv.average.macro_hate.f1
                << " micro_f1=" << summary.cv.average.micro.f1 << "\n";
    } else if (*eval_cmd) {
      if (eval_non_hate) evaluate.non_hate_label = *eval_non_hate;
      evaluate.fold = eval_fold;
      const auto result = ltnn::cmd_evaluate(evaluate);
      std::cout << "evaluated " << result.predictions.size() << " tweets: micro_f1=" << result.report.micro.f1
                << " macro_f1=" << result.report.macro.f1 << "\n";
    } else if (*compare_cmd) {
      for (const auto& c : ltnn::cmd_compare(compare)) {
        std::cout << c.name << ": " << c.report.ids.size() << " additional true positives\n";
      }
    }
  } catch (const ltnn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ltnn::exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ltnn::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ltnn::kExitData;
  }
  return ltnn::kExitOk;
}
