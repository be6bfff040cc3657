// avexp: knowledge-driven query expansion for attribute value extraction.
//
// Subcommands cover each pipeline stage (clean, split, build-kb, convert,
// train, predict, evaluate, analyze), the synthetic corpus generator and the
// end-to-end experiment runner. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 training divergence.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "avexp/baseline.hpp"
#include "avexp/corpus.hpp"
#include "avexp/eval.hpp"
#include "avexp/knowledge.hpp"
#include "avexp/model.hpp"
#include "avexp/pipeline.hpp"
#include "avexp/querybuild.hpp"
#include "avexp/spanlabel.hpp"
#include "avexp/synth.hpp"
#include "avexp/tokenize.hpp"

namespace fs = std::filesystem;
using namespace avexp;

namespace {

std::ofstream open_out(const std::string& path) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

// Writes <output>.manifest.json recording inputs, their hashes and the config.
void write_manifest(const std::string& output, const std::string& command,
                    const std::vector<std::string>& inputs,
                    const nlohmann::ordered_json& config) {
  nlohmann::ordered_json m;
  m["command"] = command;
  m["version"] = kVersion;
  auto& in = m["inputs"] = nlohmann::ordered_json::object();
  for (const auto& path : inputs) in[path] = file_hash(path);
  m["config"] = config;
  write_text(output + ".manifest.json", m.dump(2) + "\n");
}

std::string resolve_work_dir(const std::string& flag) {
  if (const char* env = std::getenv("AVEXP_WORK_DIR"); env && *env) return env;
  return flag;
}

struct TrainFlags {
  std::string system = "vals+drop+mixing";
  double rate = kDefaultDropoutRate;
  TrainConfig train;
  std::size_t plain_query = 32;
  std::size_t expanded_query = 192;
  std::size_t max_title = kDefaultMaxTitleTokens;

  QueryBudget budget() const { return {max_title, plain_query, expanded_query}; }
};

void add_budget_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--max-title", f.max_title, "Max title tokens")->capture_default_str();
  cmd->add_option("--plain-query", f.plain_query, "Query budget without values")
      ->capture_default_str();
  cmd->add_option("--expanded-query", f.expanded_query, "Query budget with values")
      ->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"Knowledge-driven query expansion for QA-based attribute value extraction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // clean
  std::string clean_in, clean_out, clean_stats;
  auto* clean = app.add_subcommand("clean", "Decode, normalize and deduplicate raw tuples");
  clean->add_option("--input", clean_in, "Raw TSV/JSONL")->required();
  clean->add_option("--output", clean_out, "Cleaned JSONL")->required();
  clean->add_option("--stats", clean_stats, "Statistics JSON (default <output>.stats.json)");

  // split
  std::string split_in, split_dir;
  std::uint64_t split_seed = 1;
  bool split_stratified = false;
  auto* split_cmd = app.add_subcommand("split", "Seeded 7:1:2 train/dev/test split");
  split_cmd->add_option("--input", split_in, "Cleaned JSONL")->required();
  split_cmd->add_option("--out-dir", split_dir, "Directory for train/dev/test.jsonl")->required();
  split_cmd->add_option("--seed", split_seed)->capture_default_str();
  split_cmd->add_flag("--stratified", split_stratified, "Deal attributes round-robin");

  // build-kb
  std::string kb_train, kb_extra, kb_out;
  auto* build_kb_cmd = app.add_subcommand("build-kb", "Attribute -> seen values knowledge base");
  build_kb_cmd->add_option("--train", kb_train, "Training JSONL")->required();
  build_kb_cmd->add_option("--extra", kb_extra, "Extra tuples merged in (e.g. dev)");
  build_kb_cmd->add_option("--output", kb_out, "KB JSONL")->required();

  // convert
  std::string conv_in, conv_out, conv_drops;
  std::size_t conv_max_title = kDefaultMaxTitleTokens;
  auto* convert_cmd = app.add_subcommand("convert", "Tuples to (begin, end) labeled examples");
  convert_cmd->add_option("--input", conv_in, "Cleaned JSONL")->required();
  convert_cmd->add_option("--output", conv_out, "Labeled JSONL")->required();
  convert_cmd->add_option("--drop-report", conv_drops, "Drop report JSON");
  convert_cmd->add_option("--max-title", conv_max_title)->capture_default_str();

  // train
  TrainFlags tf;
  std::string tr_train, tr_dev, tr_kb, tr_dir;
  std::size_t tr_min_count = 1;
  auto* train_cmd = app.add_subcommand("train", "Train the pointer model");
  train_cmd->add_option("--train", tr_train, "Training JSONL")->required();
  train_cmd->add_option("--dev", tr_dev, "Dev JSONL for epoch selection");
  train_cmd->add_option("--kb", tr_kb, "KB JSONL (default: built from --train)");
  train_cmd->add_option("--out-dir", tr_dir, "Model directory")->required();
  train_cmd->add_option("--system", tf.system, "plain | vals[+drop][+mixing]")->capture_default_str();
  train_cmd->add_option("--dropout-rate", tf.rate)->capture_default_str();
  train_cmd->add_option("--lr", tf.train.learning_rate)->capture_default_str();
  train_cmd->add_option("--epochs", tf.train.epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", tf.train.batch_size)->capture_default_str();
  train_cmd->add_option("--dim", tf.train.dim)->capture_default_str();
  train_cmd->add_option("--seed", tf.train.seed)->capture_default_str();
  train_cmd->add_option("--min-count", tr_min_count)->capture_default_str();
  add_budget_flags(train_cmd, tf);

  // predict
  TrainFlags pf;
  std::string pr_model, pr_in, pr_kb, pr_out, pr_dump;
  auto* predict_cmd = app.add_subcommand("predict", "Predict values for tuples");
  predict_cmd->add_option("--model-dir", pr_model, "Directory written by train");
  predict_cmd->add_option("--input", pr_in, "Cleaned JSONL")->required();
  predict_cmd->add_option("--kb", pr_kb, "KB JSONL")->required();
  predict_cmd->add_option("--output", pr_out, "Predictions JSONL")->required();
  predict_cmd->add_option("--system", pf.system, "dictionary | plain | vals[+drop][+mixing]")
      ->capture_default_str();
  predict_cmd->add_option("--dump-inputs", pr_dump, "Write encoded inputs with roles");
  add_budget_flags(predict_cmd, pf);

  // evaluate
  std::string ev_gold, ev_pred, ev_train, ev_out;
  bool ev_strict = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Exact-match P/R/F1 with breakdowns");
  evaluate_cmd->add_option("--gold", ev_gold, "Test JSONL")->required();
  evaluate_cmd->add_option("--predictions", ev_pred, "Predictions JSONL")->required();
  evaluate_cmd->add_option("--train", ev_train, "Training JSONL")->required();
  evaluate_cmd->add_option("--output", ev_out, "Report JSON (text table on stdout)");
  evaluate_cmd->add_flag("--strict", ev_strict, "NULL predictions on non-NULL golds count as attempts");

  // analyze
  std::string an_train, an_test, an_out;
  auto* analyze_cmd = app.add_subcommand("analyze", "Attribute frequency/ambiguity profiles");
  analyze_cmd->add_option("--train", an_train, "Training JSONL")->required();
  analyze_cmd->add_option("--test", an_test, "Test JSONL")->required();
  analyze_cmd->add_option("--output", an_out, "Profiles CSV")->required();

  // synth
  SynthSpec ss;
  std::string sy_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic raw corpus");
  synth_cmd->add_option("--output", sy_out, "Raw TSV")->required();
  synth_cmd->add_option("--seed", ss.seed)->capture_default_str();
  synth_cmd->add_option("--tuples", ss.tuples)->capture_default_str();
  synth_cmd->add_option("--attributes", ss.attributes)->capture_default_str();
  synth_cmd->add_option("--value-vocab", ss.value_vocab)->capture_default_str();
  synth_cmd->add_option("--min-fillers", ss.min_title_fillers)->capture_default_str();
  synth_cmd->add_option("--max-fillers", ss.max_title_fillers)->capture_default_str();
  synth_cmd->add_option("--skew", ss.skew)->capture_default_str();
  synth_cmd->add_option("--value-skew", ss.value_skew)->capture_default_str();
  synth_cmd->add_option("--ambiguous-fraction", ss.ambiguous_fraction)->capture_default_str();
  synth_cmd->add_option("--null-fraction", ss.null_fraction)->capture_default_str();

  // run
  ExperimentConfig ec;
  std::string systems_csv = "dictionary,plain,vals,vals+drop+mixing";
  auto* run_cmd = app.add_subcommand("run", "Full pipeline over several trials");
  run_cmd->add_option("--input", ec.input, "Raw or cleaned corpus")->required();
  run_cmd->add_option("--work-dir", ec.work_dir, "Output directory (env AVEXP_WORK_DIR overrides)")
      ->default_val("work");
  run_cmd->add_option("--seed", ec.seed)->capture_default_str();
  run_cmd->add_option("--systems", systems_csv)->capture_default_str();
  run_cmd->add_option("--trials", ec.trials)->capture_default_str();
  run_cmd->add_option("--dropout-rate", ec.dropout_rate)->capture_default_str();
  run_cmd->add_option("--lr", ec.train.learning_rate)->capture_default_str();
  run_cmd->add_option("--epochs", ec.train.epochs)->capture_default_str();
  run_cmd->add_option("--batch-size", ec.train.batch_size)->capture_default_str();
  run_cmd->add_option("--dim", ec.train.dim)->capture_default_str();
  run_cmd->add_option("--min-count", ec.min_count)->capture_default_str();
  run_cmd->add_option("--max-title", ec.budget.max_title)->capture_default_str();
  run_cmd->add_option("--plain-query", ec.budget.plain_query)->capture_default_str();
  run_cmd->add_option("--expanded-query", ec.budget.expanded_query)->capture_default_str();
  run_cmd->add_flag("--stratified", ec.stratified);
  run_cmd->add_flag("--strict", ec.strict);
  run_cmd->add_flag("!--no-dev-selection", ec.select_on_dev, "Keep the last epoch");
  run_cmd->add_flag("--resume", ec.resume, "Skip finished trial/system pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (clean->parsed()) {
    const auto raw = read_raw_file(clean_in);
    const auto result = clean_corpus(raw);
    {
      auto out = open_out(clean_out);
      write_clean_jsonl(out, result.tuples);
    }
    const auto stats = compute_stats(result.tuples);
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(stats_json(stats));
    j["changes"] = {{"input", result.report.input},
                    {"changed_titles", result.report.changed_titles},
                    {"changed_attributes", result.report.changed_attributes},
                    {"changed_values", result.report.changed_values},
                    {"dropped_empty", result.report.dropped_empty},
                    {"duplicates_removed", result.report.duplicates},
                    {"total_changes", result.report.total_changes()}};
    write_text(clean_stats.empty() ? clean_out + ".stats.json" : clean_stats, j.dump(2) + "\n");
    write_manifest(clean_out, "clean", {clean_in}, nlohmann::ordered_json::object());
    std::cout << "tuples " << stats.tuples << ", with NULL " << stats.null_tuples
              << ", attributes " << stats.attributes << ", values " << stats.values
              << ", duplicates removed " << result.report.duplicates << ", changes "
              << result.report.total_changes() << '\n';
  } else if (split_cmd->parsed()) {
    const auto tuples = read_clean_file(split_in);
    const auto s = split(tuples, split_seed, split_stratified);
    fs::create_directories(split_dir);
    const fs::path dir(split_dir);
    write_clean_file((dir / "train.jsonl").string(), s.train);
    write_clean_file((dir / "dev.jsonl").string(), s.dev);
    write_clean_file((dir / "test.jsonl").string(), s.test);
    nlohmann::ordered_json m;
    m["seed"] = split_seed;
    m["stratified"] = split_stratified;
    for (auto [name, part] : {std::pair{"train", &s.train}, {"dev", &s.dev}, {"test", &s.test}}) {
      m["counts"][name] = nlohmann::ordered_json::parse(stats_json(compute_stats(*part)));
    }
    write_text((dir / "split_manifest.json").string(), m.dump(2) + "\n");
    write_manifest((dir / "split").string(), "split", {split_in}, {{"seed", split_seed}});
    std::cout << "train " << s.train.size() << ", dev " << s.dev.size() << ", test "
              << s.test.size() << '\n';
  } else if (build_kb_cmd->parsed()) {
    auto kb = build_kb(read_clean_file(kb_train));
    std::vector<std::string> inputs = {kb_train};
    if (!kb_extra.empty()) {
      kb = merge(kb, read_clean_file(kb_extra));
      inputs.push_back(kb_extra);
    }
    kb.save(kb_out);
    write_manifest(kb_out, "build-kb", inputs, {{"source", kb.source()}});
    std::cout << "attributes " << kb.entries().size() << ", attribute-value pairs "
              << kb.pair_count() << '\n';
  } else if (convert_cmd->parsed()) {
    const auto conv = convert(read_clean_file(conv_in), conv_max_title);
    {
      auto out = open_out(conv_out);
      write_labeled_jsonl(out, conv.labeled);
    }
    write_text(conv_drops.empty() ? conv_out + ".drops.json" : conv_drops,
               drop_report_json(conv.report) + "\n");
    write_manifest(conv_out, "convert", {conv_in}, {{"max_title", conv_max_title}});
    std::cout << "emitted " << conv.report.emitted << ", dropped " << conv.report.dropped()
              << '\n';
  } else if (train_cmd->parsed()) {
    const SystemSpec system = parse_system(tf.system, tf.rate);
    if (system.dictionary) throw UsageError("the dictionary baseline has nothing to train");
    if (!(tf.train.learning_rate > 0.0)) throw UsageError("learning rate must be positive");
    const auto train_tuples = read_clean_file(tr_train);
    SplitDataset sd;
    sd.train = train_tuples;
    if (!tr_dev.empty()) sd.dev = read_clean_file(tr_dev);
    PreparedData data = prepare(sd, tr_min_count, tf.max_title);
    if (!tr_kb.empty()) data.kb = KnowledgeBase::load(tr_kb);
    ExperimentConfig ec2;
    ec2.train = tf.train;
    ec2.budget = tf.budget();
    ec2.select_on_dev = !tr_dev.empty();
    data.test = data.dev;  // run_system scores on "test"; reuse dev here
    const auto r = run_system(data, system, tf.train.seed, ec2);
    fs::create_directories(tr_dir);
    const fs::path dir(tr_dir);
    data.vocab.save((dir / "vocab.txt").string());
    save_params((dir / "model.bin").string(), r.training->params, data.vocab.fingerprint());
    nlohmann::ordered_json meta;
    meta["system"] = system.name();
    meta["dropout_rate"] = tf.rate;
    meta["epoch_loss"] = r.training->epoch_loss;
    meta["best_epoch"] = r.training->best_epoch;
    write_text((dir / "training.json").string(), meta.dump(2) + "\n");
    std::vector<std::string> inputs = {tr_train};
    if (!tr_dev.empty()) inputs.push_back(tr_dev);
    write_manifest((dir / "model").string(), "train", inputs,
                   {{"system", system.name()},
                    {"lr", tf.train.learning_rate},
                    {"epochs", tf.train.epochs},
                    {"batch_size", tf.train.batch_size},
                    {"dim", tf.train.dim},
                    {"seed", tf.train.seed}});
    for (std::size_t e = 0; e < r.training->epoch_loss.size(); ++e) {
      std::cout << "epoch " << e << " loss " << r.training->epoch_loss[e] << '\n';
    }
  } else if (predict_cmd->parsed()) {
    const auto kb = KnowledgeBase::load(pr_kb);
    const auto tuples = read_clean_file(pr_in);
    std::vector<Example> examples;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      examples.push_back(to_example(tuples[i], i, pf.max_title));
    }
    const SystemSpec system = parse_system(pf.system, pf.rate);
    std::vector<Prediction> preds;
    if (system.dictionary) {
      preds = dictionary_predict(examples, kb);
    } else {
      if (pr_model.empty()) throw UsageError("--model-dir is required for model systems");
      const fs::path dir(pr_model);
      const auto vocab = Vocabulary::load((dir / "vocab.txt").string());
      const PointerModel model(load_params((dir / "model.bin").string(), vocab.fingerprint()));
      preds = predict_all(model, examples, kb, system.variant, vocab, pf.budget());
      if (!pr_dump.empty()) {
        auto out = open_out(pr_dump);
        for (const auto& ex : examples) {
          dump_input(out, build_eval_input(ex, kb, system.variant, vocab, pf.budget()), vocab);
        }
      }
    }
    {
      auto out = open_out(pr_out);
      write_predictions(out, preds);
    }
    write_manifest(pr_out, "predict", {pr_in, pr_kb}, {{"system", system.name()}});
  } else if (evaluate_cmd->parsed()) {
    const auto train_tuples = read_clean_file(ev_train);
    const auto test_tuples = read_clean_file(ev_gold);
    const auto kb = build_kb(train_tuples);
    std::vector<Example> golds;
    std::set<std::string> attrs;
    for (std::size_t i = 0; i < test_tuples.size(); ++i) {
      golds.push_back(to_example(test_tuples[i], i));
      attrs.insert(test_tuples[i].attribute);
    }
    auto profiles = profile_attributes(attrs, kb, train_tuples, HashedNgramEmbedder());
    bucketize(profiles);
    std::ifstream pin(ev_pred);
    if (!pin) throw DataError("cannot open " + ev_pred);
    const auto preds = read_predictions(pin);
    const auto report = evaluate(golds, preds, kb, profiles, ScoreOptions{ev_strict});
    print_report(std::cout, report);
    if (!ev_out.empty()) {
      write_text(ev_out, report_to_json(report) + "\n");
      write_manifest(ev_out, "evaluate", {ev_gold, ev_pred, ev_train}, {{"strict", ev_strict}});
    }
  } else if (analyze_cmd->parsed()) {
    const auto train_tuples = read_clean_file(an_train);
    const auto test_tuples = read_clean_file(an_test);
    const auto kb = build_kb(train_tuples);
    std::set<std::string> attrs;
    for (const auto& t : test_tuples) attrs.insert(t.attribute);
    auto profiles = profile_attributes(attrs, kb, train_tuples, HashedNgramEmbedder());
    const Medians m = bucketize(profiles);
    {
      auto out = open_out(an_out);
      write_profiles_csv(out, profiles);
    }
    write_manifest(an_out, "analyze", {an_train, an_test}, nlohmann::ordered_json::object());
    std::cout << "attributes " << profiles.size() << ", median train count "
              << m.train_count << ", median similarity " << m.ambiguity << '\n';
  } else if (synth_cmd->parsed()) {
    const auto corpus = generate_synthetic(ss);
    {
      auto out = open_out(sy_out);
      write_raw_tsv(out, corpus.tuples);
    }
    write_manifest(sy_out, "synth", {},
                   {{"seed", ss.seed},
                    {"tuples", ss.tuples},
                    {"attributes", ss.attributes},
                    {"value_vocab", ss.value_vocab},
                    {"skew", ss.skew},
                    {"value_skew", ss.value_skew},
                    {"ambiguous_fraction", ss.ambiguous_fraction},
                    {"null_fraction", ss.null_fraction}});
    std::cout << "tuples " << corpus.tuples.size() << '\n';
  } else if (run_cmd->parsed()) {
    ec.work_dir = resolve_work_dir(ec.work_dir);
    ec.systems.clear();
    std::stringstream list(systems_csv);
    for (std::string s; std::getline(list, s, ',');) {
      if (!s.empty()) ec.systems.push_back(s);
    }
    run_experiment(ec);
    std::ifstream summary(fs::path(ec.work_dir) / "summary.txt");
    std::cout << summary.rdbuf();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
