#include "avexp/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "avexp/baseline.hpp"

namespace avexp {

namespace fs = std::filesystem;

SystemSpec parse_system(const std::string& text, double dropout_rate) {
  SystemSpec s;
  s.variant.dropout_rate = dropout_rate;
  if (text == "dictionary") {
    s.dictionary = true;
    return s;
  }
  if (text == "plain") return s;
  std::stringstream ss(text);
  std::string flag;
  while (std::getline(ss, flag, '+')) {
    if (flag == "vals") {
      s.variant.vals = true;
    } else if (flag == "drop") {
      s.variant.drop = true;
    } else if (flag == "mixing") {
      s.variant.mixing = true;
    } else {
      throw UsageError("unknown system flag '" + flag + "' in '" + text + "'");
    }
  }
  s.variant.validate();
  return s;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw UsageError("trials must be at least 1");
  if (!(train.learning_rate > 0.0)) throw UsageError("learning rate must be positive");
  train.validate();
  if (systems.empty()) throw UsageError("no systems to run");
  for (const auto& s : systems) parse_system(s, dropout_rate);
}

PreparedData prepare(const SplitDataset& split, std::size_t min_count,
                     std::size_t max_title) {
  PreparedData d;
  d.split = split;
  std::map<std::string, std::size_t> counts;
  for (const auto& t : split.train) {
    for (const auto& tok : tokenize(t.title)) ++counts[tok];
    for (const auto& tok : tokenize(t.attribute)) ++counts[tok];
    if (t.value) {
      for (const auto& tok : tokenize(*t.value)) ++counts[tok];
    }
  }
  d.vocab = build_vocab(counts, min_count);
  d.kb = build_kb(split.train);
  d.train = convert(split.train, max_title, 0);
  d.dev = convert(split.dev, max_title, split.train.size());
  d.test = convert(split.test, max_title, split.train.size() + split.dev.size());
  std::set<std::string> test_attrs;
  for (const auto& t : split.test) test_attrs.insert(t.attribute);
  d.profiles = profile_attributes(test_attrs, d.kb, split.train, HashedNgramEmbedder());
  bucketize(d.profiles);
  return d;
}

std::optional<TokenList> span_value(const Example& example, const Span& span) {
  if (span.is_null()) return std::nullopt;
  if (span.begin < 1 || span.end < span.begin || span.end > example.title_tokens.size()) {
    throw DataError("span out of range for example " + std::to_string(example.id));
  }
  return TokenList(example.title_tokens.begin() + static_cast<std::ptrdiff_t>(span.begin - 1),
                   example.title_tokens.begin() + static_cast<std::ptrdiff_t>(span.end));
}

std::vector<Prediction> predict_all(const SpanExtractor& model,
                                    const std::vector<Example>& examples,
                                    const KnowledgeBase& kb,
                                    const TrainingVariant& variant,
                                    const Vocabulary& vocab,
                                    const QueryBudget& budget) {
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    const auto input = build_eval_input(ex, kb, variant, vocab, budget);
    out.push_back({ex.id, span_value(ex, model.predict(input))});
  }
  return out;
}

std::vector<Prediction> dictionary_predict(const std::vector<Example>& examples,
                                           const KnowledgeBase& kb) {
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    out.push_back({ex.id, dictionary_extract(ex.title_tokens, ex.attribute, kb)});
  }
  return out;
}

SystemResult run_system(const PreparedData& data, const SystemSpec& system,
                        std::uint64_t model_seed, const ExperimentConfig& config) {
  SystemResult r;
  r.system = system.name();
  const ScoreOptions options{config.strict};
  if (system.dictionary) {
    r.predictions = dictionary_predict(data.test.examples, data.kb);
  } else {
    TrainConfig tc = config.train;
    tc.seed = model_seed;
    const auto& variant = system.variant;
    BatchSource source = [&](std::size_t epoch) {
      return make_epoch_batches(data.train.labeled, data.kb, variant, data.vocab,
                                tc.batch_size, model_seed, epoch, config.budget);
    };
    EpochScorer scorer;
    if (config.select_on_dev && !data.dev.examples.empty()) {
      scorer = [&](std::size_t, const PointerModelParams& params) {
        const PointerModel model(params);
        const auto preds = predict_all(model, data.dev.examples, data.kb, variant,
                                       data.vocab, config.budget);
        return score(data.dev.examples, preds, options).micro.f1;
      };
    }
    r.training = train(source, data.vocab.size(), tc, scorer);
    const PointerModel model(r.training->params);
    r.predictions = predict_all(model, data.test.examples, data.kb, variant,
                                data.vocab, config.budget);
  }
  r.report = evaluate(data.test.examples, r.predictions, data.kb, data.profiles, options);
  return r;
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions) {
  for (const auto& p : predictions) {
    nlohmann::ordered_json j;
    j["id"] = p.example_id;
    j["value"] = p.value ? nlohmann::ordered_json(detokenize(*p.value)) : nullptr;
    out << j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace)
        << '\n';
  }
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Prediction p;
      p.example_id = j.at("id").get<std::size_t>();
      if (!j.at("value").is_null()) {
        p.value = tokenize(j.at("value").get<std::string>());
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("predictions: ") + e.what());
    }
  }
  return out;
}

std::string stats_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["tuples"] = s.tuples;
  j["tuples_with_null"] = s.null_tuples;
  j["unique_attribute_value_pairs"] = s.attribute_value_pairs;
  j["unique_attributes"] = s.attributes;
  j["unique_values"] = s.values;
  return j.dump(2);
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd m;
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

std::vector<CleanTuple> load_corpus(const std::string& path) {
  return clean_corpus(read_raw_file(path)).tuples;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a(ss.str()));
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["systems"] = c.systems;
  j["dropout_rate"] = c.dropout_rate;
  j["max_title"] = c.budget.max_title;
  j["plain_query"] = c.budget.plain_query;
  j["expanded_query"] = c.budget.expanded_query;
  j["trials"] = c.trials;
  j["learning_rate"] = c.train.learning_rate;
  j["epochs"] = c.train.epochs;
  j["batch_size"] = c.train.batch_size;
  j["dim"] = c.train.dim;
  j["min_count"] = c.min_count;
  j["stratified"] = c.stratified;
  j["strict"] = c.strict;
  j["select_on_dev"] = c.select_on_dev;
  return j;
}

// Metrics that get a mean/std line in the summary.
std::vector<std::pair<std::string, double>> summary_metrics(const EvalReport& r) {
  std::vector<std::pair<std::string, double>> m = {
      {"macro_f1", r.overall.macro.f1},
      {"micro_f1", r.overall.micro.f1},
  };
  for (const auto& [name, s] : r.categories) {
    m.emplace_back(name + "/macro_f1", s.macro.f1);
    m.emplace_back(name + "/micro_f1", s.micro.f1);
  }
  for (const auto& [name, s] : r.buckets) {
    m.emplace_back(name + "/macro_f1", s.macro.f1);
    m.emplace_back(name + "/micro_f1", s.micro.f1);
  }
  return m;
}

SystemResult load_finished(const fs::path& dir, const std::string& system,
                           const PreparedData& data, const ExperimentConfig& config) {
  std::ifstream in(dir / "predictions.jsonl");
  SystemResult r;
  r.system = system;
  r.predictions = read_predictions(in);
  r.report = evaluate(data.test.examples, r.predictions, data.kb, data.profiles,
                      ScoreOptions{config.strict});
  return r;
}

}  // namespace

std::vector<std::vector<SystemResult>> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const fs::path work(config.work_dir);
  fs::create_directories(work);

  const auto tuples = load_corpus(config.input);
  const auto split_data = split(tuples, config.seed, config.stratified);
  const PreparedData data = prepare(split_data, config.min_count, config.budget.max_title);

  nlohmann::ordered_json manifest;
  manifest["command"] = "run";
  manifest["version"] = kVersion;
  manifest["inputs"] = {{config.input, file_hash(config.input)}};
  manifest["config"] = config_json(config);
  manifest["split"] = {{"train", split_data.train.size()},
                       {"dev", split_data.dev.size()},
                       {"test", split_data.test.size()}};
  manifest["test_drops"] = nlohmann::ordered_json::parse(drop_report_json(data.test.report));
  write_text(work / "manifest.json", manifest.dump(2) + "\n");
  data.kb.save((work / "kb.jsonl").string());
  data.vocab.save((work / "vocab.txt").string());

  std::vector<std::vector<SystemResult>> results;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const std::uint64_t model_seed = derive_seed(config.seed, t);
    results.emplace_back();
    for (const auto& name : config.systems) {
      const SystemSpec system = parse_system(name, config.dropout_rate);
      const fs::path dir = work / ("trial-" + std::to_string(t)) / system.name();
      fs::create_directories(dir);
      if (config.resume && fs::exists(dir / "done")) {
        results.back().push_back(load_finished(dir, system.name(), data, config));
        continue;
      }
      SystemResult r = run_system(data, system, model_seed, config);
      {
        std::ofstream out(dir / "predictions.jsonl", std::ios::binary);
        write_predictions(out, r.predictions);
      }
      write_text(dir / "report.json", report_to_json(r.report) + "\n");
      {
        std::ostringstream table;
        print_report(table, r.report);
        write_text(dir / "report.txt", table.str());
      }
      if (r.training) {
        nlohmann::ordered_json lj;
        lj["epoch_loss"] = r.training->epoch_loss;
        lj["best_epoch"] = r.training->best_epoch;
        write_text(dir / "training.json", lj.dump(2) + "\n");
        save_params((dir / "model.bin").string(), r.training->params,
                    data.vocab.fingerprint());
      }
      write_text(dir / "done", "");
      results.back().push_back(std::move(r));
    }
  }

  nlohmann::ordered_json summary;
  std::ostringstream text;
  for (std::size_t s = 0; s < config.systems.size(); ++s) {
    const std::string& name = results.front()[s].system;
    std::map<std::string, std::vector<double>> series;
    std::vector<std::string> order;
    for (const auto& trial : results) {
      for (const auto& [metric, value] : summary_metrics(trial[s].report)) {
        if (!series.count(metric)) order.push_back(metric);
        series[metric].push_back(value);
      }
    }
    auto& sj = summary[name] = nlohmann::ordered_json::object();
    text << name << '\n';
    for (const auto& metric : order) {
      const MeanStd ms = mean_std(series[metric]);
      sj[metric] = {{"mean", ms.mean}, {"std", ms.stddev}, {"trials", series[metric]}};
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-40s %6.2f (%.2f)\n", metric.c_str(),
                    100.0 * ms.mean, 100.0 * ms.stddev);
      text << buf;
    }
  }
  write_text(work / "summary.json", summary.dump(2) + "\n");
  write_text(work / "summary.txt", text.str());
  return results;
}

}  // namespace avexp
