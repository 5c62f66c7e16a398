#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctrlsum/checkpoint.hpp"
#include "ctrlsum/error.hpp"
#include "ctrlsum/evaluation.hpp"

namespace ctrlsum::cli {
namespace fs = std::filesystem;

namespace {

struct Dataset {
  Vocabulary vocab;
  BinTable table;
  std::vector<CorpusSample> samples;
};

Dataset load_split(const fs::path& dir, const std::string& split) {
  Dataset d;
  d.vocab = vocabulary_from_json(read_text_file(dir / "vocab.json"));
  d.table = bin_table_from_json(read_text_file(dir / "bins.json"));
  d.samples = read_jsonl(dir / (split + ".jsonl"), d.vocab);
  if (d.samples.empty()) throw DataError((dir / (split + ".jsonl")).string() + " holds no samples");
  return d;
}

void prepare_out(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw ConfigError("cannot create output directory " + config.out.string() + ": " + ec.message());
  write_text_file(config.out / "config.json", config_to_json(config));
}

Checkpoint load_for(const RunConfig& config, const Vocabulary& vocab) {
  auto c = load_checkpoint(*config.checkpoint);
  if (c.task != config.task) {
    throw ConfigError("checkpoint task " + std::string(to_string(c.task)) + " does not match config task " +
                      std::string(to_string(config.task)));
  }
  if (!(c.vocab == vocab)) throw DataError("checkpoint vocabulary differs from the corpus vocabulary");
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void gen_corpus(const RunConfig& config, std::ostream& log) {
  prepare_out(config);
  auto corpus = generate_corpus(config.corpus, config.seed);
  const auto train_end = corpus.samples.begin() + config.train_samples;
  const auto valid_end = train_end + config.valid_samples;
  std::vector<CorpusSample> train(corpus.samples.begin(), train_end);
  std::vector<CorpusSample> valid(train_end, valid_end);
  std::vector<CorpusSample> test(valid_end, corpus.samples.end());

  const auto table = build_length_bins(train, "train");
  for (auto* split : {&train, &valid, &test}) assign_length_bins(*split, table);

  write_text_file(config.out / "vocab.json", vocabulary_to_json(corpus.vocab));
  write_text_file(config.out / "bins.json", bin_table_to_json(table));
  write_jsonl(config.out / "train.jsonl", corpus.vocab, train);
  write_jsonl(config.out / "valid.jsonl", corpus.vocab, valid);
  write_jsonl(config.out / "test.jsonl", corpus.vocab, test);
  log << "wrote " << train.size() << " train, " << valid.size() << " valid, " << test.size()
      << " test samples to " << config.out.string() << " (vocabulary " << corpus.vocab.size() << ")\n";
}

void train(const RunConfig& config, std::ostream& log) {
  prepare_out(config);
  const auto data = load_split(config.data, "train");
  const auto samples = prepare_task_samples(config.task, data.samples, data.table);
  if (samples.empty()) throw DataError("no training samples usable for task " + std::string(to_string(config.task)));

  Checkpoint ckpt;
  ckpt.task = config.task;
  ckpt.vocab = data.vocab;
  ckpt.bin_table = data.table;
  std::optional<LagrangianState> resume;
  if (config.checkpoint) {
    const auto loaded = load_for(config, data.vocab);
    ckpt.params = loaded.params;
    if (loaded.mode == "cmdp" && config.training.mode == TrainMode::kCmdp) resume = LagrangianState{loaded.lambda};
  } else {
    ckpt.params = PolicyParams::random(config.dims(static_cast<int>(data.vocab.size())), config.seed, config.init_scale);
  }
  ckpt.mode = std::string(to_string(config.training.mode));

  const auto start = std::chrono::steady_clock::now();
  if (config.training.mode == TrainMode::kMl) {
    const auto result = ml_pretrain(ckpt.params, samples, config.training);
    std::ostringstream csv;
    csv.precision(17);
    csv << "epoch,mean_loglik\n";
    for (std::size_t e = 0; e < result.epoch_loglik.size(); ++e) csv << e + 1 << ',' << result.epoch_loglik[e] << '\n';
    write_text_file(config.out / "ml_trace.csv", csv.str());
    ckpt.iteration = config.training.ml_epochs;
    log << "ml: " << config.training.ml_epochs << " epochs over " << samples.size() << " samples";
    if (!result.epoch_loglik.empty()) log << ", final mean log-likelihood " << result.epoch_loglik.back();
  } else {
    const Environment env{CostContext{&data.vocab, &data.table, config.oracle}, ConstraintSet::for_task(config.task)};
    std::optional<MdpWeights> weights;
    if (config.training.mode == TrainMode::kMdp) weights = config.weights();

    std::ofstream trace(config.out / "trace.csv", std::ios::binary);
    if (!trace) throw DataError("cannot write " + (config.out / "trace.csv").string());
    trace.precision(17);
    trace << trace_csv_header(env.set.size()) << '\n';
    const auto result = ctrlsum::train(ckpt.params, samples, env, config.training, weights, resume,
                                       [&](const TraceRecord& r) { trace << trace_csv_row(r) << '\n' << std::flush; });
    ckpt.iteration = config.training.iterations;
    if (config.training.mode == TrainMode::kCmdp) ckpt.lambda = result.lambda.lambda;
    log << to_string(config.training.mode) << ": " << config.training.iterations << " updates";
    if (!result.trace.records.empty()) log << ", final mean reward " << result.trace.records.back().mean_reward;
  }
  save_checkpoint(config.out / "checkpoint.json", ckpt);
  log << " (" << seconds_since(start) << " s)\n";
}

namespace {

std::vector<GeneratedRecord> decode_split(const RunConfig& config, const Dataset& data, Environment& env,
                                          std::vector<TaskSample>& samples) {
  if (!config.checkpoint) throw ConfigError("this command needs --checkpoint");
  const auto ckpt = load_for(config, data.vocab);
  EvaluationOptions options;
  options.all_length_bins = config.all_length_bins;
  options.max_len = config.training.max_len;
  return generate_records(ckpt.params, env, samples, options);
}

nlohmann::json request_json(const Vocabulary& vocab, const ControlRequest& r) {
  nlohmann::json j;
  j["task"] = std::string(to_string(r.task()));
  if (r.task() == Task::kEntity) {
    std::vector<std::string> names;
    for (const TokenId e : r.entity_list()) names.push_back(vocab.token(e));
    j["entities"] = names;
  } else {
    j["bin"] = r.bin();
  }
  return j;
}

}  // namespace

void generate(const RunConfig& config, std::ostream& log) {
  prepare_out(config);
  const auto data = load_split(config.data, config.split);
  Environment env{CostContext{&data.vocab, &data.table, config.oracle}, ConstraintSet::for_task(config.task)};
  auto samples = prepare_task_samples(config.task, data.samples, data.table);
  const auto records = decode_split(config, data, env, samples);

  std::ostringstream out;
  for (const auto& r : records) {
    nlohmann::json j;
    j["id"] = r.sample_id;
    j["request"] = request_json(data.vocab, r.request);
    j["summary"] = data.vocab.decode(r.summary);
    j["length"] = r.summary.size();
    j["length_bin"] = r.length_bin;
    j["abs_bin"] = r.abs_bin;
    std::vector<std::string> appeared;
    for (const TokenId e : r.appeared) appeared.push_back(data.vocab.token(e));
    j["appeared"] = appeared;
    j["costs"] = r.costs;
    j["satisfied"] = r.satisfied;
    out << j.dump() << '\n';
  }
  write_text_file(config.out / "generations.jsonl", out.str());
  log << "wrote " << records.size() << " generations to " << (config.out / "generations.jsonl").string() << '\n';
}

void evaluate(const RunConfig& config, std::ostream& log) {
  prepare_out(config);
  const auto data = load_split(config.data, config.split);
  Environment env{CostContext{&data.vocab, &data.table, config.oracle}, ConstraintSet::for_task(config.task)};
  auto samples = prepare_task_samples(config.task, data.samples, data.table);
  const auto records = decode_split(config, data, env, samples);
  const auto report = summarize(config.task, records, env.set.size());
  write_text_file(config.out / "report.csv", report.to_csv());
  write_text_file(config.out / "report.txt", report.to_text());
  log << report.to_text();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained policy-gradient training for controllable summarization"};
  app.name(args.empty() ? "ctrlsum" : args.front());
  app.require_subcommand(1);

  struct Flags {
    std::optional<std::string> config, task, out, data, checkpoint, split, mode;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
  } f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run configuration");
    sub->add_option("--seed", f.seed, "RNG seed");
    sub->add_option("--task", f.task, "length, entity, or abstractiveness");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--data", f.data, "corpus directory written by gen-corpus");
    sub->add_option("--checkpoint", f.checkpoint, "input checkpoint");
    sub->add_option("--split", f.split, "train, valid, or test");
    sub->add_option("--set", f.overrides, "override a config key, e.g. --set training.policy_lr=0.01");
  };
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
  auto* trn = app.add_subcommand("train", "ml pretraining or cmdp/mdp fine-tuning");
  auto* dec = app.add_subcommand("generate", "greedy decode a split");
  auto* ev = app.add_subcommand("evaluate", "report control metrics on a split");
  for (auto* sub : {gen, trn, dec, ev}) add_common(sub);
  trn->add_option("--mode", f.mode, "ml, cmdp, or mdp");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    std::vector<std::string> overrides = f.overrides;
    // Dedicated flags win over --set, which wins over the file.
    auto quoted = [](const std::string& v) { return nlohmann::json(v).dump(); };
    if (f.seed) overrides.push_back("seed=" + std::to_string(*f.seed));
    if (f.task) overrides.push_back("task=" + quoted(*f.task));
    if (f.out) overrides.push_back("out=" + quoted(*f.out));
    if (f.data) overrides.push_back("data=" + quoted(*f.data));
    if (f.checkpoint) overrides.push_back("checkpoint=" + quoted(*f.checkpoint));
    if (f.split) overrides.push_back("split=" + quoted(*f.split));
    if (f.mode) overrides.push_back("training.mode=" + quoted(*f.mode));
    const auto config = resolve_config(f.config ? std::optional<fs::path>(*f.config) : std::nullopt, overrides);

    if (gen->parsed()) gen_corpus(config, out);
    if (trn->parsed()) train(config, out);
    if (dec->parsed()) generate(config, out);
    if (ev->parsed()) evaluate(config, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace ctrlsum::cli
