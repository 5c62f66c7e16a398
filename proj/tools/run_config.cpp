#include "run_config.hpp"

#include <set>

#include <json.hpp>

#include "ctrlsum/corpus.hpp"
#include "ctrlsum/error.hpp"

namespace ctrlsum::cli {
namespace {

using nlohmann::json;

// Pulls typed fields out of one JSON object and remembers which keys were
// seen, so leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& field) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      field = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key " + name(key) + " has the wrong type");
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& field) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      field.reset();
      return;
    }
    T value{};
    read(key, value);
    field = std::move(value);
  }

  Section child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, name(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown config key " + name(key.c_str()));
    }
  }

 private:
  std::string name(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }
  std::string label() const { return path_.empty() ? std::string("config") : "config key " + path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

}  // namespace

void RunConfig::validate() const {
  corpus.validate();
  training.validate();
  oracle.validate();
  if (train_samples < 10) throw ConfigError("corpus.train_samples must be >= 10");
  if (valid_samples < 0 || test_samples < 1) throw ConfigError("corpus split sizes must be non-negative, test >= 1");
  if (split != "train" && split != "valid" && split != "test") {
    throw ConfigError("split must be train, valid, or test");
  }
  if (init_scale < 0.0) throw ConfigError("policy.init_scale must be >= 0");
  if (task == Task::kEntity && embed != control) {
    throw ConfigError("entity control uses token embeddings as the control vector; policy.embed must equal policy.control");
  }
  if (mdp_gamma) weights().validate(ConstraintSet::for_task(task));
}

PolicyDims RunConfig::dims(int vocab_size) const {
  PolicyDims d;
  d.vocab = vocab_size;
  d.embed = embed;
  d.control = control;
  d.hidden = hidden;
  d.validate();
  return d;
}

MdpWeights RunConfig::weights() const {
  return mdp_gamma ? MdpWeights{*mdp_gamma} : MdpWeights::reported(task);
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["task"] = std::string(to_string(c.task));
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  j["data"] = c.data.string();
  j["checkpoint"] = c.checkpoint ? json(c.checkpoint->string()) : json(nullptr);
  j["split"] = c.split;

  const auto& s = c.corpus;
  j["corpus"] = {{"train_samples", c.train_samples},
                 {"valid_samples", c.valid_samples},
                 {"test_samples", c.test_samples},
                 {"num_entities", s.num_entities},
                 {"num_words", s.num_words},
                 {"num_paraphrases", s.num_paraphrases},
                 {"synonyms_per_word", s.synonyms_per_word},
                 {"minimal_substitution", s.minimal_substitution},
                 {"num_templates", s.num_templates},
                 {"template_min_words", s.template_min_words},
                 {"template_max_words", s.template_max_words},
                 {"conjunction_templates", s.conjunction_templates},
                 {"entity_free_templates", s.entity_free_templates},
                 {"two_entity_templates", s.two_entity_templates},
                 {"doc_min_sentences", s.doc_min_sentences},
                 {"doc_max_sentences", s.doc_max_sentences},
                 {"doc_entities", s.doc_entities},
                 {"entity_types", s.entity_types},
                 {"canonical_order", s.canonical_order},
                 {"ref_min_sentences", s.ref_min_sentences},
                 {"ref_max_sentences", s.ref_max_sentences},
                 {"abs_mix", s.abs_mix}};
  j["policy"] = {{"embed", c.embed}, {"control", c.control}, {"hidden", c.hidden}, {"init_scale", c.init_scale}};

  const auto& t = c.training;
  j["training"] = {{"mode", std::string(to_string(t.mode))},
                   {"policy_lr", t.policy_lr},
                   {"ml_lr", t.ml_lr},
                   {"lambda_lr", t.lambda_lr},
                   {"lambda_init", t.lambda_init},
                   {"clip_norm", t.clip_norm},
                   {"batch_size", t.batch_size},
                   {"iterations", t.iterations},
                   {"ml_epochs", t.ml_epochs},
                   {"checkpoint_interval", t.checkpoint_interval},
                   {"max_len", t.max_len}};
  j["mdp_gamma"] = c.mdp_gamma ? json(*c.mdp_gamma) : json(nullptr);
  j["oracle"] = {{"window", c.oracle.window}, {"min_score", c.oracle.min_score}};
  j["evaluation"] = {{"all_length_bins", c.all_length_bins}};
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(j, "");

  std::string task = std::string(to_string(c.task));
  root.read("task", task);
  c.task = task_from_string(task);
  root.read("seed", c.seed);
  std::string out = c.out.string();
  std::string data = c.data.string();
  std::optional<std::string> checkpoint;
  root.read("out", out);
  root.read("data", data);
  root.read_optional("checkpoint", checkpoint);
  root.read("split", c.split);
  c.out = out;
  c.data = data;
  if (checkpoint) c.checkpoint = *checkpoint;

  {
    auto s = root.child("corpus");
    s.read("train_samples", c.train_samples);
    s.read("valid_samples", c.valid_samples);
    s.read("test_samples", c.test_samples);
    auto& k = c.corpus;
    s.read("num_entities", k.num_entities);
    s.read("num_words", k.num_words);
    s.read("num_paraphrases", k.num_paraphrases);
    s.read("synonyms_per_word", k.synonyms_per_word);
    s.read("minimal_substitution", k.minimal_substitution);
    s.read("num_templates", k.num_templates);
    s.read("template_min_words", k.template_min_words);
    s.read("template_max_words", k.template_max_words);
    s.read("conjunction_templates", k.conjunction_templates);
    s.read("entity_free_templates", k.entity_free_templates);
    s.read("two_entity_templates", k.two_entity_templates);
    s.read("doc_min_sentences", k.doc_min_sentences);
    s.read("doc_max_sentences", k.doc_max_sentences);
    s.read("doc_entities", k.doc_entities);
    s.read("entity_types", k.entity_types);
    s.read("canonical_order", k.canonical_order);
    s.read("ref_min_sentences", k.ref_min_sentences);
    s.read("ref_max_sentences", k.ref_max_sentences);
    s.read("abs_mix", k.abs_mix);
    s.finish();
    k.num_samples = c.train_samples + c.valid_samples + c.test_samples;
  }
  {
    auto s = root.child("policy");
    s.read("embed", c.embed);
    s.read("control", c.control);
    s.read("hidden", c.hidden);
    s.read("init_scale", c.init_scale);
    s.finish();
  }
  {
    auto s = root.child("training");
    auto& t = c.training;
    std::string mode = std::string(to_string(t.mode));
    s.read("mode", mode);
    t.mode = train_mode_from_string(mode);
    s.read("policy_lr", t.policy_lr);
    s.read("ml_lr", t.ml_lr);
    s.read("lambda_lr", t.lambda_lr);
    s.read("lambda_init", t.lambda_init);
    s.read("clip_norm", t.clip_norm);
    s.read("batch_size", t.batch_size);
    s.read("iterations", t.iterations);
    s.read("ml_epochs", t.ml_epochs);
    s.read("checkpoint_interval", t.checkpoint_interval);
    s.read("max_len", t.max_len);
    s.finish();
  }
  root.read_optional("mdp_gamma", c.mdp_gamma);
  {
    auto s = root.child("oracle");
    s.read("window", c.oracle.window);
    s.read("min_score", c.oracle.min_score);
    s.finish();
  }
  {
    auto s = root.child("evaluation");
    s.read("all_length_bins", c.all_length_bins);
    s.finish();
  }
  root.finish();

  c.training.task = c.task;
  c.training.seed = c.seed;
  c.validate();
  return c;
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (path) {
    std::string text;
    try {
      text = read_text_file(*path);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(path->string() + ": not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path->string() + ": top level must be an object");
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq);
    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
      if (dot == std::string::npos) {
        (*node)[part] = parse_value(o.substr(eq + 1));
        break;
      }
      json& next = (*node)[part];
      if (next.is_null()) next = json::object();
      if (!next.is_object()) throw ConfigError("override key '" + key + "' descends into a non-object");
      node = &next;
      start = dot + 1;
    }
  }
  return config_from_json(j.dump());
}

}  // namespace ctrlsum::cli
