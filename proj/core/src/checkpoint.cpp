#include "ctrlsum/checkpoint.hpp"

#include <json.hpp>

#include "ctrlsum/corpus.hpp"
#include "ctrlsum/error.hpp"

namespace ctrlsum {

std::string checkpoint_to_json(const Checkpoint& c) {
  using nlohmann::json;
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["task"] = std::string(to_string(c.task));
  j["mode"] = c.mode;
  j["iteration"] = c.iteration;
  j["vocabulary"] = json::parse(vocabulary_to_json(c.vocab));
  j["bin_table"] = c.bin_table ? json::parse(bin_table_to_json(*c.bin_table)) : json(nullptr);
  const auto& d = c.params.dims();
  j["dims"] = {{"vocab", d.vocab},
               {"embed", d.embed},
               {"control", d.control},
               {"hidden", d.hidden},
               {"control_rows", d.control_rows}};
  json blocks = json::array();
  for (const auto& b : PolicyParams::layout(d)) {
    blocks.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"offset", b.offset}});
  }
  j["layout"] = blocks;
  const auto& flat = c.params.flat();
  j["params"] = std::vector<double>(flat.data(), flat.data() + flat.size());
  j["lambda"] = c.lambda;
  return j.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw DataError("unsupported checkpoint format_version " + std::to_string(version));
    }
    Checkpoint c;
    c.task = task_from_string(j.at("task").get<std::string>());
    c.mode = j.at("mode").get<std::string>();
    c.iteration = j.at("iteration").get<long>();
    c.vocab = vocabulary_from_json(j.at("vocabulary").dump());
    if (!j.at("bin_table").is_null()) c.bin_table = bin_table_from_json(j.at("bin_table").dump());
    const auto& jd = j.at("dims");
    PolicyDims dims;
    dims.vocab = jd.at("vocab").get<int>();
    dims.embed = jd.at("embed").get<int>();
    dims.control = jd.at("control").get<int>();
    dims.hidden = jd.at("hidden").get<int>();
    dims.control_rows = jd.at("control_rows").get<int>();
    if (dims.vocab != static_cast<int>(c.vocab.size())) {
      throw DataError("checkpoint dims.vocab " + std::to_string(dims.vocab) + " differs from its vocabulary size " +
                      std::to_string(c.vocab.size()));
    }
    dims.validate();
    const auto values = j.at("params").get<std::vector<double>>();
    if (values.size() != dims.parameter_count()) {
      throw DataError("checkpoint holds " + std::to_string(values.size()) + " parameters, dims need " +
                      std::to_string(dims.parameter_count()));
    }
    c.params = PolicyParams(dims, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    c.lambda = j.at("lambda").get<std::vector<double>>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_text_file(path, checkpoint_to_json(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace ctrlsum
