#include "tilr/config.hpp"

#include <charconv>
#include <fstream>

#include "tilr/error.hpp"

namespace tilr {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T Number(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ValidationError("config key '" + key + "': bad number '" + text + "'");
  return v;
}

bool Bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ValidationError("config key '" + key + "': expected true or false, got '" + text + "'");
}

}  // namespace

KeyValues ParseKeyValues(std::istream& in) {
  KeyValues out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(n) + ": expected key = value");
    std::string key = Trim(line.substr(0, eq));
    if (key.empty()) throw FormatError("config line " + std::to_string(n) + ": empty key");
    if (!out.emplace(key, Trim(line.substr(eq + 1))).second) {
      throw FormatError("config line " + std::to_string(n) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

KeyValues ReadKeyValueFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return ParseKeyValues(in);
}

void ApplyTrainConfig(const KeyValues& values, TrainConfig& c) {
  for (const auto& [k, v] : values) {
    if (k == "train_data") c.train_data = v;
    else if (k == "test_data") c.test_data = v;
    else if (k == "mnist_dir") c.mnist_dir = v;
    else if (k == "checkpoint") c.checkpoint = v;
    else if (k == "metrics") c.metrics = v;
    else if (k == "epochs") c.epochs = Number<std::size_t>(k, v);
    else if (k == "batch_size") c.batch_size = Number<std::size_t>(k, v);
    else if (k == "lr") c.lr = Number<double>(k, v);
    else if (k == "seed") c.seed = Number<std::uint64_t>(k, v);
    else if (k == "timeout_minutes") c.timeout_minutes = Number<double>(k, v);
    else if (k == "hidden") c.hidden = Number<std::size_t>(k, v);
    else if (k == "evaluate_each_epoch") c.evaluate_each_epoch = Bool(k, v);
    else if (k == "target") c.refinement.target = Number<double>(k, v);
    else if (k == "max_iterations") c.refinement.max_iterations = Number<std::size_t>(k, v);
    else if (k == "tolerance") c.refinement.tolerance = Number<double>(k, v);
    else throw ValidationError("unknown config key '" + k + "'");
  }
}

}  // namespace tilr
