#pragma once

// Flat "key = value" configuration files. '#' starts a comment; blank lines
// are ignored; keys may appear once.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "tilr/train.hpp"

namespace tilr {

using KeyValues = std::map<std::string, std::string>;

/// Throws FormatError naming the line for a missing '=', empty key or duplicate.
KeyValues ParseKeyValues(std::istream& in);
KeyValues ReadKeyValueFile(const std::filesystem::path& path);

/// Applies the training keys (train_data, test_data, mnist_dir, checkpoint,
/// metrics, epochs, batch_size, lr, seed, timeout_minutes, hidden,
/// evaluate_each_epoch, target, max_iterations, tolerance). Throws
/// ValidationError on an unknown key or an unparsable value.
void ApplyTrainConfig(const KeyValues& values, TrainConfig& config);

}  // namespace tilr
