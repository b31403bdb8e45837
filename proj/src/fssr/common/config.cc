// fssr/common/config.cc
//
// Copyright 2026  FSSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fssr/common/config.h"

#include <fstream>
#include <sstream>

#include "fssr/common/error.h"

namespace fssr {

namespace {

std::string Strip(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void Config::LoadFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) FSSR_RAISE(ErrorCode::kIo) << "cannot open config file: " << path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Strip(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      FSSR_RAISE(ErrorCode::kInvalidArgument)
          << path << ":" << lineno << ": expected 'key = value'";
    const std::string key = Strip(line.substr(0, eq));
    const std::string value = Strip(line.substr(eq + 1));
    if (key.empty())
      FSSR_RAISE(ErrorCode::kInvalidArgument)
          << path << ":" << lineno << ": empty key";
    entries_[key] = value;
  }
}

void Config::Set(const std::string &key, const std::string &value) {
  entries_[key] = value;
}

bool Config::Has(const std::string &key) const {
  return entries_.count(key) != 0;
}

std::string Config::Get(const std::string &key, const std::string &def) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? def : it->second;
}

std::string Config::GetRequired(const std::string &key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    FSSR_RAISE(ErrorCode::kInvalidArgument)
        << "missing required config key: " << key;
  return it->second;
}

int64_t Config::GetInt(const std::string &key, int64_t def) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return def;
  try {
    return std::stoll(it->second);
  } catch (const std::exception &) {
    FSSR_RAISE(ErrorCode::kInvalidArgument)
        << "config key " << key << " is not an integer: " << it->second;
  }
}

double Config::GetDouble(const std::string &key, double def) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return def;
  try {
    return std::stod(it->second);
  } catch (const std::exception &) {
    FSSR_RAISE(ErrorCode::kInvalidArgument)
        << "config key " << key << " is not a number: " << it->second;
  }
}

bool Config::GetBool(const std::string &key, bool def) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return def;
  const std::string &v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  FSSR_RAISE(ErrorCode::kInvalidArgument)
      << "config key " << key << " is not a boolean: " << v;
}

std::string Config::Resolved() const {
  std::ostringstream os;
  for (const auto &[k, v] : entries_) os << k << " = " << v << "\n";
  return os.str();
}

void Config::WriteResolved(const std::string &path) const {
  std::ofstream out(path);
  if (!out) FSSR_RAISE(ErrorCode::kIo) << "cannot write config file: " << path;
  out << Resolved();
}

const char *ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kUnreadableFile: return "UnreadableFile";
    case ErrorCode::kEmptyAudio: return "EmptyAudio";
    case ErrorCode::kClipTooShort: return "ClipTooShort";
    case ErrorCode::kAlreadyNormalized: return "AlreadyNormalized";
    case ErrorCode::kMissingRoot: return "MissingRoot";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kPoolTooSmall: return "PoolTooSmall";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kCheckpointIncompatible: return "CheckpointIncompatible";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace fssr
