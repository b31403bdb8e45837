// fssr/common/config.h
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

#ifndef FSSR_COMMON_CONFIG_H_
#define FSSR_COMMON_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>

namespace fssr {

// Layered key-value configuration: defaults, then zero or more files, then
// command-line overrides, later layers winning. Every run dumps its resolved
// view next to its outputs so experiments can be replayed.
class Config {
 public:
  Config() = default;

  // Parses "key = value" lines; '#' starts a comment. Throws on unreadable
  // files or malformed lines.
  void LoadFile(const std::string &path);

  void Set(const std::string &key, const std::string &value);

  bool Has(const std::string &key) const;

  std::string Get(const std::string &key, const std::string &def) const;
  // Throws kInvalidArgument when the key is absent.
  std::string GetRequired(const std::string &key) const;

  int64_t GetInt(const std::string &key, int64_t def) const;
  double GetDouble(const std::string &key, double def) const;
  bool GetBool(const std::string &key, bool def) const;

  // Deterministic "key = value" dump, sorted by key.
  std::string Resolved() const;
  void WriteResolved(const std::string &path) const;

  const std::map<std::string, std::string> &entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace fssr

#endif  // FSSR_COMMON_CONFIG_H_
