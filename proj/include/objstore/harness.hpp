#pragma once

#include <map>
#include <string>
#include <vector>

#include "objstore/sim.hpp"

namespace objstore::harness {

// Flat key=value run configuration. Every key has a default; unknown keys are
// rejected up front so a sweep over a misspelled axis fails loudly instead of
// measuring the default forever.
class RunConfig {
public:
  static RunConfig defaults();
  static RunConfig fromFile(const std::string& path); // defaults overlaid with the file

  void set(const std::string& key, const std::string& value);
  void setPair(const std::string& keyEqValue); // "key=value"

  const std::string& get(const std::string& key) const;
  long long getInt(const std::string& key) const;
  double getDouble(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

  SimConfig simConfig() const;
  std::vector<ClientBody> clientBodies() const;

private:
  std::map<std::string, std::string> kv_;
};

// Result rows with a fixed header; one row per actor per run.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void append(const Table& other); // headers must agree
  std::string csv() const;
};

Table runOnce(const RunConfig& cfg);
Table sweep(const RunConfig& cfg, const std::string& axis,
            const std::vector<std::string>& values);

} // namespace objstore::harness
