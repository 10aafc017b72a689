#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "objstore/harness.hpp"

namespace {

objstore::harness::RunConfig loadConfig(const std::string& configPath,
                                        const std::vector<std::string>& overrides) {
  auto cfg = configPath.empty() ? objstore::harness::RunConfig::defaults()
                                : objstore::harness::RunConfig::fromFile(configPath);
  for (const auto& kv : overrides) cfg.setPair(kv);
  return cfg;
}

void writeOut(const objstore::harness::Table& table, const std::string& outPath) {
  if (outPath.empty() || outPath == "-") {
    std::cout << table.csv();
    return;
  }
  std::ofstream out(outPath);
  if (!out) throw std::runtime_error("cannot write: " + outPath);
  out << table.csv();
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed object server simulator"};
  app.require_subcommand(1);

  std::string configPath, outPath, axis, valuesCsv;
  std::vector<std::string> overrides;

  auto addCommon = [&](CLI::App* cmd) {
    cmd->add_option("--config", configPath, "key=value configuration file");
    cmd->add_option("--set", overrides, "override one configuration key (key=value)");
    cmd->add_option("--out", outPath, "output CSV path (default: stdout)");
  };

  CLI::App* run = app.add_subcommand("run", "run one configuration");
  addCommon(run);

  CLI::App* sweep = app.add_subcommand("sweep", "run once per value of one key");
  addCommon(sweep);
  sweep->add_option("--axis", axis, "configuration key to vary")->required();
  sweep->add_option("--values", valuesCsv, "comma-separated values for the axis")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = loadConfig(configPath, overrides);
    if (run->parsed()) {
      writeOut(objstore::harness::runOnce(cfg), outPath);
    } else {
      std::vector<std::string> values;
      std::string v;
      std::istringstream in(valuesCsv);
      while (std::getline(in, v, ',')) values.push_back(v);
      writeOut(objstore::harness::sweep(cfg, axis, values), outPath);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
