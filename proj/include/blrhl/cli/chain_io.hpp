#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blrhl/cli/config.hpp"
#include "blrhl/gibbs.hpp"
#include "blrhl/preprocess.hpp"

namespace blrhl::cli {

// Chain directory layout:
//   manifest.json     settings echo and shape
//   transform.csv     feature,mean,scale,degenerate
//   delta.csv         draw,d0_1..dp_K      one row per recorded draw
//   sigma2.csv        draw,s1..sp
//   logw.csv          draw,log_w
//   diagnostics.csv   sweep,phase,accepted,divergent,delta_h,active_size,u

struct ChainManifest {
  std::string command = "fit";
  RunConfig config;
  int n_train = 0;
  int p = 0;
  int num_classes = 2;
  std::vector<int> features;  // fitted subset of the input columns; empty = all
  std::size_t draws = 0;
  std::size_t sweeps = 0;

  nlohmann::ordered_json to_json() const;
  static ChainManifest from_json(const nlohmann::json& j);
};

/// Streams a running chain to disk.
class ChainWriter : public ChainObserver {
 public:
  ChainWriter(const std::string& dir, int p, int num_classes);

  void on_sweep(int sweep, const SweepDiagnostics& diag) override;
  void on_draw(int draw, const ChainState& state) override;

  /// Flush and check every stream.
  void close();

 private:
  std::string dir_;
  std::ofstream delta_, sigma2_, logw_, diagnostics_;
};

void write_manifest(const std::string& dir, const ChainManifest& manifest);
ChainManifest read_manifest(const std::string& dir);

void write_transform(const std::string& dir, const StandardizeTransform& transform);
StandardizeTransform read_transform(const std::string& dir);

/// Recorded draws and per-sweep diagnostics.
ChainRecord read_chain(const std::string& dir, const ChainManifest& manifest);

/// Write a complete chain directory from an in-memory record.
void write_chain_dir(const std::string& dir, const ChainRecord& record, const StandardizeTransform& transform,
                     const ChainManifest& manifest);

void write_json(const std::string& path, const nlohmann::ordered_json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace blrhl::cli
