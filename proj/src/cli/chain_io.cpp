#include "blrhl/cli/chain_io.hpp"

#include <filesystem>

#include "blrhl/cli/csv_io.hpp"
#include "blrhl/errors.hpp"

namespace blrhl::cli {

namespace fs = std::filesystem;

nlohmann::ordered_json ChainManifest::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "blrhl-chain";
  j["version"] = 1;
  j["command"] = command;
  j["n_train"] = n_train;
  j["p"] = p;
  j["num_classes"] = num_classes;
  j["features"] = features;
  j["draws"] = draws;
  j["sweeps"] = sweeps;
  j["config"] = cli::to_json(config);
  return j;
}

ChainManifest ChainManifest::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "blrhl-chain") throw ValidationError("not a chain manifest");
    ChainManifest m;
    m.command = j.at("command").get<std::string>();
    m.n_train = j.at("n_train").get<int>();
    m.p = j.at("p").get<int>();
    m.num_classes = j.at("num_classes").get<int>();
    m.features = j.at("features").get<std::vector<int>>();
    m.draws = j.at("draws").get<std::size_t>();
    m.sweeps = j.at("sweeps").get<std::size_t>();
    m.config = config_from_json(j.at("config"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed chain manifest: ") + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out;
  open_for_write(out, path);
  out << j.dump(2) << '\n';
  if (!out) throw ValidationError("failed writing " + path);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

ChainWriter::ChainWriter(const std::string& dir, int p, int num_classes) : dir_(dir) {
  fs::create_directories(dir);
  open_for_write(delta_, (fs::path(dir) / "delta.csv").string());
  open_for_write(sigma2_, (fs::path(dir) / "sigma2.csv").string());
  open_for_write(logw_, (fs::path(dir) / "logw.csv").string());
  open_for_write(diagnostics_, (fs::path(dir) / "diagnostics.csv").string());

  delta_ << "draw";
  for (int j = 0; j <= p; ++j) {
    for (int k = 1; k < num_classes; ++k) delta_ << ",d" << j << '_' << k;
  }
  delta_ << '\n';
  sigma2_ << "draw";
  for (int j = 1; j <= p; ++j) sigma2_ << ",s" << j;
  sigma2_ << '\n';
  logw_ << "draw,log_w\n";
  diagnostics_ << "sweep,phase,accepted,divergent,delta_h,active_size,u\n";
}

void ChainWriter::on_sweep(int sweep, const SweepDiagnostics& diag) {
  diagnostics_ << sweep << ',' << (diag.phase == Phase::initial ? 1 : 2) << ',' << (diag.accepted ? 1 : 0) << ','
               << (diag.divergent ? 1 : 0) << ',' << format_double(diag.hamiltonian_delta) << ','
               << diag.active_size << ',' << format_double(diag.potential) << '\n';
}

void ChainWriter::on_draw(int draw, const ChainState& state) {
  delta_ << draw << ',';
  write_row(delta_, state.delta.data(), static_cast<std::size_t>(state.delta.size()));
  delta_ << '\n';
  sigma2_ << draw;
  if (state.sigma2.size() > 0) {
    sigma2_ << ',';
    write_row(sigma2_, state.sigma2.data(), static_cast<std::size_t>(state.sigma2.size()));
  }
  sigma2_ << '\n';
  logw_ << draw << ',' << format_double(state.log_w) << '\n';
}

void ChainWriter::close() {
  for (std::ofstream* f : {&delta_, &sigma2_, &logw_, &diagnostics_}) {
    f->flush();
    if (!*f) throw ValidationError("failed writing chain files in " + dir_);
    f->close();
  }
}

void write_manifest(const std::string& dir, const ChainManifest& manifest) {
  write_json((fs::path(dir) / "manifest.json").string(), manifest.to_json());
}

ChainManifest read_manifest(const std::string& dir) {
  return ChainManifest::from_json(read_json((fs::path(dir) / "manifest.json").string()));
}

void write_transform(const std::string& dir, const StandardizeTransform& transform) {
  std::ofstream out;
  open_for_write(out, (fs::path(dir) / "transform.csv").string());
  out << "feature,mean,scale,degenerate\n";
  for (Eigen::Index j = 0; j < transform.mean.size(); ++j) {
    out << j + 1 << ',' << format_double(transform.mean[j]) << ',' << format_double(transform.scale[j]) << ','
        << (transform.degenerate[static_cast<std::size_t>(j)] ? 1 : 0) << '\n';
  }
  if (!out) throw ValidationError("failed writing transform.csv");
}

StandardizeTransform read_transform(const std::string& dir) {
  const CsvTable table = read_csv((fs::path(dir) / "transform.csv").string());
  if (table.header != std::vector<std::string>{"feature", "mean", "scale", "degenerate"}) {
    throw ValidationError("transform.csv has an unexpected header");
  }
  StandardizeTransform t;
  const auto p = static_cast<Eigen::Index>(table.rows.size());
  t.mean.resize(p);
  t.scale.resize(p);
  t.degenerate.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& row = table.rows[static_cast<std::size_t>(j)];
    t.mean[j] = row[1];
    t.scale[j] = row[2];
    t.degenerate[static_cast<std::size_t>(j)] = row[3] != 0.0;
    if (!(t.scale[j] > 0.0)) throw ValidationError("transform.csv: nonpositive scale");
  }
  return t;
}

ChainRecord read_chain(const std::string& dir, const ChainManifest& manifest) {
  const int p = manifest.p;
  const int num_k = manifest.num_classes - 1;
  const CsvTable delta = read_csv((fs::path(dir) / "delta.csv").string());
  const CsvTable sigma2 = read_csv((fs::path(dir) / "sigma2.csv").string());
  const CsvTable logw = read_csv((fs::path(dir) / "logw.csv").string());
  if (delta.header.size() != static_cast<std::size_t>((p + 1) * num_k + 1) ||
      sigma2.header.size() != static_cast<std::size_t>(p + 1)) {
    throw ValidationError(dir + ": chain files do not match the manifest shape");
  }
  if (delta.rows.size() != manifest.draws || sigma2.rows.size() != manifest.draws ||
      logw.rows.size() != manifest.draws) {
    throw ValidationError(dir + ": draw count does not match the manifest");
  }

  ChainRecord record;
  for (std::size_t d = 0; d < manifest.draws; ++d) {
    CoefMatrix m(p + 1, num_k);
    std::copy(delta.rows[d].begin() + 1, delta.rows[d].end(), m.data());
    record.delta_draws.push_back(std::move(m));
    VarianceVector s(p);
    std::copy(sigma2.rows[d].begin() + 1, sigma2.rows[d].end(), s.data());
    record.sigma2_draws.push_back(std::move(s));
    record.log_w_draws.push_back(logw.rows[d][1]);
  }

  const CsvTable diag = read_csv((fs::path(dir) / "diagnostics.csv").string());
  for (const auto& row : diag.rows) {
    SweepDiagnostics s;
    s.phase = row[1] == 1.0 ? Phase::initial : Phase::sampling;
    s.accepted = row[2] != 0.0;
    s.divergent = row[3] != 0.0;
    s.hamiltonian_delta = row[4];
    s.active_size = static_cast<int>(row[5]);
    s.potential = row[6];
    record.diagnostics.push_back(s);
  }
  return record;
}

void write_chain_dir(const std::string& dir, const ChainRecord& record, const StandardizeTransform& transform,
                     const ChainManifest& manifest) {
  ChainWriter writer(dir, manifest.p, manifest.num_classes);
  for (std::size_t s = 0; s < record.diagnostics.size(); ++s) writer.on_sweep(static_cast<int>(s), record.diagnostics[s]);
  for (std::size_t d = 0; d < record.delta_draws.size(); ++d) {
    ChainState state;
    state.delta = record.delta_draws[d];
    state.sigma2 = record.sigma2_draws[d];
    state.log_w = record.log_w_draws[d];
    writer.on_draw(static_cast<int>(d), state);
  }
  writer.close();
  write_transform(dir, transform);
  write_manifest(dir, manifest);
}

}  // namespace blrhl::cli
